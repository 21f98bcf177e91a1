#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "hybridsteer/assemblage.hpp"
#include "hybridsteer/sdp.hpp"

// Bob-side conditional-state reconstruction from quadrature records
// (iterative maximum likelihood with detection-efficiency-corrected POVMs)
// and Metropolis-Hastings sampling of the reconstruction uncertainty.

namespace hst {

/// One heralding event's measurement data.
struct QuadratureRecord {
  std::int64_t event_id = 0;
  int alice_phase_index = 0;
  int alice_sign = +1;  // +1 / -1
  double bob_phase = 0.0;  // radians
  double bob_q = 0.0;
};

/// Histogram of one condition (alice_phase_index, alice_sign): counts over
/// (bob phase, q bin).
struct ConditionHistogram {
  std::vector<double> bob_phases;        // distinct phases, ascending
  Eigen::MatrixXd counts;                // n_phases x n_bins
  double q_min = -6.0, q_max = 6.0;      // uniform bin range
  std::int64_t total = 0;
  std::int64_t clipped_low = 0, clipped_high = 0;

  Eigen::VectorXd edges() const {
    return Eigen::VectorXd::LinSpaced(int(counts.cols()) + 1, q_min, q_max);
  }
};

struct BinnedData {
  double q_min = -6.0, q_max = 6.0;
  int n_bins = 100;
  /// Key: (alice_phase_index, sign_index) with sign_index 0 for +, 1 for -.
  std::map<std::pair<int, int>, ConditionHistogram> conditions;

  Eigen::VectorXd edges() const;
};

BinnedData bin_records(const std::vector<QuadratureRecord>& records, double q_min = -6.0,
                       double q_max = 6.0, int n_bins = 100);

struct MaxlikOptions {
  int max_iter = 2000;
  double tol = 1e-9;  // log-likelihood gain per iteration
};

struct MaxlikResult {
  DensityMatrix rho;
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
  /// Smallest log-likelihood increment observed between iterations
  /// (>= -1e-10 when the ascent was monotone).
  double min_loglik_step = 0.0;
};

/// Iterative MaxLik reconstruction rho <- N[R rho R] from one condition's
/// binned data. The bin POVMs are pre-composed with the adjoint attenuation
/// map at eta_det, so the estimate lives before detection loss.
MaxlikResult maxlik_reconstruct(const ConditionHistogram& data, double eta_det, int n_max,
                                const MaxlikOptions& opt = {});

/// sigma_{a|theta} = p_hat(a|theta) * maxlik estimate of that condition.
Assemblage reconstruct_assemblage(const std::vector<QuadratureRecord>& records,
                                  const ExperimentConfig& cfg);

/// Empirical conditional sign frequencies p_hat(a|theta); sums to 1 per theta.
std::vector<std::array<double, 2>> record_frequencies(
    const std::vector<QuadratureRecord>& records, int m_A);

struct ChainParams {
  int n_retained = 10000;
  int burn_in = 20000;
  int thin = 5;
  double step_size = 0.02;
  std::uint64_t seed = 1;
};

struct MhResult {
  std::vector<Eigen::MatrixXcd> states;  // retained density matrices
  double acceptance_rate = 0.0;
  bool pathological = false;  // acceptance left [0.05, 0.8]
  double tuned_step = 0.0;
};

/// Random walk over purification vectors of dimension d^2 with multinomial
/// likelihood of the binned data; emits every thin-th state after burn-in.
/// The step size is auto-tuned toward 0.3 acceptance during burn-in only.
MhResult mh_sample(const ConditionHistogram& data, double eta_det, int n_max,
                   const ChainParams& chain);

struct ViolationHistogram {
  std::vector<double> s_values;
  double mean = 0.0;
  double stddev = 0.0;
  double separation_sigmas = 0.0;  // max(0, -mean)/stddev
};

/// Assembles sigma_{a|theta} = p_hat(a|theta) rho_sample across the joint
/// chain index and records S = evaluate_functional. When n_evaluations
/// exceeds the chain length, additional seeded random index tuples are used.
ViolationHistogram violation_histogram(
    const std::map<std::pair<int, int>, MhResult>& chains,
    const std::vector<std::array<double, 2>>& frequencies, const SteeringFunctional& F,
    long n_evaluations = 0, std::uint64_t seed = 1);

// Generic Metropolis kernel used by mh_sample; exposed for direct checks of
// the acceptance rule on toy likelihoods.
// propose(state, rng) -> candidate; log_like(state) -> double.
template <typename State, typename Propose, typename LogLike>
void metropolis_walk(State& state, double& log_l, Propose&& propose, LogLike&& log_like,
                     SplitMix64& rng, int steps, const std::function<void(const State&)>& emit,
                     int thin = 1, long* accepted = nullptr) {
  for (int k = 0; k < steps; ++k) {
    State cand = propose(state, rng);
    double cand_l = log_like(cand);
    if (cand_l >= log_l || rng.uniform() < std::exp(cand_l - log_l)) {
      state = std::move(cand);
      log_l = cand_l;
      if (accepted) ++(*accepted);
    }
    if (emit && (k + 1) % thin == 0) emit(state);
  }
}

}  // namespace hst
