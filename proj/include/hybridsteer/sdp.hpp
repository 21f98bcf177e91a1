#pragma once

#include <optional>
#include <string>

#include "hybridsteer/assemblage.hpp"
#include "hybridsteer/ipm.hpp"

// Local-hidden-state membership and optimal steering functionals via
// semidefinite programming over enumerated deterministic strategies.

namespace hst {

/// Deterministic response tables D_lambda(a|theta) in {0,1}; every sign
/// pattern over the m settings appears exactly once.
struct DeterministicStrategyTable {
  int m = 0;
  int n_strategies() const { return 1 << m; }
  /// Outcome sign of strategy lambda at setting t: +1 or -1.
  static int sign(int lambda, int t) { return ((lambda >> t) & 1) ? -1 : +1; }
  /// D_lambda(a|theta) entry.
  static int entry(int lambda, int t, int a_sign) {
    return sign(lambda, t) == a_sign ? 1 : 0;
  }
};

DeterministicStrategyTable enumerate_strategies(int m_A);

/// Family {F_{a|theta}} of Hermitian operators defining a steering inequality
/// sum_{a,theta} Tr[F_{a|theta} sigma_{a|theta}] >= 0 for LHS assemblages.
struct SteeringFunctional {
  std::vector<double> phases;
  std::vector<std::array<Eigen::MatrixXcd, 2>> ops;  // [t][s]
  std::string normalization_tag = "unit-operator-bounds";  // -1 <= F <= 1

  int n_phases() const { return int(phases.size()); }
  int dim() const { return ops.empty() ? 0 : int(ops[0][0].rows()); }
};

/// Re-checks the certificate by eigendecomposition: every strategy sum PSD
/// within tol and every operator within the unit bounds (when bounded).
/// Returns the worst constraint violation (0 if none).
double functional_constraint_violation(const SteeringFunctional& f, bool check_bounds = true);

enum class SdpStatus { Optimal, Infeasible, NumericalFailure };
std::string to_string(SdpStatus s);

struct SdpResult {
  SdpStatus status = SdpStatus::NumericalFailure;
  double objective = 0.0;
  double duality_gap = 0.0;  // relative
  int iterations = 0;
  int dim = 0;               // Bob dimension after reduction
  std::optional<SteeringFunctional> functional;
  /// LHS decomposition sigma_lambda (membership solves, on success).
  std::vector<Eigen::MatrixXcd> lhs_decomposition;
  bool lhs_member = false;
  /// Trace-distance of the non-signaling projection applied before a
  /// membership solve (0 for engine-built assemblages).
  double signaling_correction = 0.0;
};

struct SdpOptions {
  double gap_tol = 1e-8;
  int max_iter = 200;
  /// Keep the smallest leading Fock block holding >= 1 - capture_tol of
  /// every member's trace.
  double capture_tol = 1e-6;
};

/// Feasibility SDP for Eq.-style LHS membership: maximize t subject to
/// sigma_lambda - t I >= 0 and sum_lambda D_lambda(a|theta) sigma_lambda =
/// sigma_{a|theta}; membership is declared when t >= -1e-8. Slightly
/// signaling inputs (reconstructed assemblages) are first projected onto the
/// non-signaling subspace; the applied correction is reported.
SdpResult lhs_membership(const Assemblage& assemblage, const SdpOptions& opt = {});

/// Minimizes S = sum Tr[F sigma] over functionals with
/// sum_{a,theta} D_lambda(a|theta) F_{a|theta} >= 0 and -1 <= F <= 1.
/// S_min < 0 certifies steering.
SdpResult optimal_functional(const Assemblage& assemblage, const SdpOptions& opt = {});

/// Pure evaluation of S for a given functional (no optimization).
double evaluate_functional(const SteeringFunctional& f, const Assemblage& assemblage);

enum class SweepAxis { MA, R, EtaA };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepPoint {
  double value = 0.0;
  double s_min = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  double gap = 0.0;
  int dim = 0;
  double optimal_R = -1.0;  // set when the ratio was optimized per point
};

struct SweepResult {
  SweepAxis axis = SweepAxis::R;
  std::vector<SweepPoint> points;
  bool monotone_checked = false;  // only meaningful for the m_A axis
  bool monotone_ok = true;
};

/// Rebuild state -> losses -> assemblage -> optimal_functional per value.
/// For the m_A axis the heralding ratio is optimized per point by
/// golden-section search (tolerance 1e-3); other axes use the configured R.
/// Points run in parallel; a single solve is single-threaded.
SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& values, const SdpOptions& opt = {});

/// Golden-section search for the R minimizing S_min at the given config.
std::pair<double, double> optimize_ratio(const ExperimentConfig& base,
                                         const SdpOptions& opt = {}, double r_lo = 0.05,
                                         double r_hi = 0.95, double tol = 1e-3);

/// Assemblage of the configured experiment (state, losses, POVM smearing).
Assemblage model_assemblage(const ExperimentConfig& cfg);

}  // namespace hst
