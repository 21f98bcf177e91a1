#pragma once

#include <array>
#include <vector>

#include "hybridsteer/fock.hpp"
#include "hybridsteer/model.hpp"

// Assemblage {sigma_{a|theta}}: the unnormalized conditional states of the
// CV mode indexed by Alice's phase choice theta and sign outcome a,
// sigma_{a|theta} = Tr_A[(M_{a|theta} x 1) rho_AB].

namespace hst {

struct Assemblage {
  std::vector<double> phases;  // radians, size m_A
  // members[t][s]: s = 0 for a = +1, s = 1 for a = -1.
  std::vector<std::array<Eigen::MatrixXcd, 2>> members;

  int n_phases() const { return static_cast<int>(phases.size()); }
  int dim() const { return members.empty() ? 0 : static_cast<int>(members[0][0].rows()); }
  static int sign_index(int sign) { return sign > 0 ? 0 : 1; }

  const Eigen::MatrixXcd& member(int theta_index, int sign) const {
    return members.at(theta_index)[sign_index(sign)];
  }
  Eigen::MatrixXcd& member(int theta_index, int sign) {
    return members.at(theta_index)[sign_index(sign)];
  }

  /// Unconditioned state sum_a sigma_{a|theta} for one phase.
  Eigen::MatrixXcd unconditioned(int theta_index) const;

  /// Largest trace-distance between unconditioned states across phases.
  double signaling_deviation() const;

  void check_valid(double psd_floor = -1e-10, double trace_tol = 1e-9) const;
};

/// Assemblage of a two-mode state under sign-binned homodyne on mode 0,
/// with Alice's POVM smeared by the given Gaussian phase noise.
/// Phases must be distinct modulo pi.
Assemblage compute_assemblage(const DensityMatrix& rho_ab, const std::vector<double>& phases,
                              double phase_noise_sigma);

/// Closed form for the lossless cat-basis state:
///   sigma_{a|theta} = 1/2 [ R |m><m| + (1-R) |p><p| ]
///                     - (a/2) sqrt(2 R (1-R) / pi) [ e^{i theta} |m><p| + h.c. ]
/// with |p>, |m> the even/odd cats of amplitude alpha. Serves as the analytic
/// cross-check of compute_assemblage on the ideal tier.
Assemblage ideal_assemblage(double R, cxd alpha, const std::vector<double>& phases, int n_max);

struct NonsignalingReport {
  Eigen::MatrixXd fidelities;  // pairwise F of normalized unconditioned states
  double mean = 1.0;           // mean over distinct pairs
};

/// Pairwise Uhlmann fidelities between normalized unconditioned states.
NonsignalingReport nonsignaling_report(const Assemblage& assemblage);

}  // namespace hst
