#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hybridsteer/common.hpp"

// Truncated Fock-space linear algebra for one- and two-mode optical states.
//
// Quadrature convention used throughout the library: the vacuum quadrature
// variance is 1/2, i.e. q_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt(2).
// Phase-space coordinates follow the same scale, so a coherent state |alpha>
// with real alpha peaks at x = sqrt(2) * alpha and the Wigner function of the
// vacuum is exp(-x^2 - p^2) / pi.

namespace hst {

/// Pure state on one or more truncated Fock modes.
struct StateVector {
  Eigen::VectorXcd amps;
  std::vector<int> mode_dims;
  /// Pre-normalization probability weight lost to the cutoff.
  double truncation_tail = 0.0;

  int dim() const { return static_cast<int>(amps.size()); }
  int n_modes() const { return static_cast<int>(mode_dims.size()); }
  /// Photon-number cutoff of a single-mode state.
  int cutoff() const { return mode_dims.at(0) - 1; }
};

/// Hermitian positive matrix over the (possibly tensored) Fock basis.
/// Trace 1 for normalized states; assemblage members keep trace < 1.
struct DensityMatrix {
  Eigen::MatrixXcd mat;
  std::vector<int> mode_dims;

  static DensityMatrix pure(const StateVector& psi) {
    DensityMatrix rho;
    rho.mat = psi.amps * psi.amps.adjoint();
    rho.mode_dims = psi.mode_dims;
    return rho;
  }

  int dim() const { return static_cast<int>(mat.rows()); }
  int n_modes() const { return static_cast<int>(mode_dims.size()); }
  double trace() const { return mat.trace().real(); }

  /// Throws unless Hermitian within herm_tol, eigenvalues >= eig_floor and
  /// trace in (0, 1 + trace_slack].
  void check_valid(double herm_tol = 1e-12, double eig_floor = -1e-10,
                   double trace_slack = 1e-12) const;
};

inline constexpr double kDefaultTailTol = 1e-6;

StateVector fock_basis_state(int n, int n_max);
StateVector coherent_state(cxd alpha, int n_max, double tail_tol = kDefaultTailTol);

/// (|alpha> + parity |-alpha>) / norm. Even parity populates only even photon
/// numbers, odd parity only odd ones (exact zeros elsewhere).
StateVector cat_state(cxd alpha, int parity, int n_max, double tail_tol = kDefaultTailTol);

/// Squeezed vacuum with variance 10^{-db/10}/2 along the quadrature at
/// theta = pi/2 and 10^{+db/10}/2 along theta = 0, i.e. elongated along x so
/// that it approximates the even cat of a real amplitude. r = db ln(10)/20.
StateVector squeezed_vacuum(double squeezing_db, int n_max, double tail_tol = kDefaultTailTol);

/// Annihilation operator followed by renormalization.
StateVector photon_subtract(const StateVector& psi);

StateVector tensor(const StateVector& a, const StateVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state of a two-mode density matrix; keep is the surviving mode.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);

/// Beam-splitter attenuation of transmissivity eta on the given mode,
/// vacuum ancilla traced out. Trace preserving.
DensityMatrix loss_channel(const DensityMatrix& rho, double eta, int mode);

/// Conjugation by diag(e^{i n theta}) on the given mode.
DensityMatrix phase_rotate(const DensityMatrix& rho, double theta, int mode);
StateVector phase_rotate(const StateVector& psi, double theta, int mode);

/// Uhlmann fidelity in the squared-overlap convention:
/// F(|psi>,|phi>) = |<psi|phi>|^2. Inputs must be normalized.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double state_fidelity(const StateVector& a, const StateVector& b);

/// Entanglement negativity (||rho^{T_A}||_1 - 1)/2 of a two-mode state,
/// partial transpose taken on mode 0.
double negativity(const DensityMatrix& rho);

double mean_photon_number(const StateVector& psi);
double mean_photon_number(const DensityMatrix& rho);

/// Schmidt coefficients (descending singular values) of a pure two-mode state.
Eigen::VectorXd schmidt_coefficients(const StateVector& psi);

/// Wigner function at the given (x, p) points, normalized so that
/// the integral over the whole plane is 1; vacuum peaks at 1/pi.
std::vector<double> wigner(const DensityMatrix& rho,
                           const std::vector<std::pair<double, double>>& points);

struct WignerGrid {
  Eigen::ArrayXd xs, ps;
  Eigen::MatrixXd values;  // values(i,j) = W(xs[i], ps[j])
};

WignerGrid wigner_grid(const DensityMatrix& rho, double x_min, double x_max, int nx,
                       double p_min, double p_max, int np);

/// Trapezoid integral of a Wigner grid, used by normalization checks.
double wigner_grid_integral(const WignerGrid& g);

}  // namespace hst
