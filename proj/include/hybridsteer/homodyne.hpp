#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hybridsteer/common.hpp"
#include "hybridsteer/fock.hpp"

// Quadrature wavefunctions, sign-binned homodyne POVMs and quadrature
// sampling. Same convention as fock.hpp: vacuum variance 1/2.

namespace hst {

/// Harmonic-oscillator eigenfunction psi_n(q) = H_n(q) e^{-q^2/2} / sqrt(2^n n! sqrt(pi)).
double quadrature_wavefunction(int n, double q);

/// All of psi_0(q) .. psi_{n_max}(q) by the stable three-term recurrence.
Eigen::VectorXd quadrature_wavefunctions(int n_max, double q);

/// One element of Alice's sign-binned measurement {M_{+|theta}, M_{-|theta}}.
struct BinnedPovmElement {
  Eigen::MatrixXcd op;          // Fock basis, dim n_max+1
  double phase = 0.0;           // radians
  int sign = +1;                // +1 or -1
  double phase_noise_sigma = 0.0;
};

/// Cached table of half-line overlaps I_{mn} = int_0^inf psi_m psi_n dq for
/// m, n <= n_max. Same-parity off-diagonal entries vanish; the diagonal is 1/2.
const Eigen::MatrixXd& halfline_overlaps(int n_max);

/// Sign-binned quadrature POVM element at local-oscillator phase theta:
/// M_{+|theta} = D(theta) M_{+|0} D(theta)^dag with D = diag(e^{i n theta}),
/// <m|M_{+|0}|n> = I_{mn}; M_{-|theta} = 1 - M_{+|theta}.
BinnedPovmElement halfline_povm(double theta, int sign, int n_max);

/// Gaussian average of a POVM family over phase jitter eps ~ N(0, sigma^2),
/// evaluated by Gauss-Hermite quadrature (21 nodes).
BinnedPovmElement smear_phase(const std::function<BinnedPovmElement(double)>& family,
                              double theta, double sigma);

/// halfline_povm followed by smear_phase (no-op when sigma == 0).
BinnedPovmElement halfline_povm_smeared(double theta, int sign, int n_max, double sigma);

/// p(q|theta) = sum_{mn} rho_{mn} e^{i theta (n-m)} psi_m(q) psi_n(q)
/// evaluated on the given grid of quadrature values.
Eigen::ArrayXd quadrature_pdf(const DensityMatrix& rho, double theta,
                              const Eigen::ArrayXd& q);

/// i.i.d. samples of the homodyne outcome at phase theta, drawn by inverse
/// CDF on a tabulated grid (step 0.01 over [-8, 8]); deterministic per seed.
std::vector<double> sample_quadrature(const DensityMatrix& rho, double theta,
                                      std::uint64_t seed, int n);

/// Per-bin overlap matrices B^{(b)}_{mn} = int_{bin b} psi_m psi_n dq for the
/// bins defined by `edges` (ascending). The first and last bins are extended
/// to -inf / +inf so the family sums to the identity exactly.
std::vector<Eigen::MatrixXd> bin_overlap_tables(int n_max, const Eigen::VectorXd& edges);

/// Nodes and weights of an n-point Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Adaptive Gauss-Legendre integration to the given absolute tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-12);

}  // namespace hst
