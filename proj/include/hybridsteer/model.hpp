#pragma once

#include <string>
#include <vector>

#include "hybridsteer/fock.hpp"

// Hybrid CV-DV entangled-state model:
//   |Psi> = sqrt(R) |0>|minus> - sqrt(1-R) |1>|plus>
// where {|plus>, |minus>} is either the ideal cat basis (even/odd cats of
// amplitude alpha) or its physical approximation (squeezed vacuum and
// photon-subtracted squeezed vacuum). The two basis states have opposite
// photon-number parity, hence are exactly orthogonal in both tiers.

namespace hst {

enum class ModelTier { IdealCat, SqueezedApprox };

std::string to_string(ModelTier t);
ModelTier model_tier_from_string(const std::string& s);

/// All physical and numerical parameters of a run. Angles are stored in
/// radians internally; the JSON file format uses degrees (see io.hpp).
struct ExperimentConfig {
  cxd alpha = 1.0;               // cat amplitude
  double squeezing_db = 3.0;     // squeezed-approx tier squeezing
  double R = 0.36;               // heralding ratio, weight of |0>|minus>
  double eta_A = 0.75;           // Alice overall transmission efficiency
  double eta_B_channel = 0.90;   // Bob propagation/escape efficiency
  double eta_B_det = 0.85;       // Bob detection efficiency (corrected in tomography)
  int n_max_A = 3;               // DV-mode Fock cutoff
  int n_max_B = 10;              // CV-mode Fock cutoff
  int m_A = 6;                   // number of Alice measurement phases
  double phase_noise_sigma = 3.0 * kPi / 180.0;  // Alice LO jitter (radians)
  long samples_per_phase = 120000;
  std::uint64_t seed = 20260810;
  ModelTier tier = ModelTier::SqueezedApprox;
  double tail_tol = 1e-6;        // truncation-tail tolerance for constructors
  int n_bob_phases = 6;          // Bob tomography phases k*pi/6
  // Metropolis-Hastings defaults (cmd analyze).
  int mh_retained = 10000;
  int mh_burn_in = 20000;
  int mh_thin = 5;
  double mh_step = 0.02;
  long mh_s_evaluations = 100000;
  // SDP controls.
  double sdp_gap_tol = 1e-8;
  int sdp_max_iter = 200;

  void validate() const;

  /// Alice phase grid theta_n = n*pi/m_A, n in [0, m_A).
  std::vector<double> alice_phases() const;
  /// Bob tomography phase grid k*pi/n_bob_phases, k in [0, n_bob_phases).
  std::vector<double> bob_phases() const;
};

/// CV basis pair {plus, minus} of the configured tier, built at n_max_B.
struct CvBasis {
  StateVector plus;
  StateVector minus;
};
CvBasis cv_basis(const ExperimentConfig& cfg);

/// The pure two-mode state before losses, as a state vector (mode 0 = DV).
StateVector build_hybrid_vector(const ExperimentConfig& cfg);

/// Same state as a density matrix (spec'd entry point).
DensityMatrix build_hybrid_state(const ExperimentConfig& cfg);

/// Transmission losses: eta_A on the DV mode, eta_B_channel on the CV mode.
/// Bob's detection efficiency is deliberately not applied here; tomography
/// corrects for it and assemblage ground truth lives before detection.
DensityMatrix apply_losses(const DensityMatrix& rho, const ExperimentConfig& cfg);

/// Contraction of the DV mode with <q_theta| followed by renormalization.
/// For the hybrid state this prepares
///   sqrt(R)|minus> - sqrt(2) q e^{-i theta} sqrt(1-R)|plus>  (up to norm).
StateVector project_quadrature(const StateVector& psi, double q, double theta);

}  // namespace hst
