#include "hybridsteer/model.hpp"

#include <cmath>

#include "hybridsteer/homodyne.hpp"

namespace hst {

std::string to_string(ModelTier t) {
  return t == ModelTier::IdealCat ? "ideal-cat" : "squeezed-approx";
}

ModelTier model_tier_from_string(const std::string& s) {
  if (s == "ideal-cat") return ModelTier::IdealCat;
  if (s == "squeezed-approx") return ModelTier::SqueezedApprox;
  fail(Errc::config_invalid, "model_tier: expected 'ideal-cat' or 'squeezed-approx', got '" + s + "'");
}

void ExperimentConfig::validate() const {
  auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
  require(in01(eta_A), Errc::config_invalid, "config: eta_A must be in [0,1]");
  require(in01(eta_B_channel), Errc::config_invalid, "config: eta_B_channel must be in [0,1]");
  require(eta_B_det > 0.0 && eta_B_det <= 1.0, Errc::config_invalid,
          "config: eta_B_det must be in (0,1]");
  require(in01(R), Errc::config_invalid, "config: R must be in [0,1]");
  require(m_A >= 1, Errc::config_invalid, "config: m_A >= 1");
  require(samples_per_phase >= 1, Errc::config_invalid, "config: samples_per_phase >= 1");
  require(n_max_A >= 1 && n_max_B >= 1, Errc::config_invalid, "config: cutoffs >= 1");
  require(phase_noise_sigma >= 0.0, Errc::config_invalid, "config: phase noise >= 0");
  require(squeezing_db >= 0.0 && squeezing_db <= 10.0, Errc::config_invalid,
          "config: squeezing_db in [0,10]");
  require(tail_tol > 0.0, Errc::config_invalid, "config: tail_tol > 0");
  require(n_bob_phases >= 1, Errc::config_invalid, "config: n_bob_phases >= 1");
  require(mh_retained >= 1 && mh_burn_in >= 0 && mh_thin >= 1 && mh_step > 0.0,
          Errc::config_invalid, "config: bad MH chain parameters");
  require(sdp_gap_tol > 0.0 && sdp_max_iter >= 1, Errc::config_invalid,
          "config: bad SDP controls");
}

std::vector<double> ExperimentConfig::alice_phases() const {
  std::vector<double> out(m_A);
  for (int n = 0; n < m_A; ++n) out[n] = n * kPi / m_A;
  return out;
}

std::vector<double> ExperimentConfig::bob_phases() const {
  std::vector<double> out(n_bob_phases);
  for (int k = 0; k < n_bob_phases; ++k) out[k] = k * kPi / n_bob_phases;
  return out;
}

CvBasis cv_basis(const ExperimentConfig& cfg) {
  if (cfg.tier == ModelTier::IdealCat) {
    return CvBasis{cat_state(cfg.alpha, +1, cfg.n_max_B, cfg.tail_tol),
                   cat_state(cfg.alpha, -1, cfg.n_max_B, cfg.tail_tol)};
  }
  StateVector sq = squeezed_vacuum(cfg.squeezing_db, cfg.n_max_B, cfg.tail_tol);
  StateVector sub = photon_subtract(sq);
  return CvBasis{std::move(sq), std::move(sub)};
}

StateVector build_hybrid_vector(const ExperimentConfig& cfg) {
  cfg.validate();
  CvBasis basis = cv_basis(cfg);
  StateVector zero = fock_basis_state(0, cfg.n_max_A);
  StateVector one = fock_basis_state(1, cfg.n_max_A);
  StateVector t0 = tensor(zero, basis.minus);
  StateVector t1 = tensor(one, basis.plus);
  StateVector psi;
  psi.amps = std::sqrt(cfg.R) * t0.amps - std::sqrt(1.0 - cfg.R) * t1.amps;
  psi.mode_dims = t0.mode_dims;
  psi.truncation_tail = std::max(basis.plus.truncation_tail, basis.minus.truncation_tail);
  // The two CV basis states have opposite parity, so the superposition is
  // already normalized; renormalize anyway to absorb rounding.
  psi.amps /= psi.amps.norm();
  return psi;
}

DensityMatrix build_hybrid_state(const ExperimentConfig& cfg) {
  return DensityMatrix::pure(build_hybrid_vector(cfg));
}

DensityMatrix apply_losses(const DensityMatrix& rho, const ExperimentConfig& cfg) {
  DensityMatrix out = loss_channel(rho, cfg.eta_A, 0);
  return loss_channel(out, cfg.eta_B_channel, 1);
}

StateVector project_quadrature(const StateVector& psi, double q, double theta) {
  require(psi.n_modes() == 2, Errc::dimension_mismatch, "project_quadrature: two-mode input");
  int da = psi.mode_dims[0], db = psi.mode_dims[1];
  // <q_theta| on mode 0 with |q_theta> = e^{i theta n} |q>:
  // <q_theta|n> = e^{-i theta n} psi_n(q).
  Eigen::VectorXd wf = quadrature_wavefunctions(da - 1, q);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(db);
  for (int n = 0; n < da; ++n)
    out += wf(n) * std::polar(1.0, -theta * n) * psi.amps.segment(n * db, db);
  double norm = out.norm();
  require(norm > 1e-14, Errc::zero_result, "project_quadrature: projection has zero norm");
  StateVector cv;
  cv.amps = out / norm;
  cv.mode_dims = {db};
  cv.truncation_tail = psi.truncation_tail;
  return cv;
}

}  // namespace hst
