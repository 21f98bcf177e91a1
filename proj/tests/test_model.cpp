#include <doctest.h>

#include <cmath>

#include "hybridsteer/homodyne.hpp"
#include "hybridsteer/model.hpp"
#include "test_support.hpp"

using namespace hst;

namespace {
ExperimentConfig paper_config(ModelTier tier = ModelTier::SqueezedApprox) {
  ExperimentConfig cfg;
  cfg.R = 0.36;
  cfg.tier = tier;
  return cfg;
}
}  // namespace

TEST_CASE("config validation flags bad fields") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eta_A = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ExperimentConfig{};
  cfg.m_A = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = ExperimentConfig{};
  cfg.R = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("hybrid state structure in both tiers") {
  for (ModelTier tier : {ModelTier::IdealCat, ModelTier::SqueezedApprox}) {
    ExperimentConfig cfg = paper_config(tier);
    StateVector psi = build_hybrid_vector(cfg);
    CHECK(psi.mode_dims == std::vector<int>{cfg.n_max_A + 1, cfg.n_max_B + 1});
    CHECK(psi.amps.norm() == doctest::Approx(1.0).epsilon(1e-12));
    // Schmidt rank 2 across the DV|CV cut.
    Eigen::VectorXd sv = schmidt_coefficients(psi);
    CHECK(sv(0) == doctest::Approx(std::sqrt(1 - cfg.R)).epsilon(1e-10));
    CHECK(sv(1) == doctest::Approx(std::sqrt(cfg.R)).epsilon(1e-10));
    if (sv.size() > 2) CHECK(sv(2) < 1e-10);
  }
}

TEST_CASE("R=1 gives an unentangled herald") {
  ExperimentConfig cfg = paper_config(ModelTier::IdealCat);
  cfg.R = 1.0;
  DensityMatrix rho = build_hybrid_state(cfg);
  CHECK(negativity(rho) < 1e-10);
  DensityMatrix alice = partial_trace(rho, 0);
  CHECK(alice.mat(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ideal-cat tier negativity at R=1/2 without losses") {
  ExperimentConfig cfg = paper_config(ModelTier::IdealCat);
  cfg.R = 0.5;
  CHECK(negativity(build_hybrid_state(cfg)) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("tier states agree closely at R=0.36") {
  // Honest derived values: the two-mode overlap at alpha=1, 3 dB is
  // R<minus overlap> + (1-R)<plus overlap> = 0.36*0.9977 + 0.64*0.9231 = 0.950,
  // i.e. squared fidelity 0.9025.
  DensityMatrix ideal = build_hybrid_state(paper_config(ModelTier::IdealCat));
  DensityMatrix sq = build_hybrid_state(paper_config(ModelTier::SqueezedApprox));
  double f = fidelity(ideal, sq);
  CHECK(f == doctest::Approx(0.9025).epsilon(5e-3));
  CHECK(f > 0.90);
}

TEST_CASE("losses act per mode and commute") {
  ExperimentConfig cfg = paper_config();
  DensityMatrix rho = build_hybrid_state(cfg);
  ExperimentConfig no_loss = cfg;
  no_loss.eta_A = no_loss.eta_B_channel = 1.0;
  CHECK(test::max_abs(apply_losses(rho, no_loss).mat - rho.mat) == 0.0);

  DensityMatrix ab = loss_channel(loss_channel(rho, cfg.eta_A, 0), cfg.eta_B_channel, 1);
  DensityMatrix ba = loss_channel(loss_channel(rho, cfg.eta_B_channel, 1), cfg.eta_A, 0);
  CHECK(test::max_abs(ab.mat - ba.mat) < 1e-12);
  CHECK(test::max_abs(apply_losses(rho, cfg).mat - ab.mat) < 1e-14);
}

TEST_CASE("alice vacuum weight grows by (1-eta)(1-R) under loss") {
  ExperimentConfig cfg = paper_config(ModelTier::IdealCat);
  DensityMatrix rho = build_hybrid_state(cfg);
  double before = partial_trace(rho, 0).mat(0, 0).real();
  ExperimentConfig only_a = cfg;
  only_a.eta_B_channel = 1.0;
  double after = partial_trace(apply_losses(rho, only_a), 0).mat(0, 0).real();
  CHECK(after - before == doctest::Approx(0.25 * (1 - cfg.R)).epsilon(1e-10));
}

TEST_CASE("negativity strictly decreases under the loss budget") {
  for (ModelTier tier : {ModelTier::IdealCat, ModelTier::SqueezedApprox}) {
    ExperimentConfig cfg = paper_config(tier);
    DensityMatrix rho = build_hybrid_state(cfg);
    double lossless = negativity(rho);
    double lossy = negativity(apply_losses(rho, cfg));
    CHECK(lossy < lossless - 0.01);
    CHECK(lossy > 0.0);
  }
}

TEST_CASE("alice multiphoton weight stays within the model budget") {
  ExperimentConfig cfg = paper_config();
  DensityMatrix alice = partial_trace(apply_losses(build_hybrid_state(cfg), cfg), 0);
  double w = 0.0;
  for (int n = 2; n < alice.dim(); ++n) w += alice.mat(n, n).real();
  CHECK(w <= 0.02);
}

TEST_CASE("quadrature projection at q=0 prepares the odd basis state") {
  ExperimentConfig cfg = paper_config(ModelTier::IdealCat);
  StateVector psi = build_hybrid_vector(cfg);
  StateVector proj = project_quadrature(psi, 0.0, 0.9);
  StateVector minus = cat_state(cfg.alpha, -1, cfg.n_max_B);
  CHECK(state_fidelity(proj, minus) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadrature projection matches the two-term closed form") {
  // For the hybrid state, <q_theta| on the DV mode prepares
  // sqrt(R)|minus> - sqrt(2) q e^{-i theta} sqrt(1-R)|plus> up to norm
  // (psi_1/psi_0 = sqrt(2) q in the variance-1/2 convention).
  ExperimentConfig cfg = paper_config(ModelTier::IdealCat);
  StateVector psi = build_hybrid_vector(cfg);
  SplitMix64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    double q = -2.0 + 4.0 * rng.uniform();
    double theta = 2 * kPi * rng.uniform();
    StateVector proj = project_quadrature(psi, q, theta);
    StateVector plus = cat_state(cfg.alpha, +1, cfg.n_max_B);
    StateVector minus = cat_state(cfg.alpha, -1, cfg.n_max_B);
    Eigen::VectorXcd ref = std::sqrt(cfg.R) * minus.amps -
                           std::sqrt(2.0) * q * std::polar(1.0, -theta) *
                               std::sqrt(1 - cfg.R) * plus.amps;
    ref /= ref.norm();
    CHECK(std::norm((ref.adjoint() * proj.amps).value()) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("projection symmetry: theta + pi flips the sign of q") {
  ExperimentConfig cfg = paper_config();
  StateVector psi = build_hybrid_vector(cfg);
  StateVector a = project_quadrature(psi, 0.8, 0.4 + kPi);
  StateVector b = project_quadrature(psi, -0.8, 0.4);
  CHECK(state_fidelity(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("projection rejects zero-norm results") {
  // |1>|0> projected at q = 0: psi_1(0) = 0 annihilates the only term.
  StateVector psi = tensor(fock_basis_state(1, 1), fock_basis_state(0, 4));
  CHECK_THROWS_AS(project_quadrature(psi, 0.0, 0.0), Error);
}
