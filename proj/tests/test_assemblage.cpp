#include <doctest.h>

#include <cmath>

#include "hybridsteer/assemblage.hpp"
#include "hybridsteer/homodyne.hpp"
#include "test_support.hpp"

using namespace hst;

namespace {

ExperimentConfig lossless_ideal(double R, int n_max_A = 1) {
  ExperimentConfig cfg;
  cfg.R = R;
  cfg.tier = ModelTier::IdealCat;
  cfg.eta_A = cfg.eta_B_channel = 1.0;
  cfg.n_max_A = n_max_A;
  cfg.phase_noise_sigma = 0.0;
  return cfg;
}

std::vector<double> grid6() { return ExperimentConfig{}.alice_phases(); }

}  // namespace

TEST_CASE("product states give outcome-independent members") {
  SplitMix64 rng(3);
  DensityMatrix rho_b = test::random_density(6, rng);
  DensityMatrix rho = tensor(test::random_density(3, rng), rho_b);
  Assemblage a = compute_assemblage(rho, grid6(), 0.0);
  a.check_valid();
  for (int t = 0; t < a.n_phases(); ++t)
    for (int s : {+1, -1}) {
      double p = a.member(t, s).trace().real();
      CHECK(test::max_abs(a.member(t, s) - p * rho_b.mat) < 1e-10);
    }
}

TEST_CASE("hybrid-state assemblage has equal sign probabilities") {
  ExperimentConfig cfg;
  cfg.R = 0.36;
  DensityMatrix rho = apply_losses(build_hybrid_state(cfg), cfg);
  Assemblage a = compute_assemblage(rho, cfg.alice_phases(), cfg.phase_noise_sigma);
  a.check_valid();
  for (int t = 0; t < a.n_phases(); ++t) {
    CHECK(a.member(t, +1).trace().real() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(a.member(t, -1).trace().real() == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK(a.signaling_deviation() < 1e-12);
}

TEST_CASE("closed-form assemblage matches the POVM engine entrywise") {
  for (double R : {0.25, 0.36, 0.5}) {
    ExperimentConfig cfg = lossless_ideal(R);
    DensityMatrix rho = build_hybrid_state(cfg);
    Assemblage engine = compute_assemblage(rho, grid6(), 0.0);
    Assemblage closed = ideal_assemblage(R, cfg.alpha, grid6(), cfg.n_max_B);
    REQUIRE(engine.dim() == closed.dim());
    for (int t = 0; t < 6; ++t)
      for (int s : {+1, -1})
        CHECK(test::max_abs(engine.member(t, s) - closed.member(t, s)) < 1e-8);
  }
}

TEST_CASE("closed form at R=0 collapses to the even basis state") {
  Assemblage a = ideal_assemblage(0.0, 1.0, grid6(), 10);
  StateVector plus = cat_state(1.0, +1, 10);
  Eigen::MatrixXcd expect = 0.5 * (plus.amps * plus.amps.adjoint());
  for (int t = 0; t < 6; ++t)
    for (int s : {+1, -1}) CHECK(test::max_abs(a.member(t, s) - expect) < 1e-12);
}

TEST_CASE("sign difference lives purely in the cat cross terms") {
  Assemblage a = ideal_assemblage(0.5, 1.0, grid6(), 10);
  StateVector plus = cat_state(1.0, +1, 10);
  StateVector minus = cat_state(1.0, -1, 10);
  for (int t = 0; t < 6; ++t) {
    Eigen::MatrixXcd diff = a.member(t, +1) - a.member(t, -1);
    CHECK(std::abs((plus.amps.adjoint() * diff * plus.amps).value()) < 1e-12);
    CHECK(std::abs((minus.amps.adjoint() * diff * minus.amps).value()) < 1e-12);
    // The cross element carries the full weight sqrt(2 R(1-R)/pi).
    cxd cross = (minus.amps.adjoint() * diff * plus.amps).value();
    CHECK(std::abs(cross) ==
          doctest::Approx(std::sqrt(2.0 * 0.25 / kPi)).epsilon(1e-10));
  }
}

TEST_CASE("assemblage is linear in the state") {
  SplitMix64 rng(13);
  DensityMatrix r1 = test::random_density(12, rng, {2, 6});
  DensityMatrix r2 = test::random_density(12, rng, {2, 6});
  double lam = 0.3;
  DensityMatrix mix;
  mix.mat = lam * r1.mat + (1 - lam) * r2.mat;
  mix.mode_dims = {2, 6};
  std::vector<double> phases = {0.0, kPi / 3, 2 * kPi / 3};
  Assemblage am = compute_assemblage(mix, phases, 0.02);
  Assemblage a1 = compute_assemblage(r1, phases, 0.02);
  Assemblage a2 = compute_assemblage(r2, phases, 0.02);
  for (int t = 0; t < 3; ++t)
    for (int s : {+1, -1})
      CHECK(test::max_abs(am.member(t, s) -
                          (lam * a1.member(t, s) + (1 - lam) * a2.member(t, s))) < 1e-12);
}

TEST_CASE("rotating the CV mode conjugates every member") {
  ExperimentConfig cfg = lossless_ideal(0.36);
  DensityMatrix rho = build_hybrid_state(cfg);
  double phi = 0.77;
  DensityMatrix rot = phase_rotate(rho, phi, 1);
  Assemblage base = compute_assemblage(rho, grid6(), 0.0);
  Assemblage rotated = compute_assemblage(rot, grid6(), 0.0);
  Eigen::VectorXcd ph(base.dim());
  for (int n = 0; n < base.dim(); ++n) ph(n) = std::polar(1.0, n * phi);
  for (int t = 0; t < 6; ++t)
    for (int s : {+1, -1}) {
      Eigen::MatrixXcd conj =
          ph.asDiagonal() * base.member(t, s) * ph.conjugate().asDiagonal();
      CHECK(test::max_abs(conj - rotated.member(t, s)) < 1e-12);
      CHECK(rotated.member(t, s).trace().real() ==
            doctest::Approx(base.member(t, s).trace().real()).epsilon(1e-12));
    }
}

TEST_CASE("phases must be distinct modulo pi") {
  ExperimentConfig cfg = lossless_ideal(0.4);
  DensityMatrix rho = build_hybrid_state(cfg);
  CHECK_THROWS_AS(compute_assemblage(rho, {0.1, 0.1 + kPi}, 0.0), Error);
  CHECK_THROWS_AS(compute_assemblage(rho, {0.2, 0.2}, 0.0), Error);
}

TEST_CASE("nonsignaling report on engine-built and tampered assemblages") {
  ExperimentConfig cfg;
  cfg.R = 0.36;
  Assemblage a = compute_assemblage(apply_losses(build_hybrid_state(cfg), cfg),
                                    cfg.alice_phases(), cfg.phase_noise_sigma);
  NonsignalingReport rep = nonsignaling_report(a);
  CHECK(rep.mean >= 1.0 - 1e-8);
  for (int i = 0; i < rep.fidelities.rows(); ++i)
    for (int j = 0; j < rep.fidelities.cols(); ++j)
      CHECK(rep.fidelities(i, j) >= 1.0 - 1e-8);

  // Injected fault: replace one member by vacuum weight.
  Assemblage bad = a;
  Eigen::MatrixXcd vac = Eigen::MatrixXcd::Zero(a.dim(), a.dim());
  vac(0, 0) = 0.5;
  bad.members[2][0] = vac;
  NonsignalingReport rep_bad = nonsignaling_report(bad);
  CHECK(rep_bad.mean < 0.999);

  Assemblage single;
  single.phases = {0.0};
  single.members.resize(1);
  single.members[0][0] = single.members[0][1] = vac;
  CHECK_THROWS_AS(nonsignaling_report(single), Error);
}
