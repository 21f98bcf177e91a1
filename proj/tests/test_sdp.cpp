#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "hybridsteer/sdp.hpp"
#include "test_support.hpp"

using namespace hst;

namespace {

Assemblage random_product_assemblage(int m, int d, SplitMix64& rng) {
  DensityMatrix rho_b = test::random_density(d, rng);
  Assemblage a;
  for (int t = 0; t < m; ++t) a.phases.push_back(t * kPi / m);
  a.members.resize(m);
  for (int t = 0; t < m; ++t) {
    double p = 0.2 + 0.6 * rng.uniform();
    a.members[t][0] = p * rho_b.mat;
    a.members[t][1] = (1.0 - p) * rho_b.mat;
  }
  return a;
}

Assemblage ideal_lossless(int m, double R = 0.5) {
  ExperimentConfig cfg;
  cfg.R = R;
  cfg.m_A = m;
  cfg.tier = ModelTier::IdealCat;
  cfg.eta_A = cfg.eta_B_channel = 1.0;
  cfg.phase_noise_sigma = 0.0;
  cfg.n_max_A = 1;
  return model_assemblage(cfg);
}

Assemblage paper_settings_assemblage() {
  ExperimentConfig cfg;
  cfg.R = 0.36;
  return model_assemblage(cfg);
}

double lhs_bound_by_enumeration(const SteeringFunctional& f,
                                const std::vector<Eigen::MatrixXcd>& sigma_lambda) {
  // sum_j Tr[F_j sigma_j] for the decomposition's assemblage equals
  // sum_lambda Tr[(sum_t F_{lambda_t|t}) sigma_lambda].
  double s = 0.0;
  int m = f.n_phases();
  for (int lam = 0; lam < (1 << m); ++lam) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(f.dim(), f.dim());
    for (int t = 0; t < m; ++t)
      G += f.ops[t][DeterministicStrategyTable::sign(lam, t) > 0 ? 0 : 1];
    s += (G * sigma_lambda[lam].topLeftCorner(f.dim(), f.dim())).trace().real();
  }
  return s;
}

}  // namespace

TEST_CASE("strategy enumeration") {
  CHECK(enumerate_strategies(1).n_strategies() == 2);
  CHECK(enumerate_strategies(2).n_strategies() == 4);
  CHECK(enumerate_strategies(6).n_strategies() == 64);
  CHECK_THROWS_AS(enumerate_strategies(17), Error);
  CHECK_THROWS_AS(enumerate_strategies(0), Error);
  // Row-stochastic: exactly one outcome selected per setting, all patterns distinct.
  auto table = enumerate_strategies(3);
  std::set<std::array<int, 3>> seen;
  for (int lam = 0; lam < table.n_strategies(); ++lam) {
    std::array<int, 3> row{};
    for (int t = 0; t < 3; ++t) {
      CHECK(table.entry(lam, t, +1) + table.entry(lam, t, -1) == 1);
      row[t] = table.sign(lam, t);
    }
    seen.insert(row);
  }
  CHECK(int(seen.size()) == table.n_strategies());
}

TEST_CASE("product assemblages are unsteerable and members of the LHS set") {
  SplitMix64 rng(101);
  Assemblage a = random_product_assemblage(3, 4, rng);
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);
  CHECK(std::abs(f.objective) <= 1e-7);

  SdpResult mem = lhs_membership(a);
  REQUIRE(mem.status == SdpStatus::Optimal);
  CHECK(mem.lhs_member);
  CHECK(mem.objective >= -1e-8);
  REQUIRE(int(mem.lhs_decomposition.size()) == 8);
  // The decomposition reproduces every member through the strategy sums.
  for (int t = 0; t < 3; ++t)
    for (int s : {+1, -1}) {
      Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(mem.dim, mem.dim);
      for (int lam = 0; lam < 8; ++lam)
        if (DeterministicStrategyTable::entry(lam, t, s))
          sum += mem.lhs_decomposition[lam];
      CHECK(test::max_abs(sum - a.member(t, s).topLeftCorner(mem.dim, mem.dim)) < 1e-6);
    }
  // And every sigma_lambda is PSD (up to the declared tolerance).
  for (const auto& sl : mem.lhs_decomposition) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sl, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-7);
  }
}

TEST_CASE("ideal lossless assemblage is steerable at m=6") {
  Assemblage a = ideal_lossless(6);
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);
  CHECK(f.objective < -1e-3);

  SdpResult mem = lhs_membership(a);
  REQUIRE(mem.status == SdpStatus::Optimal);
  CHECK_FALSE(mem.lhs_member);
  CHECK(mem.objective < -1e-8);
}

TEST_CASE("dephasing the CV mode restores an LHS model") {
  Assemblage a = ideal_lossless(4);
  for (auto& pair : a.members)
    for (auto& m : pair) m = m.diagonal().asDiagonal();
  SdpResult mem = lhs_membership(a);
  REQUIRE(mem.status == SdpStatus::Optimal);
  CHECK(mem.lhs_member);
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);
  CHECK(std::abs(f.objective) <= 1e-7);
}

TEST_CASE("functional evaluation matches the SDP objective") {
  Assemblage a = ideal_lossless(3, 0.4);
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);
  REQUIRE(f.functional.has_value());
  CHECK(evaluate_functional(*f.functional, a) == doctest::Approx(f.objective).epsilon(1e-7));

  SteeringFunctional zero = *f.functional;
  for (auto& pair : zero.ops)
    for (auto& op : pair) op.setZero();
  CHECK(evaluate_functional(zero, a) == 0.0);

  SteeringFunctional wrong = *f.functional;
  wrong.phases[0] += 0.1;
  CHECK_THROWS_AS(evaluate_functional(wrong, a), Error);
}

TEST_CASE("optimal certificates stay nonnegative on separable assemblages") {
  Assemblage steered = ideal_lossless(3);
  SdpResult f = optimal_functional(steered);
  REQUIRE(f.status == SdpStatus::Optimal);
  CHECK(f.objective < -1e-4);
  SplitMix64 rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    Assemblage prod = random_product_assemblage(3, f.dim, rng);
    CHECK(evaluate_functional(*f.functional, prod) >= -1e-7);
  }
}

TEST_CASE("weak duality ties functionals to decompositions") {
  // For any feasible F and any LHS decomposition, the pairing through the
  // strategy table is nonnegative and equals the direct member sum.
  Assemblage a = ideal_lossless(3, 0.45);
  for (auto& pair : a.members)
    for (auto& m : pair) m = m.diagonal().asDiagonal();  // make it LHS
  SdpResult mem = lhs_membership(a);
  REQUIRE(mem.lhs_member);
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);

  double via_lambda = lhs_bound_by_enumeration(*f.functional, mem.lhs_decomposition);
  double direct = evaluate_functional(*f.functional, a);
  CHECK(via_lambda == doctest::Approx(direct).epsilon(1e-5));
  CHECK(via_lambda >= -1e-6);
}

TEST_CASE("weak duality holds on randomized solver outputs") {
  SplitMix64 rng(303);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + int(rng.next() % 2);
    int d = 3;
    Assemblage a = random_product_assemblage(m, d, rng);
    // Perturb while preserving non-signaling: shift one sign pair by a
    // small Hermitian piece.
    DensityMatrix delta = test::random_density(d, rng);
    Eigen::MatrixXcd pert =
        0.02 * (delta.mat - Eigen::MatrixXcd::Identity(d, d) * (1.0 / d));
    int t = int(rng.next() % m);
    a.members[t][0] += pert;
    a.members[t][1] -= pert;

    SdpResult f = optimal_functional(a);
    SdpResult mem = lhs_membership(a);
    REQUIRE(f.status == SdpStatus::Optimal);
    REQUIRE(mem.status == SdpStatus::Optimal);
    CHECK(functional_constraint_violation(*f.functional) <= 1e-7);
    if (mem.lhs_member) {
      double via_lambda = lhs_bound_by_enumeration(*f.functional, mem.lhs_decomposition);
      CHECK(via_lambda >= -1e-6);
      ++checked;
    }
    // Membership value and functional sign must agree.
    if (mem.objective < -1e-6) CHECK(f.objective < 1e-7);
  }
  CHECK(checked > 10);
}

TEST_CASE("scale covariance of the optimum") {
  Assemblage a = ideal_lossless(3);
  SdpResult f1 = optimal_functional(a);
  Assemblage doubled = a;
  for (auto& pair : doubled.members)
    for (auto& m : pair) m *= 2.0;
  SdpResult f2 = optimal_functional(doubled);
  REQUIRE(f1.status == SdpStatus::Optimal);
  REQUIRE(f2.status == SdpStatus::Optimal);
  CHECK(f2.objective == doctest::Approx(2.0 * f1.objective).epsilon(1e-6));
}

TEST_CASE("rotational covariance of the optimum") {
  Assemblage a = ideal_lossless(3);
  SdpResult f1 = optimal_functional(a);
  SplitMix64 rng(404);
  Eigen::MatrixXcd u = test::random_unitary(a.dim(), rng);
  Assemblage rotated = a;
  for (auto& pair : rotated.members)
    for (auto& m : pair) m = u * m * u.adjoint();
  SdpResult f2 = optimal_functional(rotated);
  REQUIRE(f2.status == SdpStatus::Optimal);
  CHECK(f2.objective == doctest::Approx(f1.objective).epsilon(1e-6));
}

TEST_CASE("dropping measurements cannot strengthen the violation") {
  Assemblage full = ideal_lossless(4);
  Assemblage subset;
  subset.phases = {full.phases[0], full.phases[2]};
  subset.members = {full.members[0], full.members[2]};
  SdpResult f_full = optimal_functional(full);
  SdpResult f_sub = optimal_functional(subset);
  REQUIRE(f_full.status == SdpStatus::Optimal);
  REQUIRE(f_sub.status == SdpStatus::Optimal);
  CHECK(f_sub.objective >= f_full.objective - 1e-7);
}

TEST_CASE("paper-settings assemblage is steerable and dimension-reduced") {
  Assemblage a = paper_settings_assemblage();
  SdpResult f = optimal_functional(a);
  REQUIRE(f.status == SdpStatus::Optimal);
  CHECK(f.objective < -1e-7);
  CHECK(f.dim >= 8);
  CHECK(f.dim <= a.dim());
  CHECK(f.duality_gap <= 1e-7);
}

TEST_CASE("signaling inputs are projected before membership") {
  SplitMix64 rng(505);
  Assemblage a = random_product_assemblage(2, 3, rng);
  a.members[1][0] *= 1.01;  // inject signaling
  double dev = a.signaling_deviation();
  CHECK(dev > 1e-5);
  SdpResult mem = lhs_membership(a);
  REQUIRE(mem.status == SdpStatus::Optimal);
  CHECK(mem.signaling_correction == doctest::Approx(dev).epsilon(1e-9));
  CHECK(mem.lhs_member);
}

TEST_CASE("golden-section ratio search brackets the optimum") {
  ExperimentConfig cfg;
  cfg.m_A = 3;
  SdpOptions opt;
  auto [r_best, s_best] = optimize_ratio(cfg, opt, 0.1, 0.9, 5e-3);
  CHECK(r_best > 0.15);
  CHECK(r_best < 0.75);
  CHECK(s_best < 0.0);
  // The optimum beats nearby ratios.
  for (double r : {r_best - 0.1, r_best + 0.1}) {
    ExperimentConfig c2 = cfg;
    c2.R = r;
    CHECK(optimal_functional(model_assemblage(c2)).objective >= s_best - 1e-6);
  }
}
