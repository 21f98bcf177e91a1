#include <doctest.h>

#include <cmath>

#include "hybridsteer/fock.hpp"
#include "test_support.hpp"

using namespace hst;

TEST_CASE("coherent state amplitudes follow the Poissonian formula") {
  StateVector vac = coherent_state(0.0, 8);
  CHECK(std::abs(vac.amps(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(vac.amps.tail(8).norm() == doctest::Approx(0.0).epsilon(1e-14));

  StateVector psi = coherent_state(1.0, 10);
  // c_0 = e^{-1/2} before renormalization; the tail here is ~1e-8.
  CHECK(psi.amps(0).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));
  for (int n = 1; n <= 10; ++n) {
    double expected = std::exp(-0.5) / std::sqrt(std::tgamma(n + 1.0));
    CHECK(psi.amps(n).real() == doctest::Approx(expected).epsilon(1e-6));
  }
  CHECK(mean_photon_number(psi) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(psi.truncation_tail == doctest::Approx(1.0048e-8).epsilon(0.01));
}

TEST_CASE("coherent state preconditions") {
  CHECK_THROWS_AS(coherent_state(2.0, 10), Error);   // |alpha|^2 > n_max/4
  CHECK_THROWS_AS(coherent_state(1.0, 0), Error);
  // Tight tolerance rejects the alpha=1, n_max=10 tail of ~1e-8.
  CHECK_THROWS_AS(coherent_state(1.0, 10, 1e-9), Error);
}

TEST_CASE("cat states have definite photon-number parity") {
  StateVector even = cat_state(1.0, +1, 10);
  StateVector odd = cat_state(1.0, -1, 10);
  for (int n = 0; n <= 10; ++n) {
    if (n % 2 == 1) CHECK(std::abs(even.amps(n)) == 0.0);  // exact zeros
    if (n % 2 == 0) CHECK(std::abs(odd.amps(n)) == 0.0);
  }
  CHECK(std::abs((odd.amps.adjoint() * even.amps).value()) < 1e-12);
  CHECK(even.amps.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(odd.amps.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cat state degenerates for vanishing odd amplitude") {
  CHECK_THROWS_AS(cat_state(1e-9, -1, 10), Error);
  CHECK_NOTHROW(cat_state(1e-9, +1, 10));  // even cat -> vacuum
}

TEST_CASE("squeezed vacuum matches the 3 dB expansion") {
  StateVector sq = squeezed_vacuum(3.0, 10);
  double r = 3.0 * std::log(10.0) / 20.0;
  CHECK(r == doctest::Approx(0.34539).epsilon(1e-4));
  for (int n = 1; n <= 9; n += 2) CHECK(std::abs(sq.amps(n)) == 0.0);
  // c_2/c_0 = tanh(r)/sqrt(2)
  CHECK((sq.amps(2) / sq.amps(0)).real() ==
        doctest::Approx(std::tanh(r) / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(squeezed_vacuum(0.0, 6).amps(0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(squeezed_vacuum(11.0, 10), Error);
  // 6 dB at cutoff 6 leaves a tail far above the default tolerance.
  CHECK_THROWS_AS(squeezed_vacuum(6.0, 6), Error);
}

TEST_CASE("cat-state / squeezed-vacuum overlaps") {
  // Computed against the independent brute-force inner products: the even
  // cat at alpha = 1 overlaps the 3 dB squeezed vacuum at 0.9231 and reaches
  // 0.98+ only for |alpha|^2 ~ 0.5; the photon-subtracted state approximates
  // the odd cat at alpha = 1 to 0.9977.
  StateVector sq = squeezed_vacuum(3.0, 10);
  StateVector even1 = cat_state(1.0, +1, 10);
  double ov = std::abs((even1.amps.adjoint() * sq.amps).value());
  CHECK(ov == doctest::Approx(0.92312).epsilon(2e-4));
  StateVector even_half = cat_state(std::sqrt(0.5), +1, 10);
  CHECK(std::abs((even_half.amps.adjoint() * sq.amps).value()) > 0.98);

  StateVector sub = photon_subtract(sq);
  StateVector odd1 = cat_state(1.0, -1, 10);
  CHECK(std::abs((odd1.amps.adjoint() * sub.amps).value()) > 0.98);
}

TEST_CASE("photon subtraction") {
  CHECK_THROWS_AS(photon_subtract(fock_basis_state(0, 5)), Error);
  StateVector one = fock_basis_state(1, 5);
  CHECK(std::abs(photon_subtract(one).amps(0)) == doctest::Approx(1.0));
  // Coherent states are annihilation eigenstates.
  StateVector coh = coherent_state(0.8, 12);
  CHECK(state_fidelity(photon_subtract(coh), coh) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("tensor products compose dimensions and traces") {
  StateVector v00 = tensor(fock_basis_state(0, 1), fock_basis_state(0, 10));
  CHECK(v00.mode_dims == std::vector<int>{2, 11});
  CHECK(std::abs(v00.amps(0)) == doctest::Approx(1.0));

  SplitMix64 rng(7);
  DensityMatrix a = test::random_density(2, rng);
  DensityMatrix b = test::random_density(3, rng);
  DensityMatrix ab = tensor(a, b);
  CHECK(ab.mode_dims == std::vector<int>{2, 3});
  CHECK(ab.trace() == doctest::Approx(a.trace() * b.trace()).epsilon(1e-12));
}

TEST_CASE("partial trace recovers marginals") {
  SplitMix64 rng(11);
  DensityMatrix a = test::random_density(3, rng);
  DensityMatrix b = test::random_density(4, rng);
  DensityMatrix ab = tensor(a, b);
  CHECK(test::max_abs(partial_trace(ab, 1).mat - b.mat) < 1e-12);
  CHECK(test::max_abs(partial_trace(ab, 0).mat - a.mat) < 1e-12);
  CHECK(partial_trace(ab, 0).trace() == doctest::Approx(ab.trace()).epsilon(1e-12));

  // Bell-like state reduces to maximally mixed on either side.
  StateVector bell;
  bell.amps = Eigen::VectorXcd::Zero(4);
  bell.amps(0) = bell.amps(3) = 1.0 / std::sqrt(2.0);
  bell.mode_dims = {2, 2};
  DensityMatrix rho = DensityMatrix::pure(bell);
  DensityMatrix red = partial_trace(rho, 0);
  CHECK(test::max_abs(red.mat - 0.5 * Eigen::MatrixXcd::Identity(2, 2)) < 1e-12);

  CHECK_THROWS_AS(partial_trace(rho, 2), Error);
}

TEST_CASE("loss channel basics") {
  DensityMatrix one = DensityMatrix::pure(fock_basis_state(1, 4));
  DensityMatrix out = loss_channel(one, 0.75, 0);
  CHECK(out.mat(1, 1).real() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(out.mat(0, 0).real() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-12));

  DensityMatrix idm = loss_channel(one, 1.0, 0);
  CHECK(test::max_abs(idm.mat - one.mat) == 0.0);

  // Coherent -> attenuated coherent.
  DensityMatrix coh = DensityMatrix::pure(coherent_state(1.0, 14));
  DensityMatrix att = loss_channel(coh, 0.6, 0);
  DensityMatrix target = DensityMatrix::pure(coherent_state(std::sqrt(0.6) * 1.0, 14));
  CHECK(fidelity(att, target) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("loss channel semigroup and channel validity on random states") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 3 + int(rng.next() % 5);
    DensityMatrix rho = test::random_density(d, rng);
    double e1 = 0.2 + 0.8 * rng.uniform(), e2 = 0.2 + 0.8 * rng.uniform();
    DensityMatrix two = loss_channel(loss_channel(rho, e1, 0), e2, 0);
    DensityMatrix once = loss_channel(rho, e1 * e2, 0);
    CHECK(test::max_abs(two.mat - once.mat) < 1e-10);
    CHECK_NOTHROW(two.check_valid(1e-12, -1e-10, 1e-9));
    CHECK(two.trace() == doctest::Approx(rho.trace()).epsilon(1e-12));
  }
}

TEST_CASE("phase rotation is unitary and periodic") {
  SplitMix64 rng(31);
  DensityMatrix rho = test::random_density(6, rng);
  CHECK(test::max_abs(phase_rotate(rho, 0.0, 0).mat - rho.mat) == 0.0);
  CHECK(test::max_abs(phase_rotate(rho, 2 * kPi, 0).mat - rho.mat) < 1e-12);
  DensityMatrix rot = phase_rotate(rho, 0.7, 0);
  CHECK(rot.trace() == doctest::Approx(rho.trace()).epsilon(1e-12));
  CHECK_NOTHROW(rot.check_valid(1e-12, -1e-10, 1e-9));
}

TEST_CASE("phase rotation moves cat lobes from x to p axis") {
  DensityMatrix cat = DensityMatrix::pure(cat_state(1.0, +1, 12));
  double x_peak = std::sqrt(2.0);
  std::vector<std::pair<double, double>> pts = {{x_peak, 0.0}, {0.0, x_peak}};
  auto before = wigner(cat, pts);
  CHECK(before[0] > 2.0 * before[1]);
  auto after = wigner(phase_rotate(cat, kPi / 2.0, 0), pts);
  CHECK(after[1] > 2.0 * after[0]);
  CHECK(after[1] == doctest::Approx(before[0]).epsilon(1e-8));
}

TEST_CASE("fidelity conventions") {
  DensityMatrix zero = DensityMatrix::pure(fock_basis_state(0, 6));
  DensityMatrix one = DensityMatrix::pure(fock_basis_state(1, 6));
  CHECK(fidelity(zero, zero) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-12));
  DensityMatrix coh = DensityMatrix::pure(coherent_state(1.0, 14));
  DensityMatrix vac = DensityMatrix::pure(fock_basis_state(0, 14));
  CHECK(fidelity(vac, coh) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));

  DensityMatrix unnormalized = zero;
  unnormalized.mat *= 0.5;
  CHECK_THROWS_AS(fidelity(unnormalized, zero), Error);
}

TEST_CASE("negativity of product, Bell and hybrid states") {
  SplitMix64 rng(41);
  DensityMatrix prod = tensor(test::random_density(2, rng), test::random_density(5, rng));
  CHECK(negativity(prod) < 1e-10);

  StateVector bell;
  bell.amps = Eigen::VectorXcd::Zero(4);
  bell.amps(0) = bell.amps(3) = 1.0 / std::sqrt(2.0);
  bell.mode_dims = {2, 2};
  CHECK(negativity(DensityMatrix::pure(bell)) == doctest::Approx(0.5).epsilon(1e-10));

  // Pure Schmidt-rank-2 state with weights sqrt(R), sqrt(1-R):
  // negativity sqrt(R(1-R)).
  StateVector c_plus = cat_state(1.0, +1, 10);
  StateVector c_minus = cat_state(1.0, -1, 10);
  double R = 0.5;
  StateVector psi;
  psi.amps = std::sqrt(R) * tensor(fock_basis_state(0, 1), c_minus).amps -
             std::sqrt(1 - R) * tensor(fock_basis_state(1, 1), c_plus).amps;
  psi.mode_dims = {2, 11};
  CHECK(negativity(DensityMatrix::pure(psi)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("negativity is invariant under local phase rotations") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    DensityMatrix rho = test::random_density(12, rng, {3, 4});
    double n0 = negativity(rho);
    double th = 2 * kPi * rng.uniform();
    CHECK(std::abs(negativity(phase_rotate(rho, th, 0)) - n0) < 1e-10);
    CHECK(std::abs(negativity(phase_rotate(rho, th, 1)) - n0) < 1e-10);
  }
}

TEST_CASE("wigner function values and normalization") {
  DensityMatrix vac = DensityMatrix::pure(fock_basis_state(0, 8));
  DensityMatrix one = DensityMatrix::pure(fock_basis_state(1, 8));
  std::vector<std::pair<double, double>> origin = {{0.0, 0.0}};
  CHECK(wigner(vac, origin)[0] == doctest::Approx(1.0 / kPi).epsilon(1e-10));
  CHECK(wigner(one, origin)[0] == doctest::Approx(-1.0 / kPi).epsilon(1e-10));

  DensityMatrix cat = DensityMatrix::pure(cat_state(1.0, +1, 12));
  WignerGrid g = wigner_grid(cat, -6, 6, 121, -6, 6, 121);
  CHECK(wigner_grid_integral(g) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(g.values.minCoeff() >= -1.0 / kPi - 1e-9);

  // Coherent-state displacement: peak at (sqrt(2) Re alpha, sqrt(2) Im alpha).
  DensityMatrix coh = DensityMatrix::pure(coherent_state(1.0, 14));
  std::vector<std::pair<double, double>> peak = {{std::sqrt(2.0), 0.0}};
  CHECK(wigner(coh, peak)[0] == doctest::Approx(1.0 / kPi).epsilon(1e-6));
}

TEST_CASE("wigner integrates to one on random states") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    DensityMatrix rho = test::random_density(6, rng);
    WignerGrid g = wigner_grid(rho, -6.5, 6.5, 131, -6.5, 6.5, 131);
    CHECK(wigner_grid_integral(g) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(g.values.minCoeff() >= -1.0 / kPi - 1e-9);
  }
}

TEST_CASE("schmidt coefficients of pure two-mode states") {
  StateVector psi;
  psi.amps = Eigen::VectorXcd::Zero(6);
  psi.mode_dims = {2, 3};
  psi.amps(0) = std::sqrt(0.36);
  psi.amps(4) = -std::sqrt(0.64);
  Eigen::VectorXd sv = schmidt_coefficients(psi);
  CHECK(sv(0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(sv(1) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("density matrix validity checks") {
  DensityMatrix bad;
  bad.mat = Eigen::MatrixXcd::Identity(3, 3);
  bad.mode_dims = {2};  // wrong dims
  CHECK_THROWS_AS(bad.check_valid(), Error);

  DensityMatrix neg;
  neg.mat = Eigen::MatrixXcd::Identity(2, 2);
  neg.mat(0, 0) = 1.2;
  neg.mat(1, 1) = -0.2;
  neg.mode_dims = {2};
  CHECK_THROWS_AS(neg.check_valid(), Error);
}
