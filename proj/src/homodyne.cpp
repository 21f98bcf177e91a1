#include "hybridsteer/homodyne.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>

namespace hst {

double quadrature_wavefunction(int n, double q) {
  require(n >= 0, Errc::invalid_argument, "quadrature_wavefunction: n >= 0");
  return quadrature_wavefunctions(n, q)(n);
}

Eigen::VectorXd quadrature_wavefunctions(int n_max, double q) {
  Eigen::VectorXd psi(n_max + 1);
  psi(0) = std::pow(kPi, -0.25) * std::exp(-q * q / 2.0);
  if (n_max >= 1) psi(1) = std::sqrt(2.0) * q * psi(0);
  for (int n = 2; n <= n_max; ++n)
    psi(n) = std::sqrt(2.0 / n) * q * psi(n - 1) - std::sqrt(double(n - 1) / n) * psi(n - 2);
  return psi;
}

namespace {

// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix.
void gauss_from_jacobi(const Eigen::VectorXd& offdiag, double weight_total,
                       Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  int n = offdiag.size() + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = offdiag(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double v0 = es.eigenvectors()(0, k);
    weights(k) = weight_total * v0 * v0;
  }
}

struct GaussRule {
  Eigen::VectorXd x, w;
};

const GaussRule& legendre_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  GaussRule r;
  gauss_from_jacobi(off, 2.0, r.x, r.w);
  return cache.emplace(n, std::move(r)).first->second;
}

const GaussRule& hermite_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd off(n - 1);
  for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k / 2.0);
  GaussRule r;
  gauss_from_jacobi(off, std::sqrt(kPi), r.x, r.w);
  return cache.emplace(n, std::move(r)).first->second;
}

double gl_panel(const std::function<double(double)>& f, double a, double b, int n) {
  const GaussRule& r = legendre_rule(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < r.x.size(); ++i) s += r.w(i) * f(mid + half * r.x(i));
  return half * s;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b, double tol,
                     double coarse, int depth) {
  double mid = 0.5 * (a + b);
  double left = gl_panel(f, a, mid, 24);
  double right = gl_panel(f, mid, b, 24);
  if (depth >= 24 || std::abs(left + right - coarse) <= tol) return left + right;
  return integrate_rec(f, a, mid, tol / 2, left, depth + 1) +
         integrate_rec(f, mid, b, tol / 2, right, depth + 1);
}

}  // namespace

void gauss_legendre(int n, double a, double b, Eigen::VectorXd& nodes,
                    Eigen::VectorXd& weights) {
  const GaussRule& r = legendre_rule(n);
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  nodes = (half * r.x).array() + mid;
  weights = half * r.w;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  return integrate_rec(f, a, b, tol, gl_panel(f, a, b, 24), 0);
}

const Eigen::MatrixXd& halfline_overlaps(int n_max) {
  static std::map<int, Eigen::MatrixXd> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n_max);
  if (it != cache.end()) return it->second;

  double q_hi = std::sqrt(2.0 * n_max + 1.0) + 8.0;
  Eigen::MatrixXd I(n_max + 1, n_max + 1);
  for (int m = 0; m <= n_max; ++m) {
    for (int n = m; n <= n_max; ++n) {
      if (m == n) {
        I(m, n) = 0.5;  // psi_n^2 is even and integrates to 1
      } else if ((m + n) % 2 == 0) {
        I(m, n) = I(n, m) = 0.0;  // even integrand, orthogonal over the full line
      } else {
        auto f = [&](double q) {
          Eigen::VectorXd psi = quadrature_wavefunctions(n, q);
          return psi(m) * psi(n);
        };
        I(m, n) = I(n, m) = integrate_adaptive(f, 0.0, q_hi, 1e-13);
      }
    }
  }
  return cache.emplace(n_max, std::move(I)).first->second;
}

BinnedPovmElement halfline_povm(double theta, int sign, int n_max) {
  require(sign == 1 || sign == -1, Errc::invalid_argument, "halfline_povm: sign must be +-1");
  require(n_max >= 0, Errc::invalid_argument, "halfline_povm: n_max >= 0");
  const Eigen::MatrixXd& I = halfline_overlaps(n_max);
  int d = n_max + 1;
  Eigen::MatrixXcd M(d, d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n) M(m, n) = std::polar(1.0, theta * (m - n)) * I(m, n);
  if (sign == -1) M = Eigen::MatrixXcd::Identity(d, d) - M;
  return BinnedPovmElement{std::move(M), theta, sign, 0.0};
}

BinnedPovmElement smear_phase(const std::function<BinnedPovmElement(double)>& family,
                              double theta, double sigma) {
  require(sigma >= 0.0, Errc::invalid_argument, "smear_phase: sigma >= 0");
  if (sigma == 0.0) return family(theta);
  // 21 nodes resolve any realistic jitter; wide smears need more to damp
  // the oscillatory single-quantum coherence accurately.
  int nodes = std::min(161, 21 + 2 * int(4.0 * sigma));
  const GaussRule& r = hermite_rule(nodes);
  double wsum = r.w.sum();
  BinnedPovmElement first = family(theta + std::sqrt(2.0) * sigma * r.x(0));
  Eigen::MatrixXcd acc = (r.w(0) / wsum) * first.op;
  for (int i = 1; i < r.x.size(); ++i)
    acc += (r.w(i) / wsum) * family(theta + std::sqrt(2.0) * sigma * r.x(i)).op;
  return BinnedPovmElement{std::move(acc), theta, first.sign, sigma};
}

BinnedPovmElement halfline_povm_smeared(double theta, int sign, int n_max, double sigma) {
  if (sigma == 0.0) return halfline_povm(theta, sign, n_max);
  auto out = smear_phase([=](double th) { return halfline_povm(th, sign, n_max); }, theta, sigma);
  return out;
}

Eigen::ArrayXd quadrature_pdf(const DensityMatrix& rho, double theta, const Eigen::ArrayXd& q) {
  require(rho.n_modes() == 1, Errc::invalid_argument, "quadrature_pdf: single-mode state");
  require(std::abs(rho.trace() - 1.0) < 1e-6, Errc::invalid_argument,
          "quadrature_pdf: state must be normalized");
  // sum_mn rho_mn e^{i theta (n-m)} psi_m psi_n  ==  psi^T (D(-theta) rho D(-theta)^dag) psi
  DensityMatrix rot = phase_rotate(rho, -theta, 0);
  int d = rho.dim();
  Eigen::ArrayXd out(q.size());
  for (int i = 0; i < q.size(); ++i) {
    Eigen::VectorXd psi = quadrature_wavefunctions(d - 1, q(i));
    out(i) = (psi.cast<cxd>().adjoint() * rot.mat * psi.cast<cxd>()).value().real();
  }
  return out;
}

std::vector<double> sample_quadrature(const DensityMatrix& rho, double theta,
                                      std::uint64_t seed, int n) {
  require(n >= 0, Errc::invalid_argument, "sample_quadrature: n >= 0");
  const double q_lo = -8.0, q_hi = 8.0;
  const int npts = 1601;  // step 0.01
  Eigen::ArrayXd q = Eigen::ArrayXd::LinSpaced(npts, q_lo, q_hi);
  Eigen::ArrayXd pdf = quadrature_pdf(rho, theta, q).max(0.0);
  // Trapezoid CDF on the grid.
  Eigen::ArrayXd cdf(npts);
  cdf(0) = 0.0;
  double h = (q_hi - q_lo) / (npts - 1);
  for (int i = 1; i < npts; ++i) cdf(i) = cdf(i - 1) + 0.5 * h * (pdf(i - 1) + pdf(i));
  double total = cdf(npts - 1);
  require(total > 0.0, Errc::numerical_failure, "sample_quadrature: vanishing density");

  SplitMix64 rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    double u = rng.uniform() * total;
    // Binary search for the bracketing grid cell, then linear interpolation.
    int lo = 0, hi = npts - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (cdf(mid) <= u)
        lo = mid;
      else
        hi = mid;
    }
    double span = cdf(hi) - cdf(lo);
    double frac = span > 0.0 ? (u - cdf(lo)) / span : 0.5;
    out.push_back(q(lo) + frac * h);
  }
  return out;
}

std::vector<Eigen::MatrixXd> bin_overlap_tables(int n_max, const Eigen::VectorXd& edges) {
  require(edges.size() >= 2, Errc::invalid_argument, "bin_overlap_tables: need >= 2 edges");
  int d = n_max + 1;
  int n_bins = int(edges.size()) - 1;
  double q_big = std::sqrt(2.0 * n_max + 1.0) + 8.0;

  std::vector<Eigen::MatrixXd> tables(n_bins, Eigen::MatrixXd::Zero(d, d));
  auto accumulate = [&](Eigen::MatrixXd& B, double a, double b) {
    if (b <= a) return;
    Eigen::VectorXd x, w;
    int pts = std::max(8, int(std::ceil((b - a) * 8)) + 8);
    gauss_legendre(std::min(pts, 48), a, b, x, w);
    for (int i = 0; i < x.size(); ++i) {
      Eigen::VectorXd psi = quadrature_wavefunctions(n_max, x(i));
      B.selfadjointView<Eigen::Lower>().rankUpdate(psi, w(i));
    }
  };
  for (int b = 0; b < n_bins; ++b) {
    double lo = (b == 0) ? -q_big : edges(b);
    double hi = (b == n_bins - 1) ? q_big : edges(b + 1);
    // Split long intervals into unit panels for accuracy.
    double a = lo;
    while (a < hi) {
      double c = std::min(a + 1.0, hi);
      accumulate(tables[b], a, c);
      a = c;
    }
    Eigen::MatrixXd sym = tables[b].selfadjointView<Eigen::Lower>();
    tables[b] = sym;
  }
  // Force exact completeness: fold the residual of sum_b B_b - I into the edge bins
  // (pure tail mass beyond q_big, below double precision for sane cutoffs).
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, d);
  for (const auto& B : tables) total += B;
  Eigen::MatrixXd resid = Eigen::MatrixXd::Identity(d, d) - total;
  tables[0] += 0.5 * resid;
  tables[n_bins - 1] += 0.5 * resid;
  return tables;
}

}  // namespace hst
