#include "hybridsteer/fock.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace hst {

namespace {

void require_single_mode(const StateVector& psi, const char* who) {
  require(psi.n_modes() == 1, Errc::invalid_argument,
          std::string(who) + ": expected a single-mode state");
}

void require_two_modes(const DensityMatrix& rho, const char* who) {
  require(rho.n_modes() == 2, Errc::dimension_mismatch,
          std::string(who) + ": expected a two-mode state");
}

StateVector normalized_from(Eigen::VectorXcd v, std::vector<int> dims, double pre_norm2,
                            double tail_tol, const char* who) {
  double kept = v.squaredNorm();
  double tail = std::max(0.0, (pre_norm2 - kept) / pre_norm2);
  if (tail > tail_tol)
    fail(Errc::cutoff_too_small,
         std::string(who) + ": truncation tail " + std::to_string(tail) +
             " exceeds tolerance " + std::to_string(tail_tol));
  StateVector psi;
  psi.amps = v / std::sqrt(kept);
  psi.mode_dims = std::move(dims);
  psi.truncation_tail = tail;
  return psi;
}

// Hermitian square root with negative eigenvalues clipped to zero.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

void DensityMatrix::check_valid(double herm_tol, double eig_floor, double trace_slack) const {
  require(!mode_dims.empty(), Errc::invalid_argument, "density matrix: empty mode_dims");
  long prod = 1;
  for (int d : mode_dims) prod *= d;
  require(prod == mat.rows() && mat.rows() == mat.cols(), Errc::dimension_mismatch,
          "density matrix: mode_dims do not match matrix dimension");
  double herm = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  require(herm <= herm_tol, Errc::invalid_argument,
          "density matrix: not Hermitian (deviation " + std::to_string(herm) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= eig_floor, Errc::invalid_argument,
          "density matrix: negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  double tr = trace();
  require(tr > 0.0 && tr <= 1.0 + trace_slack, Errc::invalid_argument,
          "density matrix: trace " + std::to_string(tr) + " out of range");
}

StateVector fock_basis_state(int n, int n_max) {
  require(n_max >= 1 && n >= 0 && n <= n_max, Errc::invalid_argument,
          "fock_basis_state: need 0 <= n <= n_max");
  StateVector psi;
  psi.amps = Eigen::VectorXcd::Zero(n_max + 1);
  psi.amps(n) = 1.0;
  psi.mode_dims = {n_max + 1};
  return psi;
}

StateVector coherent_state(cxd alpha, int n_max, double tail_tol) {
  require(n_max >= 1, Errc::invalid_argument, "coherent_state: n_max >= 1 required");
  require(std::norm(alpha) <= n_max / 4.0, Errc::invalid_argument,
          "coherent_state: |alpha|^2 > n_max/4 (tail safety)");
  Eigen::VectorXcd v(n_max + 1);
  cxd c = std::exp(-std::norm(alpha) / 2.0);
  for (int n = 0; n <= n_max; ++n) {
    v(n) = c;
    c *= alpha / std::sqrt(double(n + 1));
  }
  return normalized_from(std::move(v), {n_max + 1}, 1.0, tail_tol, "coherent_state");
}

StateVector cat_state(cxd alpha, int parity, int n_max, double tail_tol) {
  require(parity == 1 || parity == -1, Errc::invalid_argument, "cat_state: parity must be +-1");
  require(n_max >= 1, Errc::invalid_argument, "cat_state: n_max >= 1 required");
  require(std::norm(alpha) <= n_max / 4.0, Errc::invalid_argument,
          "cat_state: |alpha|^2 > n_max/4 (tail safety)");
  if (parity == -1 && std::abs(alpha) < 1e-6)
    fail(Errc::degenerate_cat, "cat_state: odd cat degenerates as alpha -> 0");

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max + 1);
  cxd c = std::exp(-std::norm(alpha) / 2.0);
  for (int n = 0; n <= n_max; ++n) {
    bool even = (n % 2 == 0);
    if ((parity == 1) == even) v(n) = 2.0 * c;  // c_n(alpha) + parity c_n(-alpha)
    c *= alpha / std::sqrt(double(n + 1));
  }
  double pre_norm2 = 2.0 * (1.0 + parity * std::exp(-2.0 * std::norm(alpha)));
  return normalized_from(std::move(v), {n_max + 1}, pre_norm2, tail_tol, "cat_state");
}

StateVector squeezed_vacuum(double squeezing_db, int n_max, double tail_tol) {
  require(squeezing_db >= 0.0 && squeezing_db <= 10.0, Errc::invalid_argument,
          "squeezed_vacuum: squeezing must be in [0, 10] dB");
  require(n_max >= 1, Errc::invalid_argument, "squeezed_vacuum: n_max >= 1 required");
  double r = squeezing_db * std::log(10.0) / 20.0;
  double t = std::tanh(r);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max + 1);
  double c = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 0; 2 * k <= n_max; ++k) {
    v(2 * k) = c;
    c *= t * std::sqrt(double(2 * k + 1) * double(2 * k + 2)) / (2.0 * (k + 1));
  }
  return normalized_from(std::move(v), {n_max + 1}, 1.0, tail_tol, "squeezed_vacuum");
}

StateVector photon_subtract(const StateVector& psi) {
  require_single_mode(psi, "photon_subtract");
  if (mean_photon_number(psi) <= 0.0)
    fail(Errc::zero_result, "photon_subtract: input has zero mean photon number");
  int d = psi.dim();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  for (int n = 0; n + 1 < d; ++n) v(n) = std::sqrt(double(n + 1)) * psi.amps(n + 1);
  double n2 = v.squaredNorm();
  if (n2 < 1e-24) fail(Errc::zero_result, "photon_subtract: annihilated state vanishes");
  StateVector out;
  out.amps = v / std::sqrt(n2);
  out.mode_dims = psi.mode_dims;
  out.truncation_tail = psi.truncation_tail;
  return out;
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  StateVector out;
  out.amps.resize(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i)
    out.amps.segment(i * b.dim(), b.dim()) = a.amps(i) * b.amps;
  out.mode_dims = a.mode_dims;
  out.mode_dims.insert(out.mode_dims.end(), b.mode_dims.begin(), b.mode_dims.end());
  out.truncation_tail = a.truncation_tail + b.truncation_tail;
  return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  DensityMatrix out;
  int da = a.dim(), db = b.dim();
  out.mat.resize(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      out.mat.block(i * db, j * db, db, db) = a.mat(i, j) * b.mat;
  out.mode_dims = a.mode_dims;
  out.mode_dims.insert(out.mode_dims.end(), b.mode_dims.begin(), b.mode_dims.end());
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
  require_two_modes(rho, "partial_trace");
  require(keep == 0 || keep == 1, Errc::invalid_argument, "partial_trace: bad mode index");
  int da = rho.mode_dims[0], db = rho.mode_dims[1];
  DensityMatrix out;
  if (keep == 1) {
    out.mat = Eigen::MatrixXcd::Zero(db, db);
    for (int i = 0; i < da; ++i) out.mat += rho.mat.block(i * db, i * db, db, db);
    out.mode_dims = {db};
  } else {
    out.mat = Eigen::MatrixXcd::Zero(da, da);
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j)
        out.mat(i, j) = rho.mat.block(i * db, j * db, db, db).trace();
    out.mode_dims = {da};
  }
  return out;
}

namespace {

// Kraus operators of the attenuation map on a dim-dimensional mode.
std::vector<Eigen::MatrixXcd> loss_kraus(int dim, double eta) {
  // Binomial table.
  std::vector<std::vector<double>> binom(dim, std::vector<double>(dim, 0.0));
  for (int n = 0; n < dim; ++n) {
    binom[n][0] = 1.0;
    for (int k = 1; k <= n; ++k)
      binom[n][k] = binom[n - 1][k - 1] + (k < n ? binom[n - 1][k] : 0.0);
  }
  std::vector<Eigen::MatrixXcd> ks;
  ks.reserve(dim);
  for (int k = 0; k < dim; ++k) {
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      K(n - k, n) = std::sqrt(binom[n][k] * std::pow(eta, n - k) * std::pow(1.0 - eta, k));
    }
    ks.push_back(std::move(K));
  }
  return ks;
}

Eigen::MatrixXcd embed_on_mode(const Eigen::MatrixXcd& op, const std::vector<int>& dims,
                               int mode) {
  if (dims.size() == 1) return op;
  int da = dims[0], db = dims[1];
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(da * db, da * db);
  if (mode == 0) {
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < da; ++j)
        if (op(i, j) != cxd(0, 0))
          full.block(i * db, j * db, db, db) =
              op(i, j) * Eigen::MatrixXcd::Identity(db, db);
  } else {
    for (int i = 0; i < da; ++i) full.block(i * db, i * db, db, db) = op;
  }
  return full;
}

}  // namespace

DensityMatrix loss_channel(const DensityMatrix& rho, double eta, int mode) {
  require(eta >= 0.0 && eta <= 1.0, Errc::invalid_argument, "loss_channel: eta in [0,1]");
  require(mode >= 0 && mode < rho.n_modes(), Errc::invalid_argument,
          "loss_channel: bad mode index");
  if (eta == 1.0) return rho;
  int d = rho.mode_dims[mode];
  DensityMatrix out;
  out.mode_dims = rho.mode_dims;
  out.mat = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
  for (const auto& K : loss_kraus(d, eta)) {
    Eigen::MatrixXcd Kf = embed_on_mode(K, rho.mode_dims, mode);
    out.mat.noalias() += Kf * rho.mat * Kf.adjoint();
  }
  return out;
}

namespace {
Eigen::VectorXcd phase_diag(int d, double theta) {
  Eigen::VectorXcd ph(d);
  for (int n = 0; n < d; ++n) ph(n) = std::polar(1.0, n * theta);
  return ph;
}
}  // namespace

DensityMatrix phase_rotate(const DensityMatrix& rho, double theta, int mode) {
  require(mode >= 0 && mode < rho.n_modes(), Errc::invalid_argument,
          "phase_rotate: bad mode index");
  Eigen::VectorXcd ph = phase_diag(rho.mode_dims[mode], theta);
  Eigen::MatrixXcd D = embed_on_mode(Eigen::MatrixXcd(ph.asDiagonal()), rho.mode_dims, mode);
  DensityMatrix out;
  out.mode_dims = rho.mode_dims;
  out.mat = D * rho.mat * D.adjoint();
  return out;
}

StateVector phase_rotate(const StateVector& psi, double theta, int mode) {
  require(mode >= 0 && mode < psi.n_modes(), Errc::invalid_argument,
          "phase_rotate: bad mode index");
  Eigen::VectorXcd ph = phase_diag(psi.mode_dims[mode], theta);
  StateVector out = psi;
  if (psi.n_modes() == 1) {
    out.amps = ph.asDiagonal() * psi.amps;
  } else {
    int da = psi.mode_dims[0], db = psi.mode_dims[1];
    for (int i = 0; i < da; ++i)
      for (int j = 0; j < db; ++j)
        out.amps(i * db + j) *= (mode == 0) ? ph(i) : ph(j);
  }
  return out;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require(rho.dim() == sigma.dim(), Errc::dimension_mismatch, "fidelity: dimension mismatch");
  require(std::abs(rho.trace() - 1.0) < 1e-6 && std::abs(sigma.trace() - 1.0) < 1e-6,
          Errc::invalid_argument, "fidelity: inputs must be normalized");
  Eigen::MatrixXcd root = psd_sqrt(rho.mat);
  Eigen::MatrixXcd m = root * sigma.mat * root;
  m = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  double s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return s * s;
}

double state_fidelity(const StateVector& a, const StateVector& b) {
  require(a.dim() == b.dim(), Errc::dimension_mismatch, "state_fidelity: dimension mismatch");
  return std::norm((a.amps.adjoint() * b.amps).value());
}

double negativity(const DensityMatrix& rho) {
  require_two_modes(rho, "negativity");
  int da = rho.mode_dims[0], db = rho.mode_dims[1];
  Eigen::MatrixXcd pt(rho.dim(), rho.dim());
  for (int a = 0; a < da; ++a)
    for (int c = 0; c < da; ++c)
      pt.block(a * db, c * db, db, db) = rho.mat.block(c * db, a * db, db, db);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(pt, Eigen::EigenvaluesOnly);
  double trace_norm = es.eigenvalues().cwiseAbs().sum();
  return std::max(0.0, 0.5 * (trace_norm - 1.0));
}

double mean_photon_number(const StateVector& psi) {
  require_single_mode(psi, "mean_photon_number");
  double s = 0.0;
  for (int n = 0; n < psi.dim(); ++n) s += n * std::norm(psi.amps(n));
  return s;
}

double mean_photon_number(const DensityMatrix& rho) {
  require(rho.n_modes() == 1, Errc::invalid_argument, "mean_photon_number: single mode only");
  double s = 0.0;
  for (int n = 0; n < rho.dim(); ++n) s += n * rho.mat(n, n).real();
  return s;
}

Eigen::VectorXd schmidt_coefficients(const StateVector& psi) {
  require(psi.n_modes() == 2, Errc::dimension_mismatch, "schmidt_coefficients: two modes");
  int da = psi.mode_dims[0], db = psi.mode_dims[1];
  Eigen::MatrixXcd m(da, db);
  for (int i = 0; i < da; ++i) m.row(i) = psi.amps.segment(i * db, db).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues();
}

namespace {

// <n|D(beta)|m> for all n,m < d; D is the displacement operator.
Eigen::MatrixXcd displacement_matrix(cxd beta, int d) {
  double x = std::norm(beta);
  double expf = std::exp(-x / 2.0);
  std::vector<double> fact(d);
  fact[0] = 1.0;
  for (int n = 1; n < d; ++n) fact[n] = fact[n - 1] * n;

  Eigen::MatrixXcd D(d, d);
  for (int m = 0; m < d; ++m) {
    // n >= m: sqrt(m!/n!) beta^{n-m} e^{-x/2} L_m^{(n-m)}(x)
    for (int n = m; n < d; ++n) {
      int a = n - m;
      // Upward Laguerre recurrence in the lower index.
      double lkm1 = 1.0, lk = 1.0 + a - x;  // L_0^(a), L_1^(a)
      double L = (m == 0) ? lkm1 : lk;
      for (int k = 1; k < m; ++k) {
        double lkp1 = ((2 * k + 1 + a - x) * lk - (k + a) * lkm1) / (k + 1);
        lkm1 = lk;
        lk = lkp1;
        L = lk;
      }
      cxd val = std::sqrt(fact[m] / fact[n]) * std::pow(beta, a) * expf * L;
      D(n, m) = val;
      // n < m entry by the symmetry <m|D|n> = conj(<n|D(-beta)|m>) ... filled below.
    }
  }
  for (int n = 0; n < d; ++n)
    for (int m = n + 1; m < d; ++m) {
      int a = m - n;
      double lkm1 = 1.0, lk = 1.0 + a - x;
      double L = (n == 0) ? lkm1 : lk;
      for (int k = 1; k < n; ++k) {
        double lkp1 = ((2 * k + 1 + a - x) * lk - (k + a) * lkm1) / (k + 1);
        lkm1 = lk;
        lk = lkp1;
        L = lk;
      }
      D(n, m) = std::sqrt(fact[n] / fact[m]) * std::pow(-std::conj(beta), a) * expf * L;
    }
  return D;
}

}  // namespace

std::vector<double> wigner(const DensityMatrix& rho,
                           const std::vector<std::pair<double, double>>& points) {
  require(rho.n_modes() == 1, Errc::invalid_argument, "wigner: single-mode state expected");
  int d = rho.dim();
  // Parity-weighted columns: W(x,p) = Re Tr[rho D(beta) P] / pi, beta = sqrt(2)(x+ip).
  std::vector<double> out;
  out.reserve(points.size());
  for (auto [x, p] : points) {
    cxd beta = std::sqrt(2.0) * cxd(x, p);
    Eigen::MatrixXcd D = displacement_matrix(beta, d);
    // Tr[rho D(beta) Pi] = sum_{n,m} rho_{nm} D_{mn} (-1)^n
    cxd acc = 0.0;
    for (int n = 0; n < d; ++n) {
      double parity = (n % 2 == 0) ? 1.0 : -1.0;
      for (int m = 0; m < d; ++m) acc += rho.mat(n, m) * parity * D(m, n);
    }
    out.push_back(acc.real() / kPi);
  }
  return out;
}

WignerGrid wigner_grid(const DensityMatrix& rho, double x_min, double x_max, int nx,
                       double p_min, double p_max, int np) {
  require(nx >= 2 && np >= 2, Errc::invalid_argument, "wigner_grid: need >= 2 points per axis");
  WignerGrid g;
  g.xs = Eigen::ArrayXd::LinSpaced(nx, x_min, x_max);
  g.ps = Eigen::ArrayXd::LinSpaced(np, p_min, p_max);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(size_t(nx) * np);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < np; ++j) pts.emplace_back(g.xs[i], g.ps[j]);
  std::vector<double> vals = wigner(rho, pts);
  g.values.resize(nx, np);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < np; ++j) g.values(i, j) = vals[size_t(i) * np + j];
  return g;
}

double wigner_grid_integral(const WignerGrid& g) {
  Eigen::VectorXd wx = Eigen::VectorXd::Ones(g.xs.size());
  Eigen::VectorXd wp = Eigen::VectorXd::Ones(g.ps.size());
  wx(0) = wx(wx.size() - 1) = 0.5;
  wp(0) = wp(wp.size() - 1) = 0.5;
  double hx = (g.xs(g.xs.size() - 1) - g.xs(0)) / (g.xs.size() - 1);
  double hp = (g.ps(g.ps.size() - 1) - g.ps(0)) / (g.ps.size() - 1);
  return hx * hp * wx.dot(g.values * wp);
}

}  // namespace hst
