#include "hybridsteer/ipm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hst::ipm {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Orthonormal real basis of Hermitian d x d matrices:
// p < d           : e_pp
// then for i < j  : (e_ij + e_ji)/sqrt(2), i(e_ij - e_ji)/sqrt(2)
struct HermBasis {
  int d = 0;
  std::vector<std::pair<int, int>> pairs;  // (i,j), i<j, in order

  explicit HermBasis(int dim) : d(dim) {
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  }
  int n() const { return d * d; }

  // x_p = <E_p, M> for Hermitian M.
  Eigen::VectorXd coords(const Eigen::MatrixXcd& M) const {
    Eigen::VectorXd x(n());
    for (int i = 0; i < d; ++i) x(i) = M(i, i).real();
    for (size_t k = 0; k < pairs.size(); ++k) {
      auto [i, j] = pairs[k];
      x(d + 2 * k) = kSqrt2 * M(i, j).real();
      x(d + 2 * k + 1) = kSqrt2 * M(i, j).imag();
    }
    return x;
  }

  Eigen::MatrixXcd matrix(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) M(i, i) = x(i);
    for (size_t k = 0; k < pairs.size(); ++k) {
      auto [i, j] = pairs[k];
      cxd v(x(d + 2 * k) / kSqrt2, x(d + 2 * k + 1) / kSqrt2);
      M(i, j) = v;
      M(j, i) = std::conj(v);
    }
    return M;
  }

  // K_pq = Re Tr[E_p U E_q V]; symmetric PD for U, V Hermitian PD.
  Eigen::MatrixXd kernel(const Eigen::MatrixXcd& U, const Eigen::MatrixXcd& V) const {
    Eigen::MatrixXd K(n(), n());
    Eigen::MatrixXcd T(d, d);
    auto extract = [&](int q) {
      // K(p, q) = Re Tr[E_p T] over all p.
      for (int i = 0; i < d; ++i) K(i, q) = T(i, i).real();
      for (size_t k = 0; k < pairs.size(); ++k) {
        auto [i, j] = pairs[k];
        cxd s = T(j, i) + T(i, j);
        cxd a = T(j, i) - T(i, j);
        K(d + 2 * k, q) = s.real() / kSqrt2;
        K(d + 2 * k + 1, q) = -a.imag() / kSqrt2;
      }
    };
    for (int kd = 0; kd < d; ++kd) {
      T.noalias() = U.col(kd) * V.row(kd);
      extract(kd);
    }
    for (size_t k = 0; k < pairs.size(); ++k) {
      auto [kk, ll] = pairs[k];
      Eigen::MatrixXcd A = U.col(kk) * V.row(ll);
      Eigen::MatrixXcd B = U.col(ll) * V.row(kk);
      T = (A + B) / kSqrt2;
      extract(d + 2 * int(k));
      T = cxd(0, 1) * (A - B) / kSqrt2;
      extract(d + 2 * int(k) + 1);
    }
    return K;
  }
};

struct Block {
  // Z_target = sum over (slot, coeff) of coeff * F_slot  -  c_id * I.
  std::vector<std::pair<int, double>> vars;
  double c_id = 0.0;
};

double min_eig(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Largest alpha in (0, 1] with M + alpha D >= 0, given M > 0.
double max_step(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& D) {
  Eigen::LLT<Eigen::MatrixXcd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXcd L = llt.matrixL();
  Eigen::MatrixXcd W = L.triangularView<Eigen::Lower>().solve(D);
  W = L.triangularView<Eigen::Lower>().solve(W.adjoint().eval()).eval();
  double lam = min_eig(0.5 * (W + W.adjoint().eval()));
  if (lam >= -1e-16) return 1.0;
  return std::min(1.0, -1.0 / lam);
}

}  // namespace

SolveResult solve_steering_sdp(const SteeringProblem& prob) {
  const int m = prob.m;
  const int d = prob.d;
  require(m >= 1 && m <= 16, Errc::too_many_strategies,
          "sdp: number of settings must be in [1, 16]");
  require(int(prob.sigma.size()) == m && d >= 1, Errc::dimension_mismatch,
          "sdp: malformed problem");
  const int n_slots = 2 * m;
  const HermBasis basis(d);
  const int np = basis.n();
  const int n = n_slots * np;  // real variable count
  const int n_lambda = 1 << m;

  // Block table: strategy blocks first, then bound pairs.
  std::vector<Block> blocks;
  blocks.reserve(n_lambda + (prob.bound_blocks ? 2 * n_slots : 0));
  for (int lam = 0; lam < n_lambda; ++lam) {
    Block b;
    for (int t = 0; t < m; ++t) b.vars.emplace_back(2 * t + ((lam >> t) & 1), 1.0);
    blocks.push_back(std::move(b));
  }
  if (prob.bound_blocks) {
    for (int j = 0; j < n_slots; ++j) {
      blocks.push_back(Block{{{j, -1.0}}, -1.0});  // 1 - F_j >= 0
      blocks.push_back(Block{{{j, +1.0}}, -1.0});  // 1 + F_j >= 0
    }
  }
  const int n_blocks = int(blocks.size());
  const double cone_dim = double(n_blocks) * d;

  // Objective vector b.
  Eigen::VectorXd bvec(n);
  for (int t = 0; t < m; ++t)
    for (int s = 0; s < 2; ++s)
      bvec.segment((2 * t + s) * np, np) = basis.coords(prob.sigma[t][s]);

  // Equality coefficient vector g (sum of traces).
  Eigen::VectorXd gvec = Eigen::VectorXd::Zero(n);
  if (prob.trace_equality) {
    for (int j = 0; j < n_slots; ++j) gvec.segment(j * np, d).setOnes();
  }

  // Iterate state.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  double w = 0.0;
  double xi = 10.0 * (1.0 + bvec.cwiseAbs().maxCoeff());
  std::vector<Eigen::MatrixXcd> X(n_blocks, xi * Eigen::MatrixXcd::Identity(d, d));
  std::vector<Eigen::MatrixXcd> Z(n_blocks, xi * Eigen::MatrixXcd::Identity(d, d));

  auto slot_matrix = [&](const Eigen::VectorXd& coords, int j) {
    return basis.matrix(coords.segment(j * np, np));
  };

  SolveResult best;
  best.status = SolveStatus::NumericalFailure;
  double best_score = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd H(n, n);
  std::vector<Eigen::MatrixXcd> Zinv(n_blocks), Rd(n_blocks), dZ(n_blocks), dX(n_blocks),
      dZc(n_blocks), dXc(n_blocks);

  int stall = 0;
  int no_progress = 0;
  int iter = 0;
  for (; iter < prob.max_iter; ++iter) {
    // Residuals.
    std::vector<Eigen::MatrixXcd> F(n_slots);
    for (int j = 0; j < n_slots; ++j) F[j] = slot_matrix(y, j);
    double dual_inf = 0.0;
    for (int b = 0; b < n_blocks; ++b) {
      Eigen::MatrixXcd Zt = Eigen::MatrixXcd::Zero(d, d);
      for (auto [j, c] : blocks[b].vars) Zt += c * F[j];
      if (blocks[b].c_id != 0.0)
        Zt -= blocks[b].c_id * Eigen::MatrixXcd::Identity(d, d);
      Rd[b] = Zt - Z[b];
      dual_inf = std::max(dual_inf, Rd[b].cwiseAbs().maxCoeff());
    }
    Eigen::VectorXd rp = bvec;
    for (int b = 0; b < n_blocks; ++b) {
      Eigen::VectorXd cx = basis.coords(X[b]);
      for (auto [j, c] : blocks[b].vars) rp.segment(j * np, np) -= c * cx;
    }
    if (prob.trace_equality) rp -= gvec * w;
    double req = prob.trace_equality ? (prob.h - gvec.dot(y)) : 0.0;
    double primal_inf = rp.cwiseAbs().maxCoeff() / (1.0 + bvec.cwiseAbs().maxCoeff());
    primal_inf = std::max(primal_inf, std::abs(req));

    // Gap and objectives.
    double gap = 0.0;
    for (int b = 0; b < n_blocks; ++b) gap += (X[b] * Z[b]).trace().real();
    double pobj = bvec.dot(y);
    double dobj = prob.h * w;
    for (int b = 0; b < n_blocks; ++b)
      if (blocks[b].c_id != 0.0) dobj += blocks[b].c_id * X[b].trace().real();
    double rel_gap = std::abs(gap) / (1.0 + std::abs(pobj) + std::abs(dobj));

    static const bool trace = std::getenv("HST_IPM_TRACE") != nullptr;
    if (trace)
      std::fprintf(stderr, "it %3d  gap %.3e  pinf %.3e  dinf %.3e  pobj %.8f  dobj %.8f\n",
                   iter, rel_gap, primal_inf, dual_inf, pobj, dobj);

    double score = std::max({rel_gap, primal_inf, dual_inf});
    if (score > 0.9 * best_score) {
      if (++no_progress >= 12) break;
    } else {
      no_progress = 0;
    }
    if (score < best_score) {
      best_score = score;
      best.objective = pobj;
      best.dual_objective = dobj;
      best.rel_gap = rel_gap;
      best.primal_inf = primal_inf;
      best.dual_inf = dual_inf;
      best.iterations = iter;
      best.F.assign(m, {});
      for (int t = 0; t < m; ++t)
        for (int s = 0; s < 2; ++s) best.F[t][s] = F[2 * t + s];
      best.X_strategy.assign(X.begin(), X.begin() + n_lambda);
      best.w = w;
    }
    if (rel_gap <= prob.gap_tol && primal_inf <= prob.feas_tol && dual_inf <= prob.feas_tol) {
      best.status = SolveStatus::Optimal;
      break;
    }

    double mu = gap / cone_dim;

    // Factor Z blocks.
    bool ok = true;
    for (int b = 0; b < n_blocks; ++b) {
      Eigen::LLT<Eigen::MatrixXcd> llt(Z[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[b] = llt.solve(Eigen::MatrixXcd::Identity(d, d));
      Zinv[b] = 0.5 * (Zinv[b] + Zinv[b].adjoint().eval());
    }
    if (!ok) break;

    // Schur complement.
    H.setZero();
    std::vector<Eigen::MatrixXd> Kb(n_blocks);
    for (int b = 0; b < n_blocks; ++b) Kb[b] = basis.kernel(Zinv[b], X[b]);
    for (int b = 0; b < n_blocks; ++b)
      for (auto [j1, c1] : blocks[b].vars)
        for (auto [j2, c2] : blocks[b].vars)
          H.block(j1 * np, j2 * np, np, np) += (c1 * c2) * Kb[b];

    Eigen::LLT<Eigen::MatrixXd> hllt(H);
    if (hllt.info() != Eigen::Success) {
      double ridge = 1e-12 * H.diagonal().maxCoeff();
      for (int tries = 0; tries < 6 && hllt.info() != Eigen::Success; ++tries) {
        H.diagonal().array() += ridge;
        ridge *= 100.0;
        hllt.compute(H);
      }
      if (hllt.info() != Eigen::Success) break;
    }

    // rhs builder for a given sigma_center and optional second-order term.
    auto build_rhs = [&](double sig_mu, const std::vector<Eigen::MatrixXcd>* corr)
        -> Eigen::VectorXd {
      Eigen::VectorXd r = -rp;
      for (int b = 0; b < n_blocks; ++b) {
        Eigen::MatrixXcd M = sig_mu * Zinv[b] - X[b] - Zinv[b] * Rd[b] * X[b];
        if (corr) M -= Zinv[b] * (*corr)[b];
        M = 0.5 * (M + M.adjoint().eval());
        Eigen::VectorXd cm = basis.coords(M);
        for (auto [j, c] : blocks[b].vars) r.segment(j * np, np) += c * cm;
      }
      return r;
    };

    auto refined_solve = [&](const Eigen::VectorXd& r) {
      Eigen::VectorXd x = hllt.solve(r);
      // One step of iterative refinement recovers the digits the
      // ill-conditioned endgame Schur systems lose.
      Eigen::VectorXd resid = r - H.selfadjointView<Eigen::Lower>() * x;
      x += hllt.solve(resid);
      return x;
    };
    auto solve_direction = [&](const Eigen::VectorXd& r, double req_rhs, Eigen::VectorXd& dy,
                               double& dw) {
      if (prob.trace_equality) {
        Eigen::VectorXd u = refined_solve(gvec);
        Eigen::VectorXd v = refined_solve(r);
        dw = (req_rhs - gvec.dot(v)) / std::max(gvec.dot(u), 1e-300);
        dy = v + dw * u;
      } else {
        dw = 0.0;
        dy = refined_solve(r);
      }
    };

    auto expand_direction = [&](const Eigen::VectorXd& dy, double sig_mu,
                                const std::vector<Eigen::MatrixXcd>* corr,
                                std::vector<Eigen::MatrixXcd>& dZo,
                                std::vector<Eigen::MatrixXcd>& dXo) {
      std::vector<Eigen::MatrixXcd> dFs(n_slots);
      for (int j = 0; j < n_slots; ++j) dFs[j] = slot_matrix(dy, j);
      for (int b = 0; b < n_blocks; ++b) {
        Eigen::MatrixXcd dF = Eigen::MatrixXcd::Zero(d, d);
        for (auto [j, c] : blocks[b].vars) dF += c * dFs[j];
        dZo[b] = dF + Rd[b];
        Eigen::MatrixXcd M = sig_mu * Zinv[b] - X[b] - Zinv[b] * dZo[b] * X[b];
        if (corr) M -= Zinv[b] * (*corr)[b];
        dXo[b] = 0.5 * (M + M.adjoint().eval());
      }
    };

    // Predictor (affine scaling).
    Eigen::VectorXd dy_a;
    double dw_a = 0.0;
    solve_direction(build_rhs(0.0, nullptr), req, dy_a, dw_a);
    expand_direction(dy_a, 0.0, nullptr, dZc, dXc);
    double ap_a = 1.0, ad_a = 1.0;
    for (int b = 0; b < n_blocks; ++b) {
      ap_a = std::min(ap_a, max_step(X[b], dXc[b]));
      ad_a = std::min(ad_a, max_step(Z[b], dZc[b]));
    }
    double gap_aff = 0.0;
    for (int b = 0; b < n_blocks; ++b)
      gap_aff += ((X[b] + 0.95 * ap_a * dXc[b]) * (Z[b] + 0.95 * ad_a * dZc[b]))
                     .trace()
                     .real();
    double sigma = std::pow(std::max(0.0, gap_aff / gap), 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0);

    // Corrector with second-order term dZ_a dX_a.
    std::vector<Eigen::MatrixXcd> corr(n_blocks);
    for (int b = 0; b < n_blocks; ++b) corr[b] = dZc[b] * dXc[b];
    Eigen::VectorXd dy;
    double dw = 0.0;
    solve_direction(build_rhs(sigma * mu, &corr), req, dy, dw);
    expand_direction(dy, sigma * mu, &corr, dZ, dX);

    double tau = iter < 4 ? 0.95 : 0.98;
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < n_blocks; ++b) {
      ap = std::min(ap, tau * max_step(X[b], dX[b]));
      ad = std::min(ad, tau * max_step(Z[b], dZ[b]));
    }
    if (ap < 1e-7 && ad < 1e-7) {
      if (++stall >= 3) break;
    } else {
      stall = 0;
    }

    for (int b = 0; b < n_blocks; ++b) {
      X[b] += ap * dX[b];
      X[b] = 0.5 * (X[b] + X[b].adjoint().eval());
      Z[b] += ad * dZ[b];
      Z[b] = 0.5 * (Z[b] + Z[b].adjoint().eval());
    }
    y += ad * dy;
    w += ad * dw;
  }

  best.iterations = iter;
  return best;
}

}  // namespace hst::ipm
