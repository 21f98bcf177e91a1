#include "hybridsteer/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace hst {

namespace {

double min_eig(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs_eig(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Smallest leading Fock block capturing >= 1 - tol of every member's trace.
int effective_dimension(const Assemblage& a, double tol) {
  int d = a.dim();
  int need = 1;
  for (int t = 0; t < a.n_phases(); ++t)
    for (int s = 0; s < 2; ++s) {
      const Eigen::MatrixXcd& m = a.members[t][s];
      double tr = m.trace().real();
      double cum = 0.0;
      for (int k = 0; k < d; ++k) {
        cum += m(k, k).real();
        if (cum >= (1.0 - tol) * tr) {
          need = std::max(need, k + 1);
          break;
        }
        if (k == d - 1) need = d;
      }
    }
  return need;
}

Assemblage truncate_assemblage(const Assemblage& a, int d) {
  if (d >= a.dim()) return a;
  Assemblage out;
  out.phases = a.phases;
  out.members.resize(a.members.size());
  for (size_t t = 0; t < a.members.size(); ++t)
    for (int s = 0; s < 2; ++s) out.members[t][s] = a.members[t][s].topLeftCorner(d, d);
  return out;
}

ipm::SteeringProblem make_problem(const Assemblage& a, const SdpOptions& opt, bool bounds,
                                  bool equality) {
  ipm::SteeringProblem p;
  p.m = a.n_phases();
  require(p.m >= 1 && p.m <= 16, Errc::too_many_strategies,
          "sdp: 2^m_A strategies exceed the enumeration cap");
  int d = effective_dimension(a, opt.capture_tol);
  Assemblage red = truncate_assemblage(a, d);
  p.d = d;
  p.sigma.resize(p.m);
  for (int t = 0; t < p.m; ++t)
    for (int s = 0; s < 2; ++s)
      p.sigma[t][s] = 0.5 * (red.members[t][s] + red.members[t][s].adjoint().eval());
  p.bound_blocks = bounds;
  p.trace_equality = equality;
  p.h = equality ? std::pow(2.0, 1 - p.m) : 0.0;
  p.gap_tol = opt.gap_tol;
  p.max_iter = opt.max_iter;
  return p;
}

}  // namespace

DeterministicStrategyTable enumerate_strategies(int m_A) {
  require(m_A >= 1 && m_A <= 16, Errc::too_many_strategies,
          "enumerate_strategies: m_A must be in [1, 16]");
  return DeterministicStrategyTable{m_A};
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    default: return "numerical-failure";
  }
}

double functional_constraint_violation(const SteeringFunctional& f, bool check_bounds) {
  int m = f.n_phases();
  double worst = 0.0;
  for (int lam = 0; lam < (1 << m); ++lam) {
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(f.dim(), f.dim());
    for (int t = 0; t < m; ++t)
      sum += f.ops[t][DeterministicStrategyTable::sign(lam, t) > 0 ? 0 : 1];
    worst = std::max(worst, -min_eig(sum));
  }
  if (check_bounds)
    for (int t = 0; t < m; ++t)
      for (int s = 0; s < 2; ++s)
        worst = std::max(worst, max_abs_eig(f.ops[t][s]) - 1.0);
  return std::max(0.0, worst);
}

SdpResult optimal_functional(const Assemblage& assemblage, const SdpOptions& opt) {
  ipm::SteeringProblem p = make_problem(assemblage, opt, /*bounds=*/true, /*equality=*/false);
  ipm::SolveResult r = ipm::solve_steering_sdp(p);

  SdpResult out;
  out.objective = r.objective;
  out.duality_gap = r.rel_gap;
  out.iterations = r.iterations;
  out.dim = p.d;

  SteeringFunctional f;
  f.phases = assemblage.phases;
  f.ops = r.F;
  out.functional = std::move(f);

  bool ok = r.status == ipm::SolveStatus::Optimal && r.rel_gap <= 1e-7;
  // Independent certificate re-check by eigendecomposition.
  if (ok && functional_constraint_violation(*out.functional) > 1e-7) ok = false;
  out.status = ok ? SdpStatus::Optimal : SdpStatus::NumericalFailure;
  return out;
}

SdpResult lhs_membership(const Assemblage& assemblage, const SdpOptions& opt) {
  // Project onto the non-signaling subspace: the feasibility program's
  // equality constraints are inconsistent otherwise. Engine-built
  // assemblages satisfy non-signaling to ~1e-12 and pass through unchanged.
  Assemblage work = assemblage;
  int m = work.n_phases();
  double dev = work.signaling_deviation();
  if (dev > 1e-12) {
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(work.dim(), work.dim());
    for (int t = 0; t < m; ++t) mean += work.unconditioned(t);
    mean /= double(m);
    for (int t = 0; t < m; ++t) {
      Eigen::MatrixXcd corr = 0.5 * (mean - work.unconditioned(t));
      for (int s = 0; s < 2; ++s) work.members[t][s] += corr;
    }
  }

  ipm::SteeringProblem p = make_problem(work, opt, /*bounds=*/false, /*equality=*/true);
  ipm::SolveResult r = ipm::solve_steering_sdp(p);

  SdpResult out;
  out.objective = r.objective;  // optimal t of the feasibility-gap program
  out.duality_gap = r.rel_gap;
  out.iterations = r.iterations;
  out.dim = p.d;
  out.signaling_correction = dev;
  out.status = (r.status == ipm::SolveStatus::Optimal && r.rel_gap <= 1e-7)
                   ? SdpStatus::Optimal
                   : SdpStatus::NumericalFailure;
  out.lhs_member = out.status == SdpStatus::Optimal && r.objective >= -1e-8;
  if (out.lhs_member) {
    double t_star = r.dual_objective;  // h * w at the primal iterate
    out.lhs_decomposition.reserve(r.X_strategy.size());
    for (const auto& X : r.X_strategy)
      out.lhs_decomposition.push_back(
          X + t_star * Eigen::MatrixXcd::Identity(p.d, p.d));
  }
  return out;
}

double evaluate_functional(const SteeringFunctional& f, const Assemblage& assemblage) {
  require(f.n_phases() == assemblage.n_phases(), Errc::dimension_mismatch,
          "evaluate_functional: phase-grid mismatch");
  for (int t = 0; t < f.n_phases(); ++t)
    require(std::abs(f.phases[t] - assemblage.phases[t]) < 1e-9, Errc::dimension_mismatch,
            "evaluate_functional: phase-grid mismatch");
  int df = f.dim(), da = assemblage.dim();
  require(df <= da, Errc::dimension_mismatch,
          "evaluate_functional: functional dimension exceeds assemblage dimension");
  double s = 0.0;
  for (int t = 0; t < f.n_phases(); ++t)
    for (int si = 0; si < 2; ++si)
      s += (f.ops[t][si] * assemblage.members[t][si].topLeftCorner(df, df)).trace().real();
  return s;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::MA: return "m_A";
    case SweepAxis::R: return "R";
    default: return "eta_A";
  }
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "m_A" || s == "mA" || s == "m") return SweepAxis::MA;
  if (s == "R" || s == "r") return SweepAxis::R;
  if (s == "eta_A" || s == "etaA") return SweepAxis::EtaA;
  fail(Errc::config_invalid, "sweep: unknown axis '" + s + "'");
}

Assemblage model_assemblage(const ExperimentConfig& cfg) {
  DensityMatrix rho = apply_losses(build_hybrid_state(cfg), cfg);
  return compute_assemblage(rho, cfg.alice_phases(), cfg.phase_noise_sigma);
}

namespace {

SweepPoint solve_point(const ExperimentConfig& cfg, double value, const SdpOptions& opt) {
  SdpResult r = optimal_functional(model_assemblage(cfg), opt);
  SweepPoint p;
  p.value = value;
  p.s_min = r.objective;
  p.status = r.status;
  p.gap = r.duality_gap;
  p.dim = r.dim;
  return p;
}

}  // namespace

std::pair<double, double> optimize_ratio(const ExperimentConfig& base, const SdpOptions& opt,
                                         double r_lo, double r_hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double R) {
    ExperimentConfig cfg = base;
    cfg.R = R;
    return optimal_functional(model_assemblage(cfg), opt).objective;
  };
  double a = r_lo, b = r_hi;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = eval(c), fd = eval(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
  }
  return fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

SweepResult sweep(const ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& values, const SdpOptions& opt) {
  SweepResult out;
  out.axis = axis;
  out.points.resize(values.size());

  auto run_point = [&](size_t i) {
    double v = values[i];
    ExperimentConfig cfg = base;
    switch (axis) {
      case SweepAxis::MA: {
        int m = int(std::lround(v));
        require(m >= 1, Errc::config_invalid, "sweep: m_A values must be >= 1");
        cfg.m_A = m;
        auto [r_best, s_best] = optimize_ratio(cfg, opt);
        cfg.R = r_best;
        SweepPoint p = solve_point(cfg, v, opt);
        p.s_min = std::min(p.s_min, s_best);
        p.optimal_R = r_best;
        out.points[i] = p;
        return;
      }
      case SweepAxis::R:
        cfg.R = v;
        break;
      case SweepAxis::EtaA:
        cfg.eta_A = v;
        break;
    }
    out.points[i] = solve_point(cfg, v, opt);
  };

  // Sweep points are independent; run them on the available cores.
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      try {
        run_point(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < std::min<size_t>(hw, values.size()); ++k)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  if (axis == SweepAxis::MA) {
    out.monotone_checked = true;
    for (size_t i = 1; i < out.points.size(); ++i)
      if (values[i] > values[i - 1] &&
          out.points[i].s_min > out.points[i - 1].s_min + 2e-7)
        out.monotone_ok = false;
  }
  return out;
}

}  // namespace hst
