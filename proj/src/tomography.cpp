#include "hybridsteer/tomography.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "hybridsteer/homodyne.hpp"

namespace hst {

Eigen::VectorXd BinnedData::edges() const {
  return Eigen::VectorXd::LinSpaced(n_bins + 1, q_min, q_max);
}

BinnedData bin_records(const std::vector<QuadratureRecord>& records, double q_min, double q_max,
                       int n_bins) {
  require(!records.empty(), Errc::empty_condition, "bin_records: no records");
  require(n_bins >= 2 && q_max > q_min, Errc::invalid_argument, "bin_records: bad binning");
  BinnedData out;
  out.q_min = q_min;
  out.q_max = q_max;
  out.n_bins = n_bins;

  // Pass 1: discover the per-condition Bob phase sets.
  std::map<std::pair<int, int>, std::vector<double>> phase_sets;
  for (const auto& r : records) {
    require(std::isfinite(r.bob_q), Errc::invalid_argument, "bin_records: non-finite bob_q");
    auto& ps = phase_sets[{r.alice_phase_index, r.alice_sign > 0 ? 0 : 1}];
    bool known = false;
    for (double p : ps)
      if (std::abs(p - r.bob_phase) < 1e-9) {
        known = true;
        break;
      }
    if (!known) ps.push_back(r.bob_phase);
  }
  for (auto& [key, ps] : phase_sets) {
    std::sort(ps.begin(), ps.end());
    ConditionHistogram h;
    h.bob_phases = ps;
    h.counts = Eigen::MatrixXd::Zero(int(ps.size()), n_bins);
    h.q_min = q_min;
    h.q_max = q_max;
    out.conditions.emplace(key, std::move(h));
  }

  double w = (q_max - q_min) / n_bins;
  for (const auto& r : records) {
    ConditionHistogram& h = out.conditions.at({r.alice_phase_index, r.alice_sign > 0 ? 0 : 1});
    int pi = int(std::lower_bound(h.bob_phases.begin(), h.bob_phases.end(), r.bob_phase - 1e-9) -
                 h.bob_phases.begin());
    int bi = int(std::floor((r.bob_q - q_min) / w));
    if (bi < 0) {
      bi = 0;
      ++h.clipped_low;
    } else if (bi >= n_bins) {
      bi = n_bins - 1;
      ++h.clipped_high;
    }
    h.counts(pi, bi) += 1.0;
    ++h.total;
  }
  return out;
}

namespace {

// Detection-corrected bin POVMs for every (bob phase, bin) of a condition.
// Pi = Lambda_eta^*(D(phi) B_bin D(phi)^dag) with B the quadrature bin
// overlap and Lambda^* the adjoint attenuation map (unital).
std::vector<std::vector<Eigen::MatrixXcd>> condition_povms(const ConditionHistogram& data,
                                                           const Eigen::VectorXd& edges,
                                                           double eta_det, int n_max) {
  int d = n_max + 1;
  std::vector<Eigen::MatrixXd> bins = bin_overlap_tables(n_max, edges);

  // Kraus operators of the attenuation channel.
  std::vector<Eigen::MatrixXcd> kraus;
  if (eta_det < 1.0) {
    std::vector<std::vector<double>> binom(d, std::vector<double>(d, 0.0));
    for (int n = 0; n < d; ++n) {
      binom[n][0] = 1.0;
      for (int k = 1; k <= n; ++k)
        binom[n][k] = binom[n - 1][k - 1] + (k < n ? binom[n - 1][k] : 0.0);
    }
    for (int k = 0; k < d; ++k) {
      Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(d, d);
      for (int n = k; n < d; ++n)
        K(n - k, n) = std::sqrt(binom[n][k] * std::pow(eta_det, n - k) *
                                std::pow(1.0 - eta_det, k));
      kraus.push_back(std::move(K));
    }
  }

  std::vector<std::vector<Eigen::MatrixXcd>> povms(data.bob_phases.size());
  for (size_t p = 0; p < data.bob_phases.size(); ++p) {
    double phi = data.bob_phases[p];
    Eigen::VectorXcd ph(d);
    for (int n = 0; n < d; ++n) ph(n) = std::polar(1.0, n * phi);
    povms[p].resize(bins.size());
    for (size_t b = 0; b < bins.size(); ++b) {
      Eigen::MatrixXcd Pi = ph.asDiagonal() * bins[b].cast<cxd>() *
                            ph.conjugate().asDiagonal();
      if (eta_det < 1.0) {
        Eigen::MatrixXcd corrected = Eigen::MatrixXcd::Zero(d, d);
        for (const auto& K : kraus) corrected += K.adjoint() * Pi * K;
        Pi = corrected;
      }
      povms[p][b] = 0.5 * (Pi + Pi.adjoint().eval());
    }
  }
  return povms;
}

struct FlatData {
  std::vector<Eigen::MatrixXcd> povm;  // only bins with counts
  Eigen::VectorXd counts;
  double total = 0.0;
};

FlatData flatten(const ConditionHistogram& data, const Eigen::VectorXd& edges, double eta_det,
                 int n_max) {
  auto povms = condition_povms(data, edges, eta_det, n_max);
  FlatData f;
  for (int p = 0; p < data.counts.rows(); ++p)
    for (int b = 0; b < data.counts.cols(); ++b)
      if (data.counts(p, b) > 0.0) {
        f.povm.push_back(povms[p][b]);
        f.total += data.counts(p, b);
      }
  f.counts.resize(f.povm.size());
  int k = 0;
  for (int p = 0; p < data.counts.rows(); ++p)
    for (int b = 0; b < data.counts.cols(); ++b)
      if (data.counts(p, b) > 0.0) f.counts(k++) = data.counts(p, b);
  return f;
}

double log_likelihood(const FlatData& f, const Eigen::MatrixXcd& rho) {
  double ll = 0.0;
  for (int k = 0; k < f.counts.size(); ++k) {
    double p = std::max((f.povm[k].cwiseProduct(rho.transpose())).sum().real(), 1e-300);
    ll += f.counts(k) * std::log(p);
  }
  return ll;
}

}  // namespace

MaxlikResult maxlik_reconstruct(const ConditionHistogram& data, double eta_det, int n_max,
                                const MaxlikOptions& opt) {
  require(eta_det > 0.0 && eta_det <= 1.0, Errc::invalid_argument,
          "maxlik_reconstruct: eta_det in (0,1]");
  require(data.total > 0, Errc::empty_condition, "maxlik_reconstruct: empty condition");
  int d = n_max + 1;
  FlatData f = flatten(data, data.edges(), eta_det, n_max);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / double(d);
  double ll = log_likelihood(f, rho);
  MaxlikResult out;
  out.min_loglik_step = std::numeric_limits<double>::infinity();

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    // R = sum_b (f_b / p_b) Pi_b with f_b the global bin frequency.
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < f.counts.size(); ++k) {
      double p = std::max((f.povm[k].cwiseProduct(rho.transpose())).sum().real(), 1e-300);
      R += (f.counts(k) / f.total / p) * f.povm[k];
    }
    Eigen::MatrixXcd cand = R * rho * R;
    cand /= cand.trace().real();
    cand = 0.5 * (cand + cand.adjoint().eval());
    double cand_ll = log_likelihood(f, cand);

    // Damped fallback keeps the ascent monotone on the rare non-monotone step.
    double gamma = 1.0;
    while (cand_ll < ll - 1e-10 && gamma > 1e-4) {
      gamma *= 0.5;
      Eigen::MatrixXcd Rg = (1.0 - gamma) * Eigen::MatrixXcd::Identity(d, d) + gamma * R;
      cand = Rg * rho * Rg;
      cand /= cand.trace().real();
      cand = 0.5 * (cand + cand.adjoint().eval());
      cand_ll = log_likelihood(f, cand);
    }

    out.min_loglik_step = std::min(out.min_loglik_step, cand_ll - ll);
    double gain = cand_ll - ll;
    rho = cand;
    ll = cand_ll;
    if (gain >= 0.0 && gain < opt.tol) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.rho.mat = rho;
  out.rho.mode_dims = {d};
  out.log_likelihood = ll;
  if (out.min_loglik_step == std::numeric_limits<double>::infinity())
    out.min_loglik_step = 0.0;
  return out;
}

std::vector<std::array<double, 2>> record_frequencies(
    const std::vector<QuadratureRecord>& records, int m_A) {
  std::vector<std::array<double, 2>> counts(m_A, {0.0, 0.0});
  for (const auto& r : records) {
    require(r.alice_phase_index >= 0 && r.alice_phase_index < m_A, Errc::invalid_argument,
            "records: alice_phase_index out of range");
    counts[r.alice_phase_index][r.alice_sign > 0 ? 0 : 1] += 1.0;
  }
  for (int t = 0; t < m_A; ++t) {
    double tot = counts[t][0] + counts[t][1];
    require(tot > 0, Errc::empty_condition,
            "records: no events for phase index " + std::to_string(t));
    counts[t][0] /= tot;
    counts[t][1] = 1.0 - counts[t][0];  // sums to 1 exactly
  }
  return counts;
}

Assemblage reconstruct_assemblage(const std::vector<QuadratureRecord>& records,
                                  const ExperimentConfig& cfg) {
  BinnedData binned = bin_records(records);
  auto freqs = record_frequencies(records, cfg.m_A);
  for (int t = 0; t < cfg.m_A; ++t)
    for (int s = 0; s < 2; ++s)
      require(binned.conditions.count({t, s}) == 1, Errc::empty_condition,
              "reconstruct_assemblage: missing condition (" + std::to_string(t) + "," +
                  std::to_string(s) + ")");

  Assemblage out;
  out.phases = cfg.alice_phases();
  out.members.resize(cfg.m_A);
  for (int t = 0; t < cfg.m_A; ++t)
    for (int s = 0; s < 2; ++s) {
      MaxlikResult r =
          maxlik_reconstruct(binned.conditions.at({t, s}), cfg.eta_B_det, cfg.n_max_B);
      out.members[t][s] = freqs[t][s] * r.rho.mat;
    }
  return out;
}

MhResult mh_sample(const ConditionHistogram& data, double eta_det, int n_max,
                   const ChainParams& chain) {
  require(chain.n_retained >= 1 && chain.burn_in >= 0 && chain.thin >= 1 &&
              chain.step_size > 0.0,
          Errc::invalid_argument, "mh_sample: bad chain parameters");
  int d = n_max + 1;
  FlatData f = flatten(data, data.edges(), eta_det, n_max);

  SplitMix64 rng(chain.seed);

  // Purification vector = d x d complex matrix T, rho = T T^dag / tr.
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) T(i, j) = rng.cnormal();
  T /= T.norm();
  auto to_rho = [](const Eigen::MatrixXcd& t) {
    Eigen::MatrixXcd r = t * t.adjoint();
    return (r / r.trace().real()).eval();
  };

  double step = chain.step_size;
  double ll = f.total > 0 ? log_likelihood(f, to_rho(T)) : 0.0;
  auto loglike = [&](const Eigen::MatrixXcd& t) {
    return f.total > 0 ? log_likelihood(f, to_rho(t)) : 0.0;
  };
  auto propose = [&](const Eigen::MatrixXcd& t, double s) {
    Eigen::MatrixXcd g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.cnormal();
    Eigen::MatrixXcd cand = t + s * g;
    cand /= cand.norm();
    return cand;
  };

  // Burn-in with step auto-tuning toward 0.3 acceptance.
  const int tune_window = 200;
  int accepted_window = 0;
  for (int k = 0; k < chain.burn_in; ++k) {
    Eigen::MatrixXcd cand = propose(T, step);
    double cand_ll = loglike(cand);
    if (cand_ll >= ll || rng.uniform() < std::exp(cand_ll - ll)) {
      T = std::move(cand);
      ll = cand_ll;
      ++accepted_window;
    }
    if ((k + 1) % tune_window == 0) {
      double rate = double(accepted_window) / tune_window;
      step *= std::clamp(std::pow(rate / 0.3, 0.7), 0.5, 2.0);
      step = std::clamp(step, 1e-6, 1.0);
      accepted_window = 0;
    }
  }

  MhResult out;
  out.tuned_step = step;
  out.states.reserve(chain.n_retained);
  long accepted = 0;
  long steps = long(chain.n_retained) * chain.thin;
  for (long k = 0; k < steps; ++k) {
    Eigen::MatrixXcd cand = propose(T, step);
    double cand_ll = loglike(cand);
    if (cand_ll >= ll || rng.uniform() < std::exp(cand_ll - ll)) {
      T = std::move(cand);
      ll = cand_ll;
      ++accepted;
    }
    if ((k + 1) % chain.thin == 0) out.states.push_back(to_rho(T));
  }
  out.acceptance_rate = steps > 0 ? double(accepted) / double(steps) : 0.0;
  out.pathological = out.acceptance_rate < 0.05 || out.acceptance_rate > 0.8;
  return out;
}

ViolationHistogram violation_histogram(
    const std::map<std::pair<int, int>, MhResult>& chains,
    const std::vector<std::array<double, 2>>& frequencies, const SteeringFunctional& F,
    long n_evaluations, std::uint64_t seed) {
  int m = F.n_phases();
  require(int(frequencies.size()) == m, Errc::dimension_mismatch,
          "violation_histogram: frequency table size mismatch");
  size_t len = 0;
  for (const auto& [key, chain] : chains) {
    require(key.first >= 0 && key.first < m, Errc::dimension_mismatch,
            "violation_histogram: chain key out of range");
    if (len == 0) len = chain.states.size();
    require(chain.states.size() == len, Errc::dimension_mismatch,
            "violation_histogram: chains have different lengths");
  }
  require(len > 0 && chains.size() == size_t(2 * m), Errc::empty_condition,
          "violation_histogram: need one chain per condition");
  int df = F.dim();

  // Precompute Tr[F_{a|theta} rho_i] per condition and sample.
  std::map<std::pair<int, int>, Eigen::VectorXd> traces;
  for (const auto& [key, chain] : chains) {
    const Eigen::MatrixXcd& Fop = F.ops[key.first][key.second];
    Eigen::VectorXd v(len);
    for (size_t i = 0; i < len; ++i)
      v(i) =
          (Fop.cwiseProduct(chain.states[i].topLeftCorner(df, df).transpose())).sum().real();
    traces.emplace(key, std::move(v));
  }

  if (n_evaluations <= 0) n_evaluations = long(len);
  ViolationHistogram out;
  out.s_values.reserve(n_evaluations);
  SplitMix64 rng(mix_seed(seed, "violation-histogram"));
  for (long k = 0; k < n_evaluations; ++k) {
    double s = 0.0;
    for (int t = 0; t < m; ++t)
      for (int si = 0; si < 2; ++si) {
        size_t idx = (k < long(len)) ? size_t(k) : size_t(rng.next() % len);
        s += frequencies[t][si] * traces.at({t, si})(idx);
      }
    out.s_values.push_back(s);
  }
  double n = double(out.s_values.size());
  double mean = std::accumulate(out.s_values.begin(), out.s_values.end(), 0.0) / n;
  double var = 0.0;
  for (double s : out.s_values) var += (s - mean) * (s - mean);
  var /= std::max(1.0, n - 1.0);
  out.mean = mean;
  out.stddev = std::sqrt(var);
  out.separation_sigmas = out.stddev > 0.0 ? std::max(0.0, -mean) / out.stddev : 0.0;
  return out;
}

}  // namespace hst
