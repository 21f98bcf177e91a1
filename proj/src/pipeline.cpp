#include "hybridsteer/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "hybridsteer/homodyne.hpp"

namespace hst {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Manifest {
 public:
  Manifest(const ConfigBundle& config, const std::string& out_dir)
      : out_dir_(out_dir), t0_(std::chrono::steady_clock::now()) {
    j_["version"] = kVersion;
    j_["master_seed"] = config.cfg.seed;
    j_["config_snapshot"] = config.raw_json;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
  }

  std::string path(const std::string& name) { return (fs::path(out_dir_) / name).string(); }

  void add_output(const std::string& stage, const std::string& file_path) {
    j_["outputs"][stage] = file_path;
  }

  void stage_done(const std::string& stage) {
    auto now = std::chrono::steady_clock::now();
    j_["timings_ms"][stage] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now - t0_).count();
  }

  void write() {
    // Verify the manifest contract: every listed output exists.
    if (j_.contains("outputs"))
      for (const auto& [stage, p] : j_["outputs"].items())
        require(fs::exists(p.get<std::string>()), Errc::io_error,
                "manifest: missing output " + p.get<std::string>());
    write_text_file(path("manifest.json"), j_.dump(2));
  }

 private:
  std::string out_dir_;
  json j_;
  std::chrono::steady_clock::time_point t0_;
};

DensityMatrix lossy_state(const ExperimentConfig& cfg) {
  return apply_losses(build_hybrid_state(cfg), cfg);
}

}  // namespace

std::string ModelReport::to_json() const {
  json j;
  j["negativity"] = {{"ideal_cat", negativity_ideal},
                     {"squeezed_approx", negativity_squeezed},
                     {"configured_tier", negativity_configured_tier}};
  j["tier_fidelity"] = tier_fidelity;
  j["alice_multiphoton_weight"] = alice_multiphoton_weight;
  j["truncation_tail"] = truncation_tail;
  return j.dump(2);
}

ModelReport run_model(const ConfigBundle& config, const std::string& out_dir) {
  const ExperimentConfig& cfg = config.cfg;
  cfg.validate();
  Manifest manifest(config, out_dir);

  ModelReport rep;
  ExperimentConfig ideal = cfg;
  ideal.tier = ModelTier::IdealCat;
  ExperimentConfig sq = cfg;
  sq.tier = ModelTier::SqueezedApprox;

  StateVector psi_ideal = build_hybrid_vector(ideal);
  StateVector psi_sq = build_hybrid_vector(sq);
  DensityMatrix rho_ideal = apply_losses(DensityMatrix::pure(psi_ideal), cfg);
  DensityMatrix rho_sq = apply_losses(DensityMatrix::pure(psi_sq), cfg);

  rep.negativity_ideal = negativity(rho_ideal);
  rep.negativity_squeezed = negativity(rho_sq);
  rep.negativity_configured_tier =
      cfg.tier == ModelTier::IdealCat ? rep.negativity_ideal : rep.negativity_squeezed;
  rep.tier_fidelity = fidelity(rho_ideal, rho_sq);
  rep.truncation_tail =
      std::max(psi_ideal.truncation_tail, psi_sq.truncation_tail);

  DensityMatrix alice =
      partial_trace(cfg.tier == ModelTier::IdealCat ? rho_ideal : rho_sq, 0);
  double w = 0.0;
  for (int n = 2; n < alice.dim(); ++n) w += alice.mat(n, n).real();
  rep.alice_multiphoton_weight = w;

  write_text_file(manifest.path("model_report.json"), rep.to_json());
  manifest.add_output("model", manifest.path("model_report.json"));
  manifest.stage_done("model");
  manifest.write();
  return rep;
}

std::string run_assemblage(const ConfigBundle& config, const std::string& out_dir) {
  const ExperimentConfig& cfg = config.cfg;
  cfg.validate();
  Manifest manifest(config, out_dir);
  Assemblage a = model_assemblage(cfg);
  std::string path = manifest.path("assemblage.json");
  write_text_file(path, assemblage_to_json(a));
  manifest.add_output("assemblage", path);
  manifest.stage_done("assemblage");
  manifest.write();
  return path;
}

SdpResult run_sdp(const std::string& assemblage_path, const std::string& out_dir,
                  const SdpOptions& opt) {
  Assemblage a = assemblage_from_json(read_text_file(assemblage_path));
  SdpResult r = optimal_functional(a, opt);
  if (r.status == SdpStatus::NumericalFailure)
    fail(Errc::numerical_failure,
         "sdp: solver did not reach the required gap (rel gap " +
             std::to_string(r.duality_gap) + ")");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_text_file((fs::path(out_dir) / "sdp_result.json").string(), sdp_result_to_json(r));
  return r;
}

SweepResult run_sweep(const ConfigBundle& config, SweepAxis axis,
                      const std::vector<double>& values, const std::string& out_dir) {
  const ExperimentConfig& cfg = config.cfg;
  cfg.validate();
  Manifest manifest(config, out_dir);
  SdpOptions opt;
  opt.gap_tol = cfg.sdp_gap_tol;
  opt.max_iter = cfg.sdp_max_iter;
  SweepResult r = sweep(cfg, axis, values, opt);
  std::string path = manifest.path("sweep_" + to_string(axis) + ".csv");
  write_text_file(path, sweep_to_csv(r));
  manifest.add_output("sweep", path);
  manifest.stage_done("sweep");
  manifest.write();
  return r;
}

// ---------------------------------------------------------------------------
// Synthetic data generation.
// ---------------------------------------------------------------------------

namespace {

struct TabulatedCdf {
  Eigen::ArrayXd q;    // grid
  Eigen::ArrayXd cdf;  // cumulative trapezoid, cdf(0) = 0

  double sample(double u) const {
    double target = u * cdf(cdf.size() - 1);
    int lo = 0, hi = int(cdf.size()) - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (cdf(mid) <= target)
        lo = mid;
      else
        hi = mid;
    }
    double span = cdf(hi) - cdf(lo);
    double frac = span > 0.0 ? (target - cdf(lo)) / span : 0.5;
    return q(lo) + frac * (q(hi) - q(lo));
  }
};

TabulatedCdf cdf_from_pdf(const Eigen::ArrayXd& q, const Eigen::ArrayXd& pdf) {
  TabulatedCdf t;
  t.q = q;
  t.cdf.resize(q.size());
  t.cdf(0) = 0.0;
  double h = q(1) - q(0);
  Eigen::ArrayXd clipped = pdf.max(0.0);
  for (int i = 1; i < q.size(); ++i)
    t.cdf(i) = t.cdf(i - 1) + 0.5 * h * (clipped(i - 1) + clipped(i));
  return t;
}

// Per-event sampler for the lossy two-mode state. Bob's conditional state
// given Alice's exact quadrature lies in the span of the d_A^2 operators
// <m|rho|n>, so his conditional CDF is the same fixed mixture of
// precomputed per-operator CDF grids for every event.
struct TwoModeSampler {
  int m_A = 0, d_A = 0, n_bob = 0;
  std::vector<double> alice_phases, bob_phase_list;
  std::vector<TabulatedCdf> alice_cdf;  // per alice phase

  Eigen::ArrayXd grid;
  // component_cdf[(m*d_A+n)][bob_phase]: cumulative grids of the real and
  // imaginary parts of the (m,n) conditional component.
  std::vector<std::vector<Eigen::ArrayXd>> comp_cdf_re, comp_cdf_im;

  explicit TwoModeSampler(const ExperimentConfig& cfg) {
    DensityMatrix rho = lossy_state(cfg);
    m_A = cfg.m_A;
    d_A = rho.mode_dims[0];
    int d_B = rho.mode_dims[1];
    alice_phases = cfg.alice_phases();
    bob_phase_list = cfg.bob_phases();
    n_bob = int(bob_phase_list.size());

    const int npts = 1601;
    grid = Eigen::ArrayXd::LinSpaced(npts, -8.0, 8.0);

    DensityMatrix alice = partial_trace(rho, 0);
    for (double th : alice_phases)
      alice_cdf.push_back(cdf_from_pdf(grid, quadrature_pdf(alice, th, grid)));

    // Conditional components after Bob's detection loss.
    std::vector<Eigen::MatrixXcd> comp(d_A * d_A);
    for (int m = 0; m < d_A; ++m)
      for (int n = 0; n < d_A; ++n) {
        DensityMatrix blk;
        blk.mat = rho.mat.block(m * d_B, n * d_B, d_B, d_B);
        blk.mode_dims = {d_B};
        if (cfg.eta_B_det < 1.0) {
          // The attenuation map acts linearly on the block family.
          Eigen::MatrixXcd herm = 0.5 * (blk.mat + blk.mat.adjoint().eval());
          Eigen::MatrixXcd anti = blk.mat - herm;
          DensityMatrix h1{herm, {d_B}}, h2{cxd(0, -1) * anti, {d_B}};
          blk.mat = loss_channel(h1, cfg.eta_B_det, 0).mat +
                    cxd(0, 1) * loss_channel(h2, cfg.eta_B_det, 0).mat;
        }
        comp[m * d_A + n] = blk.mat;
      }

    comp_cdf_re.assign(d_A * d_A, {});
    comp_cdf_im.assign(d_A * d_A, {});
    for (int mn = 0; mn < d_A * d_A; ++mn) {
      comp_cdf_re[mn].resize(n_bob);
      comp_cdf_im[mn].resize(n_bob);
      for (int k = 0; k < n_bob; ++k) {
        Eigen::ArrayXd re(grid.size()), im(grid.size());
        Eigen::VectorXcd ph(comp[mn].rows());
        for (int n = 0; n < ph.size(); ++n)
          ph(n) = std::polar(1.0, -bob_phase_list[k] * n);
        Eigen::MatrixXcd rot = ph.asDiagonal() * comp[mn] * ph.conjugate().asDiagonal();
        for (int i = 0; i < grid.size(); ++i) {
          Eigen::VectorXd psi = quadrature_wavefunctions(int(comp[mn].rows()) - 1, grid(i));
          cxd v = (psi.cast<cxd>().adjoint() * rot * psi.cast<cxd>()).value();
          re(i) = v.real();
          im(i) = v.imag();
        }
        // Cumulative trapezoid of signed components (mixed later, linearly).
        auto cum = [&](const Eigen::ArrayXd& f) {
          Eigen::ArrayXd c(f.size());
          c(0) = 0.0;
          double h = grid(1) - grid(0);
          for (int i = 1; i < f.size(); ++i) c(i) = c(i - 1) + 0.5 * h * (f(i - 1) + f(i));
          return c;
        };
        comp_cdf_re[mn][k] = cum(re);
        comp_cdf_im[mn][k] = cum(im);
      }
    }
  }

  QuadratureRecord event(std::int64_t id, std::uint64_t sim_seed) const {
    SplitMix64 rng(mix_seed(sim_seed, std::uint64_t(id)));
    int t = int(id % m_A);
    double theta = alice_phases[t];

    double qa = alice_cdf[t].sample(rng.uniform());
    int sign = qa >= 0.0 ? +1 : -1;
    int k = int(rng.uniform() * n_bob);
    if (k == n_bob) k = n_bob - 1;

    // Mixture weights c_mn = psi_m(qa) psi_n(qa) e^{i theta (n-m)}.
    Eigen::VectorXd wf = quadrature_wavefunctions(d_A - 1, qa);
    // Mixed conditional CDF evaluated lazily during bisection.
    auto mixed_cdf = [&](int idx) {
      double v = 0.0;
      for (int m = 0; m < d_A; ++m)
        for (int n = 0; n < d_A; ++n) {
          cxd c = wf(m) * wf(n) * std::polar(1.0, theta * (n - m));
          int mn = m * d_A + n;
          v += c.real() * comp_cdf_re[mn][k](idx) - c.imag() * comp_cdf_im[mn][k](idx);
        }
      return v;
    };
    int npts = int(grid.size());
    double total = mixed_cdf(npts - 1);
    double target = rng.uniform() * total;
    int lo = 0, hi = npts - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (mixed_cdf(mid) <= target)
        lo = mid;
      else
        hi = mid;
    }
    double clo = mixed_cdf(lo), chi = mixed_cdf(hi);
    double frac = chi > clo ? (target - clo) / (chi - clo) : 0.5;

    QuadratureRecord rec;
    rec.event_id = id;
    rec.alice_phase_index = t;
    rec.alice_sign = sign;
    rec.bob_phase = bob_phase_list[k];
    rec.bob_q = grid(lo) + frac * (grid(hi) - grid(lo));
    return rec;
  }
};

}  // namespace

std::vector<QuadratureRecord> simulate_records(const ExperimentConfig& cfg) {
  cfg.validate();
  TwoModeSampler sampler(cfg);
  std::uint64_t sim_seed = mix_seed(cfg.seed, "simulate");
  std::int64_t n_events = std::int64_t(cfg.samples_per_phase) * cfg.m_A;
  std::vector<QuadratureRecord> records(n_events);

  // Events are independent (per-event seed split), so chunk across cores.
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::atomic<std::int64_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::int64_t base = next.fetch_add(4096);
      if (base >= n_events) return;
      std::int64_t end = std::min(n_events, base + 4096);
      for (std::int64_t id = base; id < end; ++id)
        records[size_t(id)] = sampler.event(id, sim_seed);
    }
  };
  for (unsigned kk = 1; kk < hw; ++kk) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return records;
}

std::string run_simulate(const ConfigBundle& config, const std::string& out_dir) {
  Manifest manifest(config, out_dir);
  std::vector<QuadratureRecord> records = simulate_records(config.cfg);
  std::string path = manifest.path("records.csv");
  write_text_file(path, records_to_csv(records));
  manifest.add_output("simulate", path);
  manifest.stage_done("simulate");
  manifest.write();
  return path;
}

AnalyzeReport run_analyze(const ConfigBundle& config, const std::string& records_path,
                          const std::string& out_dir) {
  const ExperimentConfig& cfg = config.cfg;
  cfg.validate();
  Manifest manifest(config, out_dir);
  std::vector<QuadratureRecord> records = records_from_csv(read_text_file(records_path));
  require(!records.empty(), Errc::empty_condition, "analyze: no records");

  AnalyzeReport rep;

  // Stage 1: tomographic reconstruction of the assemblage.
  Assemblage assemblage = reconstruct_assemblage(records, cfg);
  write_text_file(manifest.path("assemblage.json"), assemblage_to_json(assemblage));
  manifest.add_output("assemblage", manifest.path("assemblage.json"));
  manifest.stage_done("assemblage");

  // Stage 2: non-signaling check.
  NonsignalingReport ns = nonsignaling_report(assemblage);
  rep.nonsignaling_mean = ns.mean;
  {
    json j;
    j["mean"] = ns.mean;
    j["fidelities"] = json::array();
    for (int i = 0; i < ns.fidelities.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < ns.fidelities.cols(); ++k) row.push_back(ns.fidelities(i, k));
      j["fidelities"].push_back(std::move(row));
    }
    write_text_file(manifest.path("nonsignaling.json"), j.dump(2));
  }
  manifest.add_output("nonsignaling", manifest.path("nonsignaling.json"));
  manifest.stage_done("nonsignaling");

  // Stage 3: optimal steering functional.
  SdpOptions opt;
  opt.gap_tol = cfg.sdp_gap_tol;
  opt.max_iter = cfg.sdp_max_iter;
  rep.sdp = optimal_functional(assemblage, opt);
  if (rep.sdp.status == SdpStatus::NumericalFailure)
    fail(Errc::numerical_failure, "analyze: functional SDP failed to converge");
  write_text_file(manifest.path("sdp_result.json"), sdp_result_to_json(rep.sdp));
  write_text_file(manifest.path("functional.json"),
                  functional_to_json(*rep.sdp.functional));
  manifest.add_output("sdp", manifest.path("sdp_result.json"));
  manifest.add_output("functional", manifest.path("functional.json"));
  manifest.stage_done("sdp");

  // Stage 4: Metropolis-Hastings error bars, one chain per condition.
  BinnedData binned = bin_records(records);
  auto freqs = record_frequencies(records, cfg.m_A);
  std::map<std::pair<int, int>, MhResult> chains;
  {
    std::vector<std::pair<int, int>> keys;
    for (int t = 0; t < cfg.m_A; ++t)
      for (int s = 0; s < 2; ++s) keys.emplace_back(t, s);
    std::vector<MhResult> results(keys.size());
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= keys.size()) return;
        try {
          ChainParams p;
          p.n_retained = cfg.mh_retained;
          p.burn_in = cfg.mh_burn_in;
          p.thin = cfg.mh_thin;
          p.step_size = cfg.mh_step;
          p.seed = mix_seed(mix_seed(cfg.seed, "mh"),
                            std::uint64_t(keys[i].first * 2 + keys[i].second));
          results[i] = mh_sample(binned.conditions.at(keys[i]), cfg.eta_B_det, cfg.n_max_B, p);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    };
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < std::min<size_t>(hw, keys.size()); ++k)
      pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    for (size_t i = 0; i < keys.size(); ++i) chains.emplace(keys[i], std::move(results[i]));
  }
  rep.histogram = violation_histogram(chains, freqs, *rep.sdp.functional,
                                      cfg.mh_s_evaluations, cfg.seed);
  write_text_file(manifest.path("s_values.csv"), s_values_to_csv(rep.histogram.s_values));
  write_text_file(manifest.path("s_summary.json"),
                  violation_summary_to_json(rep.histogram));
  manifest.add_output("s_values", manifest.path("s_values.csv"));
  manifest.add_output("s_summary", manifest.path("s_summary.json"));
  manifest.stage_done("mh");

  // Stage 5: Wigner grids of the 12 conditional states plus the
  // unconditioned state.
  {
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "wigner", ec);
    Eigen::MatrixXcd uncond = Eigen::MatrixXcd::Zero(assemblage.dim(), assemblage.dim());
    for (int t = 0; t < assemblage.n_phases(); ++t)
      uncond += assemblage.unconditioned(t);
    uncond /= uncond.trace().real();
    DensityMatrix u{uncond, {assemblage.dim()}};
    WignerGrid g = wigner_grid(u, -6, 6, 121, -6, 6, 121);
    std::string upath = (fs::path(out_dir) / "wigner" / "unconditioned.csv").string();
    write_text_file(upath, wigner_grid_to_csv(g));
    manifest.add_output("wigner_unconditioned", upath);
    for (int t = 0; t < assemblage.n_phases(); ++t)
      for (int s = 0; s < 2; ++s) {
        Eigen::MatrixXcd mm = assemblage.members[t][s];
        mm /= mm.trace().real();
        DensityMatrix st{mm, {assemblage.dim()}};
        WignerGrid gs = wigner_grid(st, -6, 6, 121, -6, 6, 121);
        std::string name =
            "theta" + std::to_string(t) + (s == 0 ? "_plus" : "_minus") + ".csv";
        std::string p = (fs::path(out_dir) / "wigner" / name).string();
        write_text_file(p, wigner_grid_to_csv(gs));
        manifest.add_output("wigner_" + std::to_string(t) + (s == 0 ? "p" : "m"), p);
      }
  }
  manifest.stage_done("wigner");
  manifest.write();

  rep.outputs["assemblage"] = (fs::path(out_dir) / "assemblage.json").string();
  rep.outputs["nonsignaling"] = (fs::path(out_dir) / "nonsignaling.json").string();
  rep.outputs["sdp"] = (fs::path(out_dir) / "sdp_result.json").string();
  rep.outputs["s_summary"] = (fs::path(out_dir) / "s_summary.json").string();
  return rep;
}

}  // namespace hst
