#pragma once

#include <map>
#include <string>

#include "hybridsteer/io.hpp"

// Workflow layer behind the CLI: each stage consumes an ExperimentConfig,
// writes its machine-readable outputs into a directory and appends a run
// manifest (config snapshot, version, seed, output paths, timings).

namespace hst {

inline constexpr const char* kVersion = "0.1.0";

/// Parsed config plus the byte-exact text it came from (kept for manifests).
struct ConfigBundle {
  ExperimentConfig cfg;
  std::string raw_json;

  static ConfigBundle from_json(const std::string& json_text) {
    return ConfigBundle{config_from_json(json_text), json_text};
  }
  static ConfigBundle defaults() {
    ExperimentConfig cfg;
    return ConfigBundle{cfg, config_to_json(cfg)};
  }
};

struct ModelReport {
  double negativity_ideal = 0.0;
  double negativity_squeezed = 0.0;
  double negativity_configured_tier = 0.0;
  double tier_fidelity = 0.0;           // F between the lossy two-mode states of both tiers
  double alice_multiphoton_weight = 0.0;  // population at n >= 2 on the DV mode
  double truncation_tail = 0.0;
  std::string to_json() const;
};

ModelReport run_model(const ConfigBundle& config, const std::string& out_dir);

/// Writes the modeled assemblage JSON; returns the output path.
std::string run_assemblage(const ConfigBundle& config, const std::string& out_dir);

/// Optimal-functional SDP on a stored assemblage (certificate re-checked).
SdpResult run_sdp(const std::string& assemblage_path, const std::string& out_dir,
                  const SdpOptions& opt = {});

SweepResult run_sweep(const ConfigBundle& config, SweepAxis axis,
                      const std::vector<double>& values, const std::string& out_dir);

/// Synthetic heralded runs: Alice phases cycle over the grid; her quadrature
/// is drawn from the marginal, sign-binned, the state collapses, and Bob
/// samples at a random tomography phase after detection loss eta_B_det.
std::vector<QuadratureRecord> simulate_records(const ExperimentConfig& cfg);
std::string run_simulate(const ConfigBundle& config, const std::string& out_dir);

struct AnalyzeReport {
  double nonsignaling_mean = 0.0;
  SdpResult sdp;
  ViolationHistogram histogram;
  std::map<std::string, std::string> outputs;
};

AnalyzeReport run_analyze(const ConfigBundle& config, const std::string& records_path,
                          const std::string& out_dir);

}  // namespace hst
