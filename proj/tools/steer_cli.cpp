// Command-line front end. Talks to the engine exclusively through the
// C API in hybridsteer.h.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybridsteer.h"

namespace {

struct ConfigHandle {
  hst_config* ptr = nullptr;
  ~ConfigHandle() { hst_config_free(ptr); }
};

int fail_with(int code) {
  std::fprintf(stderr, "error: %s\n", hst_last_error());
  return code;
}

int load_config(const std::string& path, const std::vector<std::string>& overrides,
                ConfigHandle& out) {
  int rc = path.empty() ? hst_config_default(&out.ptr) : hst_config_load(path.c_str(), &out.ptr);
  if (rc != HST_OK) return rc;
  for (const auto& kv : overrides) {
    rc = hst_config_override(out.ptr, kv.c_str());
    if (rc != HST_OK) return rc;
  }
  return HST_OK;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid CV-DV steering simulator and certification engine"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", records_path, assemblage_path, axis, values_csv;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* cmd, bool with_config = true) {
    if (with_config) {
      cmd->add_option("--config", config_path, "JSON config file (defaults when omitted)");
      cmd->add_option("--override", overrides,
                      "key=value config override (repeatable, dotted keys)");
    }
    cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
  };

  CLI::App* model = app.add_subcommand("model", "negativity and tier diagnostics");
  add_common(model);
  CLI::App* assemblage = app.add_subcommand("assemblage", "modeled assemblage JSON");
  add_common(assemblage);
  CLI::App* sdp = app.add_subcommand("sdp", "optimal steering functional for an assemblage");
  sdp->add_option("--assemblage", assemblage_path, "assemblage JSON path")->required();
  add_common(sdp, false);
  CLI::App* sweep = app.add_subcommand("sweep", "S_min across a parameter axis");
  add_common(sweep);
  sweep->add_option("--axis", axis, "m_A | R | eta_A")->required();
  sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
  CLI::App* simulate = app.add_subcommand("simulate", "synthetic quadrature records CSV");
  add_common(simulate);
  CLI::App* analyze =
      app.add_subcommand("analyze", "reconstruction, SDP and error bars from records");
  add_common(analyze);
  analyze->add_option("--records", records_path, "records CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  ConfigHandle cfg;
  int rc = HST_OK;

  if (model->parsed() || assemblage->parsed() || sweep->parsed() || simulate->parsed() ||
      analyze->parsed()) {
    rc = load_config(config_path, overrides, cfg);
    if (rc != HST_OK) return fail_with(rc);
  }

  if (model->parsed()) {
    rc = hst_run_model(cfg.ptr, out_dir.c_str());
  } else if (assemblage->parsed()) {
    rc = hst_run_assemblage(cfg.ptr, out_dir.c_str());
  } else if (sdp->parsed()) {
    rc = hst_run_sdp_file(assemblage_path.c_str(), out_dir.c_str());
  } else if (sweep->parsed()) {
    std::vector<double> values = parse_values(values_csv);
    if (values.empty()) {
      std::fprintf(stderr, "error: --values is empty\n");
      return HST_ERR_CONFIG;
    }
    rc = hst_run_sweep(cfg.ptr, axis.c_str(), values.data(), int(values.size()),
                       out_dir.c_str());
  } else if (simulate->parsed()) {
    rc = hst_run_simulate(cfg.ptr, out_dir.c_str());
  } else if (analyze->parsed()) {
    rc = hst_run_analyze(cfg.ptr, records_path.c_str(), out_dir.c_str());
  }

  if (rc != HST_OK) return fail_with(rc);
  std::printf("ok: outputs in %s\n", out_dir.c_str());
  return 0;
}
