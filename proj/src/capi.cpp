#include "hybridsteer.h"

#include <cstring>
#include <string>

#include "hybridsteer/pipeline.hpp"

// Opaque handle definitions. Every entry point translates exceptions into
// status codes and stashes the message in a thread-local slot.

struct hst_config {
  hst::ConfigBundle bundle;
};

struct hst_assemblage {
  hst::Assemblage assemblage;
};

struct hst_sdp_result {
  hst::SdpResult result;
};

namespace {

thread_local std::string g_last_error;

int code_of(const hst::Error& e) { return e.exit_code(); }

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HST_OK;
  } catch (const hst::Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HST_ERR_CONFIG;
  } catch (...) {
    g_last_error = "unknown error";
    return HST_ERR_CONFIG;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hst::SdpOptions options_default() { return {}; }

}  // namespace

extern "C" {

const char* hst_version(void) { return hst::kVersion; }

const char* hst_last_error(void) { return g_last_error.c_str(); }

void hst_string_free(char* s) { std::free(s); }

int hst_config_default(hst_config** out) {
  return guarded([&] { *out = new hst_config{hst::ConfigBundle::defaults()}; });
}

int hst_config_parse(const char* json_text, hst_config** out) {
  return guarded([&] {
    hst::require(json_text && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_config{hst::ConfigBundle::from_json(json_text)};
  });
}

int hst_config_load(const char* path, hst_config** out) {
  return guarded([&] {
    hst::require(path && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_config{hst::ConfigBundle::from_json(hst::read_text_file(path))};
  });
}

int hst_config_override(hst_config* cfg, const char* key_value) {
  return guarded([&] {
    hst::require(cfg && key_value, hst::Errc::config_invalid, "null argument");
    std::string updated = hst::config_override_json(cfg->bundle.raw_json, key_value);
    cfg->bundle = hst::ConfigBundle::from_json(updated);
  });
}

int hst_config_to_json(const hst_config* cfg, char** json_out) {
  return guarded([&] {
    hst::require(cfg && json_out, hst::Errc::config_invalid, "null argument");
    *json_out = dup_string(cfg->bundle.raw_json);
    hst::require(*json_out != nullptr, hst::Errc::io_error, "allocation failure");
  });
}

void hst_config_free(hst_config* cfg) { delete cfg; }

int hst_assemblage_compute(const hst_config* cfg, hst_assemblage** out) {
  return guarded([&] {
    hst::require(cfg && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_assemblage{hst::model_assemblage(cfg->bundle.cfg)};
  });
}

int hst_assemblage_load(const char* path, hst_assemblage** out) {
  return guarded([&] {
    hst::require(path && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_assemblage{hst::assemblage_from_json(hst::read_text_file(path))};
  });
}

int hst_assemblage_save(const hst_assemblage* a, const char* path) {
  return guarded([&] {
    hst::require(a && path, hst::Errc::config_invalid, "null argument");
    hst::write_text_file(path, hst::assemblage_to_json(a->assemblage));
  });
}

int hst_assemblage_n_phases(const hst_assemblage* a) {
  return a ? a->assemblage.n_phases() : 0;
}

int hst_assemblage_dim(const hst_assemblage* a) { return a ? a->assemblage.dim() : 0; }

int hst_assemblage_nonsignaling_mean(const hst_assemblage* a, double* out) {
  return guarded([&] {
    hst::require(a && out, hst::Errc::config_invalid, "null argument");
    *out = hst::nonsignaling_report(a->assemblage).mean;
  });
}

void hst_assemblage_free(hst_assemblage* a) { delete a; }

int hst_sdp_optimal_functional(const hst_assemblage* a, hst_sdp_result** out) {
  return guarded([&] {
    hst::require(a && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_sdp_result{hst::optimal_functional(a->assemblage, options_default())};
  });
}

int hst_sdp_lhs_membership(const hst_assemblage* a, hst_sdp_result** out) {
  return guarded([&] {
    hst::require(a && out, hst::Errc::config_invalid, "null argument");
    *out = new hst_sdp_result{hst::lhs_membership(a->assemblage, options_default())};
  });
}

int hst_sdp_status(const hst_sdp_result* r) {
  if (!r) return 2;
  switch (r->result.status) {
    case hst::SdpStatus::Optimal: return 0;
    case hst::SdpStatus::Infeasible: return 1;
    default: return 2;
  }
}

double hst_sdp_objective(const hst_sdp_result* r) { return r ? r->result.objective : 0.0; }

double hst_sdp_gap(const hst_sdp_result* r) { return r ? r->result.duality_gap : 1.0; }

int hst_sdp_dim(const hst_sdp_result* r) { return r ? r->result.dim : 0; }

int hst_sdp_is_lhs_member(const hst_sdp_result* r) {
  return r && r->result.lhs_member ? 1 : 0;
}

int hst_sdp_save(const hst_sdp_result* r, const char* path) {
  return guarded([&] {
    hst::require(r && path, hst::Errc::config_invalid, "null argument");
    hst::write_text_file(path, hst::sdp_result_to_json(r->result));
  });
}

void hst_sdp_result_free(hst_sdp_result* r) { delete r; }

int hst_run_model(const hst_config* cfg, const char* out_dir) {
  return guarded([&] {
    hst::require(cfg && out_dir, hst::Errc::config_invalid, "null argument");
    hst::run_model(cfg->bundle, out_dir);
  });
}

int hst_run_assemblage(const hst_config* cfg, const char* out_dir) {
  return guarded([&] {
    hst::require(cfg && out_dir, hst::Errc::config_invalid, "null argument");
    hst::run_assemblage(cfg->bundle, out_dir);
  });
}

int hst_run_sdp_file(const char* assemblage_path, const char* out_dir) {
  return guarded([&] {
    hst::require(assemblage_path && out_dir, hst::Errc::config_invalid, "null argument");
    hst::run_sdp(assemblage_path, out_dir);
  });
}

int hst_run_sweep(const hst_config* cfg, const char* axis, const double* values, int n_values,
                  const char* out_dir) {
  return guarded([&] {
    hst::require(cfg && axis && values && out_dir && n_values > 0, hst::Errc::config_invalid,
                 "bad sweep arguments");
    std::vector<double> v(values, values + n_values);
    hst::run_sweep(cfg->bundle, hst::sweep_axis_from_string(axis), v, out_dir);
  });
}

int hst_run_simulate(const hst_config* cfg, const char* out_dir) {
  return guarded([&] {
    hst::require(cfg && out_dir, hst::Errc::config_invalid, "null argument");
    hst::run_simulate(cfg->bundle, out_dir);
  });
}

int hst_run_analyze(const hst_config* cfg, const char* records_path, const char* out_dir) {
  return guarded([&] {
    hst::require(cfg && records_path && out_dir, hst::Errc::config_invalid, "null argument");
    hst::run_analyze(cfg->bundle, records_path, out_dir);
  });
}

}  // extern "C"
