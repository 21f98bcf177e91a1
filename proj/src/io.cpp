#include "hybridsteer/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hst {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), Errc::io_error, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), Errc::io_error, "read failure: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(bool(out), Errc::io_error, "cannot open for writing: " + path);
  out << content;
  out.flush();
  require(bool(out), Errc::io_error, "write failure: " + path);
}

namespace {

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  require(!j.is_discarded(), Errc::io_error, std::string("malformed JSON in ") + what);
  return j;
}

json matrix_to_jobj(const Eigen::MatrixXcd& m, const std::vector<int>& dims) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"mode_dims", dims}, {"re", std::move(re)}, {"im", std::move(im)}};
}

std::pair<Eigen::MatrixXcd, std::vector<int>> matrix_from_jobj(const json& j) {
  require(j.contains("mode_dims") && j.contains("re") && j.contains("im"), Errc::io_error,
          "matrix JSON: missing keys");
  std::vector<int> dims = j.at("mode_dims").get<std::vector<int>>();
  const json& re = j.at("re");
  const json& im = j.at("im");
  int n = int(re.size());
  require(n > 0 && int(im.size()) == n, Errc::io_error, "matrix JSON: bad row count");
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    require(int(re[i].size()) == n && int(im[i].size()) == n, Errc::io_error,
            "matrix JSON: ragged rows");
    for (int k = 0; k < n; ++k)
      m(i, k) = cxd(re[i][k].get<double>(), im[i][k].get<double>());
  }
  long prod = 1;
  for (int d : dims) prod *= d;
  require(prod == n, Errc::io_error, "matrix JSON: mode_dims do not match size");
  return {std::move(m), std::move(dims)};
}

}  // namespace

std::string density_matrix_to_json(const DensityMatrix& rho) {
  return matrix_to_jobj(rho.mat, rho.mode_dims).dump(2);
}

DensityMatrix density_matrix_from_json(const std::string& text) {
  auto [m, dims] = matrix_from_jobj(parse(text, "density matrix"));
  DensityMatrix rho;
  rho.mat = std::move(m);
  rho.mode_dims = std::move(dims);
  return rho;
}

namespace {

json assemblage_like_to_jobj(const std::vector<double>& phases,
                             const std::vector<std::array<Eigen::MatrixXcd, 2>>& members,
                             int dim) {
  json j;
  j["phases_rad"] = phases;
  json ms = json::array();
  for (size_t t = 0; t < members.size(); ++t)
    for (int s = 0; s < 2; ++s) {
      json e;
      e["theta_index"] = int(t);
      e["sign"] = s == 0 ? 1 : -1;
      e["matrix"] = matrix_to_jobj(members[t][s], {dim});
      ms.push_back(std::move(e));
    }
  j["members"] = std::move(ms);
  return j;
}

void assemblage_like_from_jobj(const json& j, std::vector<double>& phases,
                               std::vector<std::array<Eigen::MatrixXcd, 2>>& members) {
  require(j.contains("phases_rad") && j.contains("members"), Errc::io_error,
          "assemblage JSON: missing keys");
  phases = j.at("phases_rad").get<std::vector<double>>();
  members.assign(phases.size(), {});
  std::vector<std::array<bool, 2>> seen(phases.size(), {false, false});
  for (const json& e : j.at("members")) {
    int t = e.at("theta_index").get<int>();
    int sign = e.at("sign").get<int>();
    require(t >= 0 && t < int(phases.size()) && (sign == 1 || sign == -1), Errc::io_error,
            "assemblage JSON: bad member index");
    auto [m, dims] = matrix_from_jobj(e.at("matrix"));
    members[t][sign == 1 ? 0 : 1] = std::move(m);
    seen[t][sign == 1 ? 0 : 1] = true;
  }
  for (const auto& st : seen)
    require(st[0] && st[1], Errc::io_error, "assemblage JSON: missing members");
}

}  // namespace

std::string assemblage_to_json(const Assemblage& a) {
  return assemblage_like_to_jobj(a.phases, a.members, a.dim()).dump(2);
}

Assemblage assemblage_from_json(const std::string& text) {
  Assemblage a;
  assemblage_like_from_jobj(parse(text, "assemblage"), a.phases, a.members);
  return a;
}

std::string functional_to_json(const SteeringFunctional& f) {
  json j = assemblage_like_to_jobj(f.phases, f.ops, f.dim());
  j["normalization_tag"] = f.normalization_tag;
  return j.dump(2);
}

SteeringFunctional functional_from_json(const std::string& text) {
  json j = parse(text, "functional");
  SteeringFunctional f;
  assemblage_like_from_jobj(j, f.phases, f.ops);
  if (j.contains("normalization_tag")) f.normalization_tag = j.at("normalization_tag");
  return f;
}

std::string sdp_result_to_json(const SdpResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["objective"] = r.objective;
  j["duality_gap"] = r.duality_gap;
  j["iterations"] = r.iterations;
  j["dim"] = r.dim;
  j["lhs_member"] = r.lhs_member;
  j["signaling_correction"] = r.signaling_correction;
  if (r.functional) j["functional"] = json::parse(functional_to_json(*r.functional));
  if (!r.lhs_decomposition.empty()) {
    json d = json::array();
    for (const auto& m : r.lhs_decomposition)
      d.push_back(matrix_to_jobj(m, {int(m.rows())}));
    j["lhs_decomposition"] = std::move(d);
  }
  return j.dump(2);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.alpha.imag() == 0.0)
    j["alpha"] = cfg.alpha.real();
  else
    j["alpha"] = {cfg.alpha.real(), cfg.alpha.imag()};
  j["squeezing_db"] = cfg.squeezing_db;
  j["R"] = cfg.R;
  j["eta_A"] = cfg.eta_A;
  j["eta_B_channel"] = cfg.eta_B_channel;
  j["eta_B_det"] = cfg.eta_B_det;
  j["n_max_A"] = cfg.n_max_A;
  j["n_max_B"] = cfg.n_max_B;
  j["m_A"] = cfg.m_A;
  j["phase_noise_deg"] = cfg.phase_noise_sigma * 180.0 / kPi;
  j["samples_per_phase"] = cfg.samples_per_phase;
  j["seed"] = cfg.seed;
  j["model_tier"] = to_string(cfg.tier);
  j["tail_tol"] = cfg.tail_tol;
  j["n_bob_phases"] = cfg.n_bob_phases;
  j["mh"] = {{"retained", cfg.mh_retained},
             {"burn_in", cfg.mh_burn_in},
             {"thin", cfg.mh_thin},
             {"step_size", cfg.mh_step},
             {"s_evaluations", cfg.mh_s_evaluations}};
  j["sdp"] = {{"gap_tol", cfg.sdp_gap_tol}, {"max_iter", cfg.sdp_max_iter}};
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = parse(text, "config");
  require(j.is_object(), Errc::config_invalid, "config: expected a JSON object");
  ExperimentConfig cfg;
  try {
    if (j.contains("alpha")) {
      if (j["alpha"].is_array())
        cfg.alpha = cxd(j["alpha"].at(0).get<double>(), j["alpha"].at(1).get<double>());
      else
        cfg.alpha = j["alpha"].get<double>();
    }
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("squeezing_db", cfg.squeezing_db);
    get("R", cfg.R);
    get("eta_A", cfg.eta_A);
    get("eta_B_channel", cfg.eta_B_channel);
    get("eta_B_det", cfg.eta_B_det);
    get("n_max_A", cfg.n_max_A);
    get("n_max_B", cfg.n_max_B);
    get("m_A", cfg.m_A);
    if (j.contains("phase_noise_deg"))
      cfg.phase_noise_sigma = j.at("phase_noise_deg").get<double>() * kPi / 180.0;
    get("samples_per_phase", cfg.samples_per_phase);
    get("seed", cfg.seed);
    if (j.contains("model_tier"))
      cfg.tier = model_tier_from_string(j.at("model_tier").get<std::string>());
    get("tail_tol", cfg.tail_tol);
    get("n_bob_phases", cfg.n_bob_phases);
    if (j.contains("mh")) {
      const json& m = j.at("mh");
      if (m.contains("retained")) cfg.mh_retained = m.at("retained").get<int>();
      if (m.contains("burn_in")) cfg.mh_burn_in = m.at("burn_in").get<int>();
      if (m.contains("thin")) cfg.mh_thin = m.at("thin").get<int>();
      if (m.contains("step_size")) cfg.mh_step = m.at("step_size").get<double>();
      if (m.contains("s_evaluations"))
        cfg.mh_s_evaluations = m.at("s_evaluations").get<long>();
    }
    if (j.contains("sdp")) {
      const json& s = j.at("sdp");
      if (s.contains("gap_tol")) cfg.sdp_gap_tol = s.at("gap_tol").get<double>();
      if (s.contains("max_iter")) cfg.sdp_max_iter = s.at("max_iter").get<int>();
    }
  } catch (const json::exception& e) {
    fail(Errc::config_invalid, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_override_json(const std::string& text, const std::string& key_value) {
  auto eq = key_value.find('=');
  require(eq != std::string::npos && eq > 0, Errc::config_invalid,
          "override: expected key=value, got '" + key_value + "'");
  std::string key = key_value.substr(0, eq);
  std::string value = key_value.substr(eq + 1);
  json j = parse(text, "config");
  json* cursor = &j;
  size_t pos = 0;
  for (;;) {
    size_t dot = key.find('.', pos);
    std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    require(!part.empty(), Errc::config_invalid, "override: empty key component");
    if (dot == std::string::npos) {
      json v = json::parse(value, nullptr, false);
      (*cursor)[part] = v.is_discarded() ? json(value) : v;
      break;
    }
    cursor = &((*cursor)[part]);
    pos = dot + 1;
  }
  return j.dump(2);
}

std::string records_to_csv(const std::vector<QuadratureRecord>& records) {
  std::ostringstream out;
  out << "event_id,alice_phase_index,alice_sign,bob_phase_rad,bob_q\n";
  out.precision(17);
  for (const auto& r : records)
    out << r.event_id << ',' << r.alice_phase_index << ',' << (r.alice_sign > 0 ? 1 : -1)
        << ',' << r.bob_phase << ',' << r.bob_q << '\n';
  return out.str();
}

std::vector<QuadratureRecord> records_from_csv(const std::string& csv) {
  std::vector<QuadratureRecord> out;
  std::istringstream in(csv);
  std::string line;
  require(bool(std::getline(in, line)), Errc::io_error, "records CSV: empty file");
  require(line.rfind("event_id,", 0) == 0, Errc::io_error, "records CSV: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    QuadratureRecord r;
    std::istringstream ls(line);
    std::string tok;
    auto next = [&](const char* what) {
      require(bool(std::getline(ls, tok, ',')), Errc::io_error,
              std::string("records CSV: missing field ") + what);
      return tok;
    };
    r.event_id = std::stoll(next("event_id"));
    r.alice_phase_index = std::stoi(next("alice_phase_index"));
    r.alice_sign = std::stoi(next("alice_sign")) >= 0 ? 1 : -1;
    r.bob_phase = std::stod(next("bob_phase_rad"));
    r.bob_q = std::stod(next("bob_q"));
    out.push_back(r);
  }
  return out;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "axis_value,S_min,status,gap,dim\n";
  out.precision(12);
  for (const auto& p : sweep.points)
    out << p.value << ',' << p.s_min << ',' << to_string(p.status) << ',' << p.gap << ','
        << p.dim << '\n';
  return out.str();
}

std::string wigner_grid_to_csv(const WignerGrid& grid) {
  std::ostringstream out;
  out << "x,p,w\n";
  out.precision(12);
  for (int i = 0; i < grid.xs.size(); ++i)
    for (int j = 0; j < grid.ps.size(); ++j)
      out << grid.xs(i) << ',' << grid.ps(j) << ',' << grid.values(i, j) << '\n';
  return out.str();
}

std::string s_values_to_csv(const std::vector<double>& s_values) {
  std::ostringstream out;
  out << "s_value\n";
  out.precision(17);
  for (double s : s_values) out << s << '\n';
  return out.str();
}

std::string violation_summary_to_json(const ViolationHistogram& h) {
  json j;
  j["mean"] = h.mean;
  j["std"] = h.stddev;
  j["separation_sigmas"] = h.separation_sigmas;
  j["n"] = h.s_values.size();
  return j.dump(2);
}

}  // namespace hst
