#pragma once

#include <string>
#include <vector>

#include "hybridsteer/assemblage.hpp"
#include "hybridsteer/sdp.hpp"
#include "hybridsteer/tomography.hpp"

// File formats:
//   DensityMatrix JSON   {"mode_dims": [...], "re": [[...]], "im": [[...]]}  (row-major)
//   Assemblage JSON      {"phases_rad": [...], "members": [{"theta_index", "sign", "matrix"}]}
//   Functional JSON      assemblage schema plus "normalization_tag"
//   Records CSV          event_id,alice_phase_index,alice_sign,bob_phase_rad,bob_q
//   Sweep CSV            axis_value,S_min,status,gap,dim
//   Wigner CSV           x,p,w
//   Config JSON          all angles in degrees (converted to radians internally)

namespace hst {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string density_matrix_to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const std::string& json);

std::string assemblage_to_json(const Assemblage& a);
Assemblage assemblage_from_json(const std::string& json);

std::string functional_to_json(const SteeringFunctional& f);
SteeringFunctional functional_from_json(const std::string& json);

std::string sdp_result_to_json(const SdpResult& r);

/// Serialized with angles in degrees; alpha as a number or [re, im] pair.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& json);

/// Apply one "key=value" override (dotted keys address nested objects,
/// e.g. "mh.thin=2"); returns the updated JSON text.
std::string config_override_json(const std::string& json, const std::string& key_value);

std::string records_to_csv(const std::vector<QuadratureRecord>& records);
std::vector<QuadratureRecord> records_from_csv(const std::string& csv);

std::string sweep_to_csv(const SweepResult& sweep);

std::string wigner_grid_to_csv(const WignerGrid& grid);

std::string s_values_to_csv(const std::vector<double>& s_values);
std::string violation_summary_to_json(const ViolationHistogram& h);

}  // namespace hst
