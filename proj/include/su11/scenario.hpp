#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "su11/fdoct.hpp"
#include "su11/gain.hpp"
#include "su11/interferometer.hpp"
#include "su11/optics.hpp"
#include "su11/samples.hpp"

namespace su11 {

struct ReconstructionSettings {
  DepthOptions depth;
  double exclude_dc_radius = 0.0;
  double min_height_frac = 0.1;
};

struct VisibilitySettings {
  std::vector<double> r_i;   // |r_i| values for the curve
  std::vector<double> gains; // G values; both passes equal
  std::optional<std::pair<double, double>> band;
};

/// Parsed and validated scenario. Dispersion is already calibrated when requested.
struct Scenario {
  std::string name;
  nlohmann::json doc;
  OpticsConfig optics;
  GainParams gain1{0.0, 1e-3};
  GainParams gain2{0.0, 1e-3};
  FrequencyGrid grid{1.0, 1.0, 3};
  ArmGeometry geometry;
  double balanced_delta_z = 0.0;
  /// Path difference measured from the balanced point, or from z_s = z_i when geometric.
  double delta_z = 0.0;
  bool geometric_reference = false;
  std::optional<Sample> sample;
  std::optional<SpectrometerModel> detector;
  bool rolloff_compensation = false;
  ReconstructionSettings reconstruction;
  VisibilitySettings visibility;
  std::vector<std::string> outputs;
};

Scenario load_scenario(const nlohmann::json& doc);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct RunReport {
  std::string name;
  std::map<std::string, std::string> files; // output name -> path relative to out_dir
  nlohmann::json summary;
  std::string config_hash;
};

/// Runs the stages implied by `outputs`, writes the artifacts and report.json.
RunReport run_scenario(const Scenario& scenario, const RunOptions& opts);
nlohmann::json read_scenario_file(const std::filesystem::path& path);

/// One run per value of the leaf at `field` (dotted path), concurrently up to opts.jobs.
/// Writes <out>/<k>/... per point and <out>/sweep.csv.
std::vector<RunReport> sweep(const nlohmann::json& doc, const std::string& field,
                             const std::vector<nlohmann::json>& values, const RunOptions& opts);

/// Comma list into JSON leaves: numbers stay numbers, anything else (e.g. "150um") is a string.
std::vector<nlohmann::json> parse_value_list(const std::string& csv);

std::string config_hash(const nlohmann::json& doc);
nlohmann::json report_to_json(const RunReport& r);

} // namespace su11
