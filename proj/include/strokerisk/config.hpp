#ifndef STROKERISK_CONFIG_HPP
#define STROKERISK_CONFIG_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/evaluation.hpp"
#include "strokerisk/logit.hpp"
#include "strokerisk/synth.hpp"
#include "strokerisk/tree.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace strokerisk {

using Json = nlohmann::json;

/// Two-space indented dump with a trailing newline. Doubles use the shortest
/// text that parses back to the same value.
std::string dump_json(const Json& value);
Json parse_json(std::string_view text, const std::string& origin);
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Each from_json overlays the keys present in `j` onto `base` and rejects
// unknown keys.

Json to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const Json& j);

Json to_json(const CleanseConfig& c);
CleanseConfig cleanse_config_from_json(const Json& j, CleanseConfig base = {});

Json to_json(const CsppConfig& c);
CsppConfig cspp_config_from_json(const Json& j, CsppConfig base = {});

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

Json to_json(const LogitOptions& o);
LogitOptions logit_options_from_json(const Json& j, LogitOptions base = {});

Json to_json(const SweepConfig& c);
SweepConfig sweep_config_from_json(const Json& j, SweepConfig base = {});

Json to_json(const CalibrationTargets& t);
CalibrationTargets calibration_targets_from_json(const Json& j, CalibrationTargets base = CalibrationTargets::defaults());

struct LogitSettings {
  LogitOptions options;
  /// Model features; empty means every remaining column after selection.
  std::vector<std::string> features;
  double variance_threshold = 0.0;
};

/// The adjusted-model feature set: the eighteen predictors of the published
/// table plus History of TIA.
std::vector<std::string> default_logit_features();

struct RfeSettings {
  std::vector<std::string> features;  // empty: every column
  std::size_t target_features = 1;
  double plateau_tolerance = 0.03;
};

/// Everything a CLI run can be configured with. Every section is optional in
/// the file.
struct RunConfig {
  FeatureSchema schema = FeatureSchema::stroke_survey();
  CsvColumns csv;
  CleanseConfig cleanse;
  CsppConfig cspp;
  TrainConfig train;
  double test_fraction = 0.2;
  LogitSettings logit{{}, default_logit_features(), 0.0};
  SweepConfig sweep;
  RfeSettings rfe;
  int permutation_repetitions = 10;
  /// Rows kept with a logistic model for interventional SHAP.
  std::size_t background_rows = 100;
  CalibrationTargets synth = CalibrationTargets::defaults();
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace strokerisk

#endif  // STROKERISK_CONFIG_HPP
