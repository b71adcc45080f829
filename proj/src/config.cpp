#include "strokerisk/config.hpp"

#include "strokerisk/error.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace strokerisk {

namespace {

void check_object(const Json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, std::string(section) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::Parse, std::string(section) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const Json& j, std::string_view section, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Parse, std::string(section) + "." + key + ": wrong type");
  }
}

std::string_view kind_name(FeatureKind kind) {
  return kind == FeatureKind::Categorical ? "categorical" : "numerical";
}

Json to_json(const TruncatedNormal& d) { return Json::array({d.mean, d.sd, d.lo, d.hi}); }

TruncatedNormal truncated_normal_from_json(const Json& j, std::string_view section) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorKind::Parse, std::string(section) + ": expected [mean, sd, lo, hi]");
  }
  try {
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Parse, std::string(section) + ": expected numbers");
  }
}

}  // namespace

std::string dump_json(const Json& value) { return value.dump(2) + "\n"; }

Json parse_json(std::string_view text, const std::string& origin) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, origin + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json read_json_file(const std::filesystem::path& path) { return parse_json(read_text_file(path), path.string()); }

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

Json to_json(const FeatureSchema& schema) {
  Json features = Json::array();
  for (const auto& f : schema.features()) {
    Json item{{"name", f.name}, {"kind", kind_name(f.kind)}};
    if (!f.unit.empty()) item["unit"] = f.unit;
    if (f.valid_range) item["range"] = Json::array({f.valid_range->min, f.valid_range->max});
    if (f.kind == FeatureKind::Categorical) item["categories"] = f.category_count;
    features.push_back(std::move(item));
  }
  return Json{{"features", std::move(features)}};
}

FeatureSchema schema_from_json(const Json& j) {
  check_object(j, "schema", {"features"});
  const auto it = j.find("features");
  if (it == j.end() || !it->is_array()) throw Error(ErrorKind::Parse, "schema: 'features' must be an array");
  std::vector<FeatureSpec> specs;
  for (const auto& item : *it) {
    check_object(item, "schema feature", {"name", "kind", "unit", "range", "categories"});
    FeatureSpec spec;
    std::string kind = "numerical";
    read(item, "schema feature", "name", spec.name);
    read(item, "schema feature", "kind", kind);
    read(item, "schema feature", "unit", spec.unit);
    if (spec.name.empty()) throw Error(ErrorKind::Parse, "schema feature: missing name");
    if (kind == "categorical") {
      spec.kind = FeatureKind::Categorical;
      read(item, "schema feature", "categories", spec.category_count);
      if (spec.category_count < 1) {
        throw Error(ErrorKind::Parse, "schema feature '" + spec.name + "': categories must be >= 1");
      }
    } else if (kind == "numerical") {
      spec.kind = FeatureKind::Numerical;
    } else {
      throw Error(ErrorKind::Parse, "schema feature '" + spec.name + "': unknown kind '" + kind + "'");
    }
    if (item.contains("range")) {
      std::vector<double> r;
      read(item, "schema feature", "range", r);
      if (r.size() != 2) throw Error(ErrorKind::Parse, "schema feature '" + spec.name + "': range needs two numbers");
      spec.valid_range = ValueRange{r[0], r[1]};
    }
    specs.push_back(std::move(spec));
  }
  return FeatureSchema(std::move(specs));
}

Json to_json(const CleanseConfig& c) {
  return Json{{"missing_threshold", c.missing_threshold},
              {"correct_blood_pressure", c.correct_blood_pressure},
              {"systolic_column", c.systolic_column},
              {"diastolic_column", c.diastolic_column}};
}

CleanseConfig cleanse_config_from_json(const Json& j, CleanseConfig c) {
  constexpr std::string_view s = "cleanse";
  check_object(j, s, {"missing_threshold", "correct_blood_pressure", "systolic_column", "diastolic_column"});
  read(j, s, "missing_threshold", c.missing_threshold);
  read(j, s, "correct_blood_pressure", c.correct_blood_pressure);
  read(j, s, "systolic_column", c.systolic_column);
  read(j, s, "diastolic_column", c.diastolic_column);
  return c;
}

Json to_json(const CsppConfig& c) {
  Json columns = Json::object();
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) columns[std::string(kFactorNames[k])] = c.columns[k];
  return Json{{"columns", std::move(columns)},
              {"bmi_column", c.bmi_column},
              {"overweight_bmi", c.overweight_bmi},
              {"high_risk_factor_count", 3}};
}

CsppConfig cspp_config_from_json(const Json& j, CsppConfig c) {
  constexpr std::string_view s = "cspp";
  check_object(j, s, {"columns", "bmi_column", "overweight_bmi", "high_risk_factor_count"});
  if (const auto it = j.find("columns"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorKind::Parse, "cspp.columns: expected an object");
    for (const auto& [factor, column] : it->items()) {
      const auto pos = std::find(kFactorNames.begin(), kFactorNames.end(), factor);
      if (pos == kFactorNames.end()) throw Error(ErrorKind::Parse, "cspp.columns: unknown factor '" + factor + "'");
      if (!column.is_string()) throw Error(ErrorKind::Parse, "cspp.columns." + factor + ": wrong type");
      c.columns[static_cast<std::size_t>(pos - kFactorNames.begin())] = column.get<std::string>();
    }
  }
  read(j, s, "bmi_column", c.bmi_column);
  read(j, s, "overweight_bmi", c.overweight_bmi);
  if (const auto it = j.find("high_risk_factor_count"); it != j.end() && *it != 3) {
    throw Error(ErrorKind::Unsupported, "cspp.high_risk_factor_count: the screening rule fixes it at 3");
  }
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"max_depth", c.max_depth},
              {"min_samples_split", c.min_samples_split},
              {"min_samples_leaf", c.min_samples_leaf},
              {"min_impurity_decrease", c.min_impurity_decrease},
              {"n_trees", c.n_trees},
              {"feature_subsample_size", c.feature_subsample_size},
              {"bootstrap", c.bootstrap},
              {"criterion", c.criterion == SplitCriterion::Gini ? "gini" : "entropy"},
              {"seed", c.seed},
              {"threads", c.threads}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  constexpr std::string_view s = "train";
  check_object(j, s,
               {"max_depth", "min_samples_split", "min_samples_leaf", "min_impurity_decrease", "n_trees",
                "feature_subsample_size", "bootstrap", "criterion", "seed", "threads"});
  read(j, s, "max_depth", c.max_depth);
  read(j, s, "min_samples_split", c.min_samples_split);
  read(j, s, "min_samples_leaf", c.min_samples_leaf);
  read(j, s, "min_impurity_decrease", c.min_impurity_decrease);
  read(j, s, "n_trees", c.n_trees);
  read(j, s, "feature_subsample_size", c.feature_subsample_size);
  read(j, s, "bootstrap", c.bootstrap);
  read(j, s, "seed", c.seed);
  read(j, s, "threads", c.threads);
  if (j.contains("criterion")) {
    std::string name;
    read(j, s, "criterion", name);
    if (name == "gini") {
      c.criterion = SplitCriterion::Gini;
    } else if (name == "entropy") {
      c.criterion = SplitCriterion::Entropy;
    } else {
      throw Error(ErrorKind::Parse, "train.criterion: unknown criterion '" + name + "'");
    }
  }
  c.validate();
  return c;
}

Json to_json(const LogitOptions& o) {
  return Json{{"max_iter", o.max_iter},
              {"tol", o.tol},
              {"separation_norm", o.separation_norm},
              {"standardize", o.standardize}};
}

LogitOptions logit_options_from_json(const Json& j, LogitOptions o) {
  constexpr std::string_view s = "logit";
  check_object(j, s, {"max_iter", "tol", "separation_norm", "standardize"});
  read(j, s, "max_iter", o.max_iter);
  read(j, s, "tol", o.tol);
  read(j, s, "separation_norm", o.separation_norm);
  read(j, s, "standardize", o.standardize);
  return o;
}

Json to_json(const SweepConfig& c) {
  return Json{{"features", c.features},
              {"proportions", c.proportions},
              {"repetitions", c.repetitions},
              {"seed", c.seed},
              {"drop_columns", c.drop_columns}};
}

SweepConfig sweep_config_from_json(const Json& j, SweepConfig c) {
  constexpr std::string_view s = "sweep";
  check_object(j, s, {"features", "proportions", "repetitions", "seed", "drop_columns"});
  read(j, s, "features", c.features);
  read(j, s, "proportions", c.proportions);
  read(j, s, "repetitions", c.repetitions);
  read(j, s, "seed", c.seed);
  read(j, s, "drop_columns", c.drop_columns);
  return c;
}

Json to_json(const CalibrationTargets& t) {
  // Arrays, not objects: draw order follows list order.
  Json factors = Json::array();
  for (const auto& f : t.factors) factors.push_back(Json{{"column", f.column}, {"exposure", f.exposure}});
  Json categoricals = Json::array();
  for (const auto& c : t.categoricals) {
    categoricals.push_back(Json{{"column", c.column}, {"probabilities", c.probabilities}});
  }
  Json numerics = Json::array();
  for (const auto& n : t.numerics) {
    numerics.push_back(Json{{"column", n.column},
                            {"factor", n.factor},
                            {"absent", to_json(n.absent)},
                            {"present", to_json(n.present)},
                            {"missing_rate", n.missing_rate}});
  }
  Json terms = Json::array();
  for (const auto& term : t.outcome_terms) {
    terms.push_back(Json{{"column", term.column}, {"coef", term.coef}, {"center", term.center}, {"scale", term.scale}});
  }
  return Json{{"schema", to_json(t.schema)},
              {"factors", std::move(factors)},
              {"overweight_exposure", t.overweight_exposure},
              {"overweight_bmi", t.overweight_bmi},
              {"bmi_normal", to_json(t.bmi_normal)},
              {"bmi_overweight", to_json(t.bmi_overweight)},
              {"height", to_json(t.height)},
              {"history_stroke_exposure", t.history_stroke_exposure},
              {"history_log_odds", t.history_log_odds},
              {"categoricals", std::move(categoricals)},
              {"numerics", std::move(numerics)},
              {"pulse_pressure_min", t.pulse_pressure_min},
              {"outcome_intercept", t.outcome_intercept},
              {"outcome_terms", std::move(terms)}};
}

CalibrationTargets calibration_targets_from_json(const Json& j, CalibrationTargets t) {
  constexpr std::string_view s = "synth";
  check_object(j, s,
               {"schema", "factors", "overweight_exposure", "overweight_bmi", "bmi_normal", "bmi_overweight",
                "height", "history_stroke_exposure", "history_log_odds", "categoricals", "numerics",
                "pulse_pressure_min", "outcome_intercept", "outcome_terms"});
  if (j.contains("schema")) t.schema = schema_from_json(j["schema"]);
  if (const auto it = j.find("factors"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::Parse, "synth.factors: expected an array");
    t.factors.clear();
    for (const auto& item : *it) {
      check_object(item, "synth.factors", {"column", "exposure"});
      FactorTarget f;
      read(item, s, "column", f.column);
      read(item, s, "exposure", f.exposure);
      t.factors.push_back(std::move(f));
    }
  }
  read(j, s, "overweight_exposure", t.overweight_exposure);
  read(j, s, "overweight_bmi", t.overweight_bmi);
  if (j.contains("bmi_normal")) t.bmi_normal = truncated_normal_from_json(j["bmi_normal"], "synth.bmi_normal");
  if (j.contains("bmi_overweight")) {
    t.bmi_overweight = truncated_normal_from_json(j["bmi_overweight"], "synth.bmi_overweight");
  }
  if (j.contains("height")) t.height = truncated_normal_from_json(j["height"], "synth.height");
  read(j, s, "history_stroke_exposure", t.history_stroke_exposure);
  read(j, s, "history_log_odds", t.history_log_odds);
  if (const auto it = j.find("categoricals"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::Parse, "synth.categoricals: expected an array");
    t.categoricals.clear();
    for (const auto& item : *it) {
      check_object(item, "synth.categoricals", {"column", "probabilities"});
      CategoricalTarget c;
      read(item, s, "column", c.column);
      read(item, s, "probabilities", c.probabilities);
      t.categoricals.push_back(std::move(c));
    }
  }
  if (const auto it = j.find("numerics"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::Parse, "synth.numerics: expected an array");
    t.numerics.clear();
    for (const auto& item : *it) {
      check_object(item, "synth.numerics", {"column", "factor", "absent", "present", "missing_rate"});
      NumericTarget n;
      read(item, s, "column", n.column);
      read(item, s, "factor", n.factor);
      read(item, s, "missing_rate", n.missing_rate);
      if (!item.contains("absent")) throw Error(ErrorKind::Parse, "synth.numerics: '" + n.column + "' lacks 'absent'");
      n.absent = truncated_normal_from_json(item["absent"], "synth.numerics." + n.column);
      n.present = item.contains("present") ? truncated_normal_from_json(item["present"], "synth.numerics." + n.column)
                                           : n.absent;
      t.numerics.push_back(std::move(n));
    }
  }
  read(j, s, "pulse_pressure_min", t.pulse_pressure_min);
  read(j, s, "outcome_intercept", t.outcome_intercept);
  if (const auto it = j.find("outcome_terms"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorKind::Parse, "synth.outcome_terms: expected an array");
    t.outcome_terms.clear();
    for (const auto& item : *it) {
      check_object(item, "synth.outcome_terms", {"column", "coef", "center", "scale"});
      OutcomeTerm term;
      read(item, s, "column", term.column);
      read(item, s, "coef", term.coef);
      read(item, s, "center", term.center);
      read(item, s, "scale", term.scale);
      t.outcome_terms.push_back(std::move(term));
    }
  }
  t.validate();
  return t;
}

std::vector<std::string> default_logit_features() {
  return {"History of Stroke", "Physical Inactivity", "Hypertension", "Hyperlipidemia", "Smoking",
          "Diabetes Mellitus", "BMI", "Family history of Stroke", "Heart Disease", "Frequency of Fruits",
          "Alcohol", "Pulse", "Sex", "Retire", "Age", "Frequency of Vegetables", "Occupation",
          "Education Level", "History of TIA"};
}

Json to_json(const RunConfig& c) {
  return Json{{"schema", to_json(c.schema)},
              {"csv", Json{{"label", c.csv.label}, {"outcome", c.csv.outcome}}},
              {"cleanse", to_json(c.cleanse)},
              {"cspp", to_json(c.cspp)},
              {"train", to_json(c.train)},
              {"test_fraction", c.test_fraction},
              {"logit", Json{{"options", to_json(c.logit.options)},
                             {"features", c.logit.features},
                             {"variance_threshold", c.logit.variance_threshold}}},
              {"sweep", to_json(c.sweep)},
              {"rfe", Json{{"features", c.rfe.features},
                           {"target_features", c.rfe.target_features},
                           {"plateau_tolerance", c.rfe.plateau_tolerance}}},
              {"permutation_repetitions", c.permutation_repetitions},
              {"background_rows", c.background_rows},
              {"synth", to_json(c.synth)}};
}

RunConfig run_config_from_json(const Json& j) {
  constexpr std::string_view s = "config";
  check_object(j, s,
               {"schema", "csv", "cleanse", "cspp", "train", "test_fraction", "logit", "sweep", "rfe",
                "permutation_repetitions", "background_rows", "synth"});
  RunConfig c;
  if (j.contains("schema")) c.schema = schema_from_json(j["schema"]);
  if (const auto it = j.find("csv"); it != j.end()) {
    check_object(*it, "csv", {"label", "outcome"});
    read(*it, "csv", "label", c.csv.label);
    read(*it, "csv", "outcome", c.csv.outcome);
  }
  if (j.contains("cleanse")) c.cleanse = cleanse_config_from_json(j["cleanse"]);
  if (j.contains("cspp")) c.cspp = cspp_config_from_json(j["cspp"]);
  if (j.contains("train")) c.train = train_config_from_json(j["train"]);
  read(j, s, "test_fraction", c.test_fraction);
  if (const auto it = j.find("logit"); it != j.end()) {
    check_object(*it, "logit", {"options", "features", "variance_threshold"});
    if (it->contains("options")) c.logit.options = logit_options_from_json((*it)["options"]);
    read(*it, "logit", "features", c.logit.features);
    read(*it, "logit", "variance_threshold", c.logit.variance_threshold);
  }
  if (j.contains("sweep")) c.sweep = sweep_config_from_json(j["sweep"]);
  if (const auto it = j.find("rfe"); it != j.end()) {
    check_object(*it, "rfe", {"features", "target_features", "plateau_tolerance"});
    read(*it, "rfe", "features", c.rfe.features);
    read(*it, "rfe", "target_features", c.rfe.target_features);
    read(*it, "rfe", "plateau_tolerance", c.rfe.plateau_tolerance);
  }
  read(j, s, "permutation_repetitions", c.permutation_repetitions);
  read(j, s, "background_rows", c.background_rows);
  if (j.contains("synth")) c.synth = calibration_targets_from_json(j["synth"]);
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "test_fraction must lie in (0, 1)");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from_json(read_json_file(path)); }

}  // namespace strokerisk
