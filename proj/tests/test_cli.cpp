#include "strokerisk/bundle.hpp"
#include "strokerisk/cli.hpp"
#include "strokerisk/config.hpp"
#include "strokerisk/reports.hpp"
#include "strokerisk/tree.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace strokerisk;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) { return path.string(); }

/// A small run config so the pipeline stays quick.
std::string small_config(const test::TempDir& dir) {
  const auto path = dir / "config.json";
  write_text_file(path, dump_json(Json{{"train", {{"n_trees", 12}, {"max_depth", 8}}},
                                       {"sweep", {{"repetitions", 2}, {"proportions", {0.2, 0.8}}}},
                                       {"permutation_repetitions", 2}}));
  return p(path);
}

}  // namespace

TEST_CASE("synth, train, evaluate, explain") {
  test::TempDir dir("cli");
  const std::string cfg = small_config(dir);
  const std::string data = p(dir / "cohort.csv");
  const std::string bundle = p(dir / "forest.json");
  const std::string test_csv = p(dir / "test.csv");

  auto r = cli({"synth", "--rows", "1500", "--seed", "3", "--out", data, "--config", cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Json stats = Json::parse(r.out);
  CHECK(stats["rows"] == 1500);
  CHECK(stats["factors"].size() == 10);

  r = cli({"train", "--kind", "forest", "--input", data, "--out", bundle, "--test-out", test_csv, "--seed", "3",
           "--config", cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Json train_report = Json::parse(r.out);
  CHECK(train_report["n_trees"] == 12);
  CHECK(train_report["training_rows"].get<int>() + train_report["test_rows"].get<int>() == 1500);
  CHECK(train_report["test_rows"] == 300);

  r = cli({"evaluate", "--bundle", bundle, "--input", test_csv, "--out", p(dir / "eval"), "--config", cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Json report = read_json_file(dir / "eval" / "classification_report.json");

  // Recount the report from the bundle's own predictions.
  const ModelBundle b = load_bundle(bundle);
  const Cohort test = read_cohort(test_csv, b.schema);
  const auto pred = predict_classes(std::get<ForestModel>(b.model), test.select_columns(b.model_features));
  const auto expect = oracle::recount(test.labels(), pred, 3);
  CHECK(report["accuracy"].get<double>() == doctest::Approx(expect.accuracy).epsilon(1e-12));
  CHECK(report["weighted_avg"]["precision"].get<double>() == doctest::Approx(expect.weighted_precision).epsilon(1e-12));
  const std::array<const char*, 3> names{"Low", "Medium", "High"};
  for (int c = 0; c < 3; ++c) {
    CHECK(report["classes"][names[c]]["precision"].get<double>() == doctest::Approx(expect.precision[c]).epsilon(1e-12));
    CHECK(report["classes"][names[c]]["support"] == expect.support[c]);
  }
  CHECK(Json::parse(r.out)["weighted_precision"] == report["weighted_avg"]["precision"]);

  r = cli({"explain", "--bundle", bundle, "--input", test_csv, "--method", "shap", "--row", "0"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Json e = Json::parse(r.out);
  double total = e["base_value"].get<double>();
  for (const auto& [name, v] : e["contributions"].items()) total += v.get<double>();
  const auto proba = predict_forest(std::get<ForestModel>(b.model), test.select_columns(b.model_features).row(0));
  CHECK(std::abs(total - proba[2]) <= 1e-9);
  CHECK(e["output"].get<double>() == doctest::Approx(proba[2]).epsilon(1e-12));

  r = cli({"explain", "--bundle", bundle, "--method", "mdi", "--out", p(dir / "mdi.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(test::slurp(dir / "mdi.csv").find("Hypertension") != std::string::npos);

  r = cli({"explain", "--bundle", bundle, "--input", test_csv, "--method", "permutation", "--out",
           p(dir / "perm.csv"), "--config", cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  r = cli({"explain", "--bundle", bundle, "--input", test_csv, "--out", p(dir / "shap"), "--dependence",
           "Age,Systolic blood pressure"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(std::filesystem::exists(dir / "shap" / "shap_summary.csv"));
  CHECK(std::filesystem::exists(dir / "shap" / "shap_dependence.csv"));
}

TEST_CASE("ingest, cleanse and label") {
  test::TempDir dir("cli_prep");
  const std::string raw = p(dir / "raw.csv");
  // Every schema column, with the factors and pressures set per row.
  const auto schema = FeatureSchema::stroke_survey();
  const std::vector<std::map<std::string, std::string>> rows = {
      {{"BMI", "22"}, {"Hypertension", "1"}, {"Systolic blood pressure", "80"}, {"Diastolic blood pressure", "130"}},
      {{"BMI", "30"}, {"Hypertension", "1"}, {"Diabetes Mellitus", "1"}, {"Heart Disease", "1"}},
      {{"BMI", ""}, {"Diastolic blood pressure", ""}},
  };
  std::string text;
  for (std::size_t j = 0; j < schema.size(); ++j) text += (j ? "," : "") + schema[j].name;
  text += "\n";
  for (const auto& overrides : rows) {
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& f = schema[j];
      std::string cell = f.kind == FeatureKind::Categorical ? "0" : format_number(f.valid_range->min + 1);
      if (f.name == "Systolic blood pressure") cell = "120";
      if (f.name == "Diastolic blood pressure") cell = "80";
      if (const auto it = overrides.find(f.name); it != overrides.end()) cell = it->second;
      text += (j ? "," : "") + cell;
    }
    text += "\n";
  }
  write_text_file(raw, text);
  auto r = cli({"ingest", "--input", raw, "--out", p(dir / "canon.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(Json::parse(r.out)["rows"] == 3);

  r = cli({"cleanse", "--input", p(dir / "canon.csv"), "--out", p(dir / "clean.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(Json::parse(r.out)["corrected_bp_rows"] == 1);

  r = cli({"label", "--input", p(dir / "clean.csv"), "--out", p(dir / "labeled.csv")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Json counts = Json::parse(r.out)["label_counts"];
  CHECK(counts["Low"] == 1);
  CHECK(counts["Medium"] == 1);
  CHECK(counts["High"] == 1);
}

TEST_CASE("logistic pipeline") {
  test::TempDir dir("cli_logit");
  const std::string cfg = small_config(dir);
  const std::string data = p(dir / "cohort.csv");
  REQUIRE(cli({"synth", "--rows", "3000", "--seed", "8", "--out", data}).code == 0);
  auto r = cli({"train", "--kind", "logit", "--input", data, "--out", p(dir / "logit.json"), "--test-out",
                p(dir / "test.csv"), "--seed", "8", "--config", cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(Json::parse(r.out)["logit"]["coefficients"].size() == default_logit_features().size() + 1);
  r = cli({"evaluate", "--bundle", p(dir / "logit.json"), "--input", p(dir / "test.csv"), "--out", p(dir / "eval")});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(std::filesystem::exists(dir / "eval" / "coefficients.csv"));
  const Json levels = read_json_file(dir / "eval" / "risk_level_probability.json");
  CHECK_FALSE(levels.is_null());
  r = cli({"explain", "--bundle", p(dir / "logit.json"), "--input", p(dir / "test.csv"), "--row", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
}

TEST_CASE("sweep and rfe") {
  test::TempDir dir("cli_exp");
  const std::string cfg = small_config(dir);
  const std::string data = p(dir / "cohort.csv");
  REQUIRE(cli({"synth", "--rows", "800", "--seed", "2", "--out", data}).code == 0);
  auto r = cli({"sweep", "--input", data, "--out", p(dir / "sweep.csv"), "--config", cfg, "--seed", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(test::slurp(dir / "sweep.csv").size() > 0);

  const std::string rfe_cfg = p(dir / "rfe.json");
  write_text_file(rfe_cfg, dump_json(Json{{"train", {{"n_trees", 5}, {"max_depth", 5}}},
                                          {"rfe", {{"features", {"Hypertension", "Age", "BMI", "Smoking"}}}}}));
  r = cli({"rfe", "--input", data, "--out", p(dir / "rfe.csv"), "--config", rfe_cfg});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(Json::parse(r.out)["removal_order"].size() == 3);
}

TEST_CASE("same seed, same bytes") {
  test::TempDir dir("cli_det");
  const std::string cfg = small_config(dir);
  for (const char* tag : {"a", "b"}) {
    const std::string data = p(dir / (std::string(tag) + ".csv"));
    REQUIRE(cli({"synth", "--rows", "600", "--seed", "5", "--out", data}).code == 0);
    REQUIRE(cli({"train", "--input", data, "--out", p(dir / (std::string(tag) + ".json")), "--seed", "5", "--config",
                 cfg})
                .code == 0);
  }
  CHECK(test::slurp(dir / "a.csv") == test::slurp(dir / "b.csv"));
  CHECK(test::slurp(dir / "a.json") == test::slurp(dir / "b.json"));
}

TEST_CASE("errors") {
  test::TempDir dir("cli_err");
  auto r = cli({"train", "--input", "x.csv", "--frobnicate"});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error usage:", 0) == 0);

  CHECK(cli({}).code == 2);
  CHECK(cli({"train", "--kind", "svm", "--input", "x.csv"}).code == 2);

  r = cli({"train", "--input", p(dir / "missing.csv"), "--out", p(dir / "b.json")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error io:", 0) == 0);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  write_text_file(dir / "odd.csv", "Age,Shoe size\n1,2\n");
  r = cli({"train", "--input", p(dir / "odd.csv"), "--out", p(dir / "b.json")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error schema:", 0) == 0);

  write_text_file(dir / "bad.json", "{\"train\": {\"depth\": 3}}");
  r = cli({"synth", "--rows", "10", "--out", p(dir / "s.csv"), "--config", p(dir / "bad.json")});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error parse:", 0) == 0);

  r = cli({"synth", "--rows", "10"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error invalid_argument:", 0) == 0);

  CHECK(cli({"--help"}).code == 0);
}
