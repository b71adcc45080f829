#include "strokerisk/bundle.hpp"
#include "strokerisk/config.hpp"
#include "strokerisk/error.hpp"
#include "strokerisk/explain.hpp"
#include "strokerisk/logit.hpp"
#include "strokerisk/synth.hpp"
#include "strokerisk/tree.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace strokerisk;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

const Cohort& cohort() {
  static const Cohort c = generate_cohort(CalibrationTargets::defaults(), 1500, 5);
  return c;
}

ModelBundle base_bundle(const Cohort& data) {
  ModelBundle b;
  b.schema = data.schema();
  b.model_features = data.schema().names();
  b.provenance.seed = 5;
  b.provenance.config = to_json(RunConfig{});
  b.provenance.data_fingerprint = fingerprint(data);
  b.provenance.training_rows = data.row_count();
  return b;
}

ModelBundle tree_bundle() {
  TrainConfig tc;
  tc.max_depth = 6;
  auto b = base_bundle(cohort());
  b.model = fit_tree(cohort(), tc);
  return b;
}

ModelBundle forest_bundle() {
  TrainConfig tc;
  tc.n_trees = 7;
  tc.max_depth = 5;
  tc.seed = 3;
  auto b = base_bundle(cohort());
  b.model = fit_forest(cohort(), tc);
  return b;
}

ModelBundle logit_bundle() {
  const Cohort data = relabel_binary(cohort()).select_columns(
      std::vector<std::string>{"Hypertension", "Heart Disease", "Age", "BMI"});
  const LogitFit fit = fit_logit(data);
  auto b = base_bundle(cohort());
  b.model_features = fit.model.feature_names;
  b.background = sample_background(data.with_labels({}), 20, 5);
  b.provenance.diagnostics = Json{{"log_likelihood", fit.diagnostics.log_likelihood}};
  b.model = fit.model;
  return b;
}

}  // namespace

TEST_CASE("run config round trip") {
  RunConfig c;
  c.train.max_depth = 4;
  c.train.criterion = SplitCriterion::Entropy;
  c.test_fraction = 0.25;
  c.sweep.proportions = {0.3, 0.6};
  c.rfe.plateau_tolerance = 0.01;
  c.synth.factors[0].exposure = 0.4;
  const Json j = to_json(c);
  const RunConfig back = run_config_from_json(parse_json(dump_json(j), "config"));
  CHECK(dump_json(to_json(back)) == dump_json(j));
  CHECK(back.train == c.train);
  CHECK(back.cleanse == c.cleanse);
  CHECK(back.cspp == c.cspp);
  CHECK(back.schema == c.schema);
}

TEST_CASE("config sections overlay defaults") {
  const RunConfig c = run_config_from_json(Json{{"train", {{"n_trees", 12}}}});
  CHECK(c.train.n_trees == 12);
  CHECK(c.train.max_depth == TrainConfig{}.max_depth);
  CHECK(c.schema == FeatureSchema::stroke_survey());
  CHECK(run_config_from_json(Json::object()).logit.features == default_logit_features());
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { run_config_from_json(Json{{"trian", Json::object()}}); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_config_from_json(Json{{"train", {{"depth", 3}}}}); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_config_from_json(Json{{"train", {{"max_depth", "deep"}}}}); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_config_from_json(Json{{"train", {{"criterion", "log_loss"}}}}); }) == ErrorKind::Parse);
  CHECK(kind_of([] { run_config_from_json(Json{{"test_fraction", 1.0}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { parse_json("{", "x"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { read_text_file("/nonexistent/strokerisk.json"); }) == ErrorKind::Io);
}

TEST_CASE("calibration targets round trip") {
  const auto t = CalibrationTargets::defaults();
  const Json j = to_json(t);
  CHECK(to_json(calibration_targets_from_json(j)) == j);
  Json bad = j;
  bad["unexpected"] = 1;
  CHECK_THROWS_AS(calibration_targets_from_json(bad), Error);
}

TEST_CASE("bundles round trip byte for byte") {
  test::TempDir dir("bundle");
  for (const auto& b : {tree_bundle(), forest_bundle(), logit_bundle()}) {
    CAPTURE(to_string(b.kind()));
    const auto first = dir / "first.json";
    const auto second = dir / "second.json";
    save_bundle(first, b);
    const ModelBundle loaded = load_bundle(first);
    CHECK(loaded == b);
    save_bundle(second, loaded);
    CHECK(test::slurp(first) == test::slurp(second));
  }
}

TEST_CASE("loaded models predict exactly like the originals") {
  const auto forest = forest_bundle();
  const auto tree = tree_bundle();
  const auto logit = logit_bundle();
  const auto f2 = parse_bundle(serialize_bundle(forest));
  const auto t2 = parse_bundle(serialize_bundle(tree));
  const auto l2 = parse_bundle(serialize_bundle(logit));
  const Cohort view = cohort().select_columns(logit.model_features);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto row = cohort().row(i);
    CHECK(predict_forest(std::get<ForestModel>(f2.model), row) == predict_forest(std::get<ForestModel>(forest.model), row));
    CHECK(predict_tree(std::get<TreeModel>(t2.model), row) == predict_tree(std::get<TreeModel>(tree.model), row));
    CHECK(predict_proba(std::get<LogitModel>(l2.model), view.row(i)) ==
          predict_proba(std::get<LogitModel>(logit.model), view.row(i)));
  }
}

TEST_CASE("bundle validation") {
  Json j = to_json(tree_bundle());

  Json version = j;
  version["format_version"] = kBundleVersion + 1;
  CHECK(kind_of([&] { bundle_from_json(version); }) == ErrorKind::Unsupported);

  Json kind = j;
  kind["kind"] = "svm";
  CHECK(kind_of([&] { bundle_from_json(kind); }) == ErrorKind::InvalidArgument);

  Json dangling = j;
  dangling["model"]["nodes"][0]["left"] = 100000;
  CHECK(kind_of([&] { bundle_from_json(dangling); }) == ErrorKind::Parse);

  Json counts = j;
  counts["model"]["nodes"][0]["class_counts"] = Json::array({1, 2});
  CHECK(kind_of([&] { bundle_from_json(counts); }) == ErrorKind::Parse);

  Json missing = j;
  missing.erase("schema");
  CHECK(kind_of([&] { bundle_from_json(missing); }) == ErrorKind::Parse);

  Json features = j;
  features["model_features"].erase(features["model_features"].size() - 1);
  CHECK(kind_of([&] { bundle_from_json(features); }) == ErrorKind::Parse);

  Json unknown = j;
  unknown["model_features"][0] = "Shoe size";
  CHECK(kind_of([&] { bundle_from_json(unknown); }) == ErrorKind::Schema);

  CHECK(kind_of([] { parse_bundle("[1, 2]"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { load_bundle("/nonexistent/bundle.json"); }) == ErrorKind::Io);

  Json logit = to_json(logit_bundle());
  logit["model"]["means"].erase(0);
  CHECK(kind_of([&] { bundle_from_json(logit); }) == ErrorKind::Parse);
  Json background = to_json(logit_bundle());
  background["background"][0].erase(0);
  CHECK(kind_of([&] { bundle_from_json(background); }) == ErrorKind::Parse);
}

TEST_CASE("model kind names") {
  for (auto k : {ModelKind::Tree, ModelKind::Forest, ModelKind::Logit}) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_model_kind("Forest"), Error);
}
