#include "strokerisk/cli.hpp"

#include "strokerisk/bundle.hpp"
#include "strokerisk/config.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/error.hpp"
#include "strokerisk/evaluation.hpp"
#include "strokerisk/explain.hpp"
#include "strokerisk/logit.hpp"
#include "strokerisk/reports.hpp"
#include "strokerisk/service.hpp"
#include "strokerisk/synth.hpp"
#include "strokerisk/tree.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <csignal>
#include <iostream>
#include <optional>

namespace strokerisk {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> header_fields(std::string_view text) {
  const auto nl = text.find('\n');
  std::string_view line = text.substr(0, nl);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

/// Options every subcommand accepts.
struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Seed for every random stream of the run (overrides the config)");
  sub->add_option("--config", c.config, "JSON run configuration");
  sub->add_option("--out", c.out, "Output file (or directory for multi-file outputs)");
}

RunConfig load(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
  if (c.seed) {
    cfg.train.seed = *c.seed;
    cfg.sweep.seed = *c.seed;
  }
  return cfg;
}

std::uint64_t seed_of(const Common& c, const RunConfig& cfg) { return c.seed.value_or(cfg.train.seed); }

const std::string& require_out(const Common& c) {
  if (c.out.empty()) throw Error(ErrorKind::InvalidArgument, "--out is required");
  return c.out;
}

fs::path out_dir(const Common& c) {
  const fs::path dir = require_out(c);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void emit(std::ostream& out, const std::optional<std::string>& path, const Json& j) {
  if (path && !path->empty()) {
    write_text_file(*path, dump_json(j));
  } else {
    out << dump_json(j);
  }
}

Cohort require_labels(const Cohort& c, std::string_view what) {
  if (!c.has_labels()) {
    throw Error(ErrorKind::Schema, std::string(what) + " has no label column; run `strokerisk label` first");
  }
  return c;
}

std::vector<std::string> class_names(int n_classes) {
  if (n_classes == kRiskLevels) return risk_level_names();
  std::vector<std::string> out;
  for (int c = 0; c < n_classes; ++c) out.push_back(std::to_string(c));
  return out;
}

/// Columns of `data` that the bundle's model reads, in model order.
Cohort model_view(const ModelBundle& b, const Cohort& data) { return data.select_columns(b.model_features); }

std::vector<int> logit_classes(const LogitModel& m, const Cohort& view) {
  std::vector<int> out(view.row_count());
  for (std::size_t i = 0; i < view.row_count(); ++i) out[i] = predict_proba(m, view.row(i)) >= 0.5 ? 1 : 0;
  return out;
}

Classifier bundle_classifier(const ModelBundle& b) {
  switch (b.kind()) {
    case ModelKind::Tree: {
      auto forest = as_forest(std::get<TreeModel>(b.model));
      return [forest](const Cohort& d) { return predict_classes(forest, d); };
    }
    case ModelKind::Forest: {
      const auto& forest = std::get<ForestModel>(b.model);
      return [&forest](const Cohort& d) { return predict_classes(forest, d); };
    }
    case ModelKind::Logit: {
      const auto& m = std::get<LogitModel>(b.model);
      return [&m](const Cohort& d) { return logit_classes(m, d); };
    }
  }
  throw Error(ErrorKind::Unsupported, "unknown model kind");
}

ForestModel bundle_forest(const ModelBundle& b, std::string_view what) {
  if (const auto* t = std::get_if<TreeModel>(&b.model)) return as_forest(*t);
  if (const auto* f = std::get_if<ForestModel>(&b.model)) return *f;
  throw Error(ErrorKind::Unsupported, std::string(what) + " needs a tree or forest bundle");
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestArgs {
  Common common;
  std::string input;
  std::string report;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const std::string text = read_text_file(a.input);
  const auto header = header_fields(text);
  for (const auto& name : header) {
    if (name != cfg.csv.label && name != cfg.csv.outcome && !cfg.schema.index_of(name)) {
      throw Error(ErrorKind::Schema, "unknown column '" + name + "' in '" + a.input + "'");
    }
  }
  const IngestResult r = ingest_csv_text(text, cfg.schema, cfg.csv);
  write_csv(require_out(a.common), r.cohort, true, cfg.csv);
  emit(out, a.report,
       Json{{"rows", r.cohort.row_count()},
            {"columns", r.cohort.feature_count()},
            {"empty_cells", r.empty_cells},
            {"unparseable_cells", r.unparseable_cells},
            {"warnings", r.warnings}});
  return 0;
}

struct CohortArgs {
  Common common;
  std::string input;
  std::string report;
};

int cmd_cleanse(const CohortArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const Cohort data = read_cohort(a.input, cfg.schema, cfg.csv);
  const auto [clean, report] = cleanse(data, cfg.cleanse);
  write_csv(require_out(a.common), clean, true, cfg.csv);
  emit(out, a.report, to_json(report));
  return 0;
}

int cmd_label(const CohortArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const Cohort data = read_cohort(a.input, cfg.schema, cfg.csv);
  const Cohort labeled = label_cohort(data, cfg.cspp);
  write_csv(require_out(a.common), labeled, true, cfg.csv);
  Json summary = Json::object();
  std::array<std::size_t, kRiskLevels> counts{};
  for (int l : labeled.labels()) ++counts[static_cast<std::size_t>(l)];
  for (int l = 0; l < kRiskLevels; ++l) summary[std::string(to_string(static_cast<RiskLabel>(l)))] = counts[static_cast<std::size_t>(l)];
  Json report{{"label_counts", std::move(summary)}};
  if (labeled.row_count() > 0) report["factors"] = to_json(cohort_stats(labeled, cfg.cspp));
  emit(out, a.report, report);
  return 0;
}

struct SynthArgs {
  Common common;
  std::size_t rows = 25000;
  std::string targets;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const CalibrationTargets targets =
      a.targets.empty() ? cfg.synth : calibration_targets_from_json(read_json_file(a.targets));
  const Cohort data = generate_cohort(targets, a.rows, seed_of(a.common, cfg));
  write_csv(require_out(a.common), data, true, cfg.csv);
  const CohortStats stats = cohort_stats(data);
  out << dump_json(to_json(stats));
  return 0;
}

struct TrainArgs {
  Common common;
  std::string input;
  std::string kind = "forest";
  double test_fraction = -1.0;
  std::string test_out;
  std::string report;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = load(a.common);
  const ModelKind kind = parse_model_kind(a.kind);
  const std::uint64_t seed = seed_of(a.common, cfg);
  const double fraction = a.test_fraction >= 0.0 ? a.test_fraction : cfg.test_fraction;
  const Cohort data = require_labels(read_cohort(a.input, cfg.schema, cfg.csv), "training input");

  Cohort train = data;
  std::optional<Cohort> test;
  if (fraction > 0.0) {
    auto split = split_stratified(data, fraction, seed);
    train = std::move(split.train);
    test = std::move(split.test);
  }
  if (!a.test_out.empty()) {
    if (!test) throw Error(ErrorKind::InvalidArgument, "--test-out needs a positive --test-fraction");
    write_csv(a.test_out, *test, true, cfg.csv);
  }

  ModelBundle bundle;
  bundle.schema = train.schema();
  bundle.cleanse = cfg.cleanse;
  bundle.cspp = cfg.cspp;
  bundle.provenance.seed = seed;
  bundle.provenance.config = to_json(cfg);
  bundle.provenance.data_fingerprint = fingerprint(train);
  bundle.provenance.training_rows = train.row_count();

  Json report{{"kind", to_string(kind)},
              {"training_rows", train.row_count()},
              {"test_rows", test ? test->row_count() : 0},
              {"data_fingerprint", bundle.provenance.data_fingerprint},
              {"seed", seed}};
  switch (kind) {
    case ModelKind::Tree: {
      TreeModel tree = fit_tree(train, cfg.train);
      report["depth"] = tree.depth();
      report["leaves"] = tree.leaf_count();
      const auto forest = as_forest(tree);
      report["training_accuracy"] = score(Metric::Accuracy, train.labels(), predict_classes(forest, train), tree.n_classes);
      bundle.model_features = train.schema().names();
      bundle.model = std::move(tree);
      break;
    }
    case ModelKind::Forest: {
      ForestModel forest = fit_forest(train, cfg.train);
      report["n_trees"] = forest.trees.size();
      report["feature_subsample_size"] = forest.feature_subsample_size;
      if (cfg.train.bootstrap) report["out_of_bag_accuracy"] = out_of_bag_accuracy(forest, train);
      bundle.model_features = train.schema().names();
      bundle.model = std::move(forest);
      break;
    }
    case ModelKind::Logit: {
      const Cohort binary = relabel_binary(train);
      Cohort selected;
      if (cfg.logit.features.empty()) {
        const auto rules = default_correlation_rules();
        selected = select_features(binary, cfg.logit.variance_threshold, rules);
      } else {
        selected = select_features(binary.select_columns(cfg.logit.features), cfg.logit.variance_threshold, {});
      }
      LogitFit fit = fit_logit(selected, cfg.logit.options);
      bundle.model_features = fit.model.feature_names;
      bundle.background = sample_background(selected.with_labels({}), cfg.background_rows, seed);
      bundle.provenance.diagnostics = coefficient_report(fit.diagnostics);
      report["logit"] = bundle.provenance.diagnostics;
      bundle.model = std::move(fit.model);
      break;
    }
  }
  save_bundle(require_out(a.common), bundle);
  emit(out, a.report, report);
  return 0;
}

struct EvaluateArgs {
  Common common;
  std::string bundle;
  std::string input;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const ModelBundle b = load_bundle(a.bundle);
  const Cohort data = require_labels(read_cohort(a.input, b.schema, cfg.csv), "evaluation input");
  const fs::path dir = out_dir(a.common);
  Json summary = Json::object();
  if (b.kind() == ModelKind::Logit) {
    const auto& m = std::get<LogitModel>(b.model);
    const Cohort view = model_view(b, data);
    const Cohort binary = relabel_binary(data);
    const auto pred = logit_classes(m, view);
    const auto report = classification_report(binary.labels(), pred, {"0", "1"});
    write_text_file(dir / "classification_report.json", dump_json(to_json(report)));
    write_text_file(dir / "coefficients.json", dump_json(b.provenance.diagnostics));
    FitDiagnostics table;
    for (const auto& row : b.provenance.diagnostics.at("coefficients")) {
      CoefficientStats c;
      c.name = row.at("feature").get<std::string>();
      c.coef = row.at("coef").get<double>();
      c.std_err = row.at("std_err").get<double>();
      c.z = row.at("z").get<double>();
      c.p_value = row.at("p_value").get<double>();
      c.ci_low = row.at("ci_low").get<double>();
      c.ci_high = row.at("ci_high").get<double>();
      table.coefficients.push_back(std::move(c));
    }
    // The stored table already has the intercept last; rotate it back first.
    if (!table.coefficients.empty()) {
      std::rotate(table.coefficients.rbegin(), table.coefficients.rbegin() + 1, table.coefficients.rend());
    }
    write_text_file(dir / "coefficients.csv", coefficient_csv(table));
    const auto levels = risk_group_probability(m, data);
    write_text_file(dir / "risk_level_probability.json", dump_json(to_json(levels)));
    summary["accuracy"] = report.accuracy;
    summary["risk_level_probability"] = to_json(levels);
  } else {
    const ForestModel forest = bundle_forest(b, "evaluate");
    const auto pred = predict_classes(forest, model_view(b, data));
    const auto report = classification_report(data.labels(), pred, class_names(forest.n_classes));
    write_text_file(dir / "classification_report.json", dump_json(to_json(report)));
    summary["accuracy"] = report.accuracy;
    summary["weighted_precision"] = report.weighted_avg.precision;
  }
  out << dump_json(summary);
  return 0;
}

struct ExplainArgs {
  Common common;
  std::string bundle;
  std::string input;
  std::string method = "shap";
  std::optional<std::size_t> row;
  std::string dependence;
};

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  const ModelBundle b = load_bundle(a.bundle);
  const std::uint64_t seed = seed_of(a.common, cfg);
  if (a.method == "mdi") {
    const ForestModel forest = bundle_forest(b, "MDI importance");
    write_text_file(require_out(a.common), importance_csv(b.model_features, mdi_importance(forest)));
    return 0;
  }
  if (a.input.empty()) throw Error(ErrorKind::InvalidArgument, "--input is required for method '" + a.method + "'");
  Cohort data = read_cohort(a.input, b.schema, cfg.csv);
  if (a.method == "permutation") {
    require_labels(data, "permutation input");
    Cohort view = model_view(b, data);
    if (b.kind() == ModelKind::Logit) view = view.with_labels(relabel_binary(data).labels());
    const auto report = permutation_importance(bundle_classifier(b), view, Metric::WeightedPrecision,
                                               cfg.permutation_repetitions, seed);
    write_text_file(require_out(a.common), permutation_csv(report));
    return 0;
  }
  if (a.method != "shap") {
    throw Error(ErrorKind::InvalidArgument, "unknown method '" + a.method + "' (mdi, permutation or shap)");
  }
  const Cohort view = model_view(b, data);
  if (a.row) {
    if (*a.row >= view.row_count()) {
      throw Error(ErrorKind::Range, "--row " + std::to_string(*a.row) + " is outside the input (" +
                                        std::to_string(view.row_count()) + " rows)");
    }
    const auto row = view.row(*a.row);
    Explanation e;
    if (const auto* m = std::get_if<LogitModel>(&b.model)) {
      e = logit_shapley(*m, row, b.background);
    } else {
      const ForestModel forest = bundle_forest(b, "TreeSHAP");
      e = tree_shap(forest, row, forest.n_classes - 1);
    }
    Json j = to_json(e, b.model_features);
    j["row"] = *a.row;
    emit(out, a.common.out.empty() ? std::nullopt : std::optional<std::string>(a.common.out), j);
    return 0;
  }
  const ForestModel forest = bundle_forest(b, "SHAP summary export");
  const int target = forest.n_classes - 1;
  const fs::path dir = out_dir(a.common);
  const ShapSummary summary = shap_summary_export(forest, view, target);
  write_text_file(dir / "shap_summary.csv", shap_summary_csv(summary));
  write_text_file(dir / "shap_ranking.csv", shap_ranking_csv(summary));
  if (!a.dependence.empty()) {
    const auto comma = a.dependence.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--dependence expects 'FEATURE_A,FEATURE_B'");
    const std::string fa = a.dependence.substr(0, comma);
    const std::string fb = a.dependence.substr(comma + 1);
    const auto points = shap_dependence_export(forest, view, fa, fb, target);
    write_text_file(dir / "shap_dependence.csv", dependence_csv(points, fa, fb));
  }
  return 0;
}

struct ExperimentArgs {
  Common common;
  std::string input;
  std::string test;
};

std::pair<Cohort, Cohort> train_test(const ExperimentArgs& a, const RunConfig& cfg) {
  const Cohort data = require_labels(read_cohort(a.input, cfg.schema, cfg.csv), "input");
  if (!a.test.empty()) {
    return {data, require_labels(read_cohort(a.test, cfg.schema, cfg.csv), "test input")};
  }
  auto split = split_stratified(data, cfg.test_fraction, seed_of(a.common, cfg));
  return {std::move(split.train), std::move(split.test)};
}

int cmd_sweep(const ExperimentArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  auto [train, test] = train_test(a, cfg);
  const TrainConfig tc = cfg.train;
  const ForestTrainer trainer = [tc](const Cohort& d) { return fit_forest(d, tc); };
  const SweepResult result = missing_sweep(trainer, train, test, cfg.sweep);
  write_text_file(require_out(a.common), sweep_csv(result));
  out << dump_json(Json{{"baseline", result.baseline}, {"curves", result.curves.size()}});
  return 0;
}

int cmd_rfe(const ExperimentArgs& a, std::ostream& out) {
  const RunConfig cfg = load(a.common);
  auto [train, test] = train_test(a, cfg);
  if (!cfg.rfe.features.empty()) {
    train = train.select_columns(cfg.rfe.features);
    test = test.select_columns(cfg.rfe.features);
  }
  const TrainConfig tc = cfg.train;
  const ForestTrainer trainer = [tc](const Cohort& d) { return fit_forest(d, tc); };
  const RfeTrace trace = rfe(trainer, train, test, cfg.rfe.target_features);
  write_text_file(require_out(a.common), rfe_csv(trace));
  Json removed = Json::array();
  for (const auto& s : trace.steps) {
    if (s.removed) removed.push_back(*s.removed);
  }
  out << dump_json(Json{{"removal_order", std::move(removed)},
                        {"plateau_features", precision_plateau(trace, cfg.rfe.plateau_tolerance)},
                        {"plateau_tolerance", cfg.rfe.plateau_tolerance}});
  return 0;
}

struct ServeArgs {
  Common common;
  std::string bundle;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
};

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  (void)load(a.common);
  const InferenceService service(load_bundle(a.bundle));
  ServeOptions options;
  options.host = a.host;
  options.port = a.port;
  if (!a.static_dir.empty()) options.static_dir = a.static_dir;
  HttpServer server(service, options);
  const int port = server.bind();
  out << dump_json(Json{{"listening", a.host + ":" + std::to_string(port)}}) << std::flush;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

Cohort read_cohort(const fs::path& path, const FeatureSchema& schema, const CsvColumns& columns) {
  const std::string text = read_text_file(path);
  std::vector<std::size_t> present;
  for (const auto& name : header_fields(text)) {
    if (name == columns.label || name == columns.outcome) continue;
    const auto c = schema.index_of(name);
    if (!c) throw Error(ErrorKind::Schema, "unknown column '" + name + "' in '" + path.string() + "'");
    present.push_back(*c);
  }
  std::sort(present.begin(), present.end());
  return ingest_csv_text(text, schema.select(present), columns).cohort;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"strokerisk: stroke risk stratification toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Validate a raw CSV against the schema and rewrite it canonically");
  add_common(s_ingest, ingest.common);
  s_ingest->add_option("--input", ingest.input, "Raw CSV")->required();
  s_ingest->add_option("--report", ingest.report, "Ingest summary JSON (default: stdout)");

  CohortArgs cleanse_args;
  auto* s_cleanse = app.add_subcommand("cleanse", "Drop sparse columns and repair blood pressure readings");
  add_common(s_cleanse, cleanse_args.common);
  s_cleanse->add_option("--input", cleanse_args.input, "Cohort CSV")->required();
  s_cleanse->add_option("--report", cleanse_args.report, "Cleansing report JSON (default: stdout)");

  CohortArgs label_args;
  auto* s_label = app.add_subcommand("label", "Attach CSPP risk levels");
  add_common(s_label, label_args.common);
  s_label->add_option("--input", label_args.input, "Cohort CSV")->required();
  s_label->add_option("--report", label_args.report, "Label and factor summary JSON (default: stdout)");

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic labeled cohort");
  add_common(s_synth, synth.common);
  s_synth->add_option("--rows", synth.rows, "Number of residents")->check(CLI::PositiveNumber);
  s_synth->add_option("--targets", synth.targets, "Calibration targets JSON (default: built-in)");

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Fit a model and write a bundle");
  add_common(s_train, train.common);
  s_train->add_option("--input", train.input, "Labeled cohort CSV")->required();
  s_train->add_option("--kind", train.kind, "tree, forest or logit")
      ->check(CLI::IsMember({"tree", "forest", "logit"}));
  s_train->add_option("--test-fraction", train.test_fraction, "Held-out share, stratified by label (0: none)")
      ->check(CLI::Range(0.0, 0.99));
  s_train->add_option("--test-out", train.test_out, "Where to write the held-out rows");
  s_train->add_option("--report", train.report, "Training report JSON (default: stdout)");

  EvaluateArgs evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "Score a bundle on labeled data");
  add_common(s_eval, evaluate.common);
  s_eval->add_option("--bundle", evaluate.bundle, "Model bundle")->required();
  s_eval->add_option("--input", evaluate.input, "Labeled cohort CSV")->required();

  ExplainArgs explain;
  auto* s_explain = app.add_subcommand("explain", "Importance and SHAP exports");
  add_common(s_explain, explain.common);
  s_explain->add_option("--bundle", explain.bundle, "Model bundle")->required();
  s_explain->add_option("--input", explain.input, "Cohort CSV");
  s_explain->add_option("--method", explain.method, "mdi, permutation or shap")
      ->check(CLI::IsMember({"mdi", "permutation", "shap"}));
  s_explain->add_option("--row", explain.row, "Explain a single row (shap)");
  s_explain->add_option("--dependence", explain.dependence, "FEATURE_A,FEATURE_B dependence export (shap)");

  ExperimentArgs sweep;
  auto* s_sweep = app.add_subcommand("sweep", "Missing-proportion robustness sweep");
  add_common(s_sweep, sweep.common);
  s_sweep->add_option("--input", sweep.input, "Labeled training CSV")->required();
  s_sweep->add_option("--test", sweep.test, "Labeled test CSV (default: stratified split of --input)");

  ExperimentArgs rfe_args;
  auto* s_rfe = app.add_subcommand("rfe", "Recursive feature elimination trace");
  add_common(s_rfe, rfe_args.common);
  s_rfe->add_option("--input", rfe_args.input, "Labeled training CSV")->required();
  s_rfe->add_option("--test", rfe_args.test, "Labeled test CSV (default: stratified split of --input)");

  ServeArgs serve;
  auto* s_serve = app.add_subcommand("serve", "Serve /schema, /predict and /explain over HTTP");
  add_common(s_serve, serve.common);
  s_serve->add_option("--bundle", serve.bundle, "Model bundle")->required();
  s_serve->add_option("--host", serve.host, "Bind address");
  s_serve->add_option("--port", serve.port, "Port (0: any free port)")->check(CLI::Range(0, 65535));
  s_serve->add_option("--static", serve.static_dir, "Directory of web UI assets mounted at /");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << "error usage: " << msg << "\n";
    return 2;
  }

  try {
    if (s_ingest->parsed()) return cmd_ingest(ingest, out);
    if (s_cleanse->parsed()) return cmd_cleanse(cleanse_args, out);
    if (s_label->parsed()) return cmd_label(label_args, out);
    if (s_synth->parsed()) return cmd_synth(synth, out);
    if (s_train->parsed()) return cmd_train(train, out);
    if (s_eval->parsed()) return cmd_evaluate(evaluate, out);
    if (s_explain->parsed()) return cmd_explain(explain, out);
    if (s_sweep->parsed()) return cmd_sweep(sweep, out);
    if (s_rfe->parsed()) return cmd_rfe(rfe_args, out);
    if (s_serve->parsed()) return cmd_serve(serve, out);
  } catch (const Error& e) {
    err << "error " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace strokerisk
