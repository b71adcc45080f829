#include "strokerisk/evaluation.hpp"

#include "strokerisk/error.hpp"
#include "strokerisk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace strokerisk {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Accuracy: return "accuracy";
    case Metric::WeightedPrecision: return "weighted_precision";
  }
  return "?";
}

std::vector<std::string> risk_level_names() { return {"Low", "Medium", "High"}; }

ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           const std::vector<std::string>& class_names) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorKind::InvalidArgument, "y_true and y_pred differ in length");
  if (y_true.empty()) throw Error(ErrorKind::InvalidArgument, "classification report needs at least one sample");
  int k = static_cast<int>(class_names.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_pred[i] < 0) throw Error(ErrorKind::InvalidArgument, "negative class index");
    k = std::max({k, y_true[i] + 1, y_pred[i] + 1});
  }

  ClassificationReport report;
  report.confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < y_true.size(); ++i) ++report.confusion(y_true[i], y_pred[i]);

  const auto total = static_cast<double>(y_true.size());
  report.accuracy = report.confusion.diagonal().sum() / total;
  for (int c = 0; c < k; ++c) {
    ClassMetrics m;
    m.name = c < static_cast<int>(class_names.size()) ? class_names[static_cast<std::size_t>(c)] : std::to_string(c);
    const double tp = report.confusion(c, c);
    const double predicted = report.confusion.col(c).sum();
    const double actual = report.confusion.row(c).sum();
    m.support = static_cast<std::size_t>(actual);
    if (predicted > 0) m.precision = tp / predicted;
    else report.warnings.push_back("class '" + m.name + "' is never predicted; precision set to 0");
    if (actual > 0) m.recall = tp / actual;
    else report.warnings.push_back("class '" + m.name + "' has no true samples; recall set to 0");
    if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    report.classes.push_back(std::move(m));
  }

  report.macro_avg.name = "macro avg";
  report.weighted_avg.name = "weighted avg";
  for (const auto& m : report.classes) {
    report.macro_avg.precision += m.precision / k;
    report.macro_avg.recall += m.recall / k;
    report.macro_avg.f1 += m.f1 / k;
    const double w = static_cast<double>(m.support) / total;
    report.weighted_avg.precision += w * m.precision;
    report.weighted_avg.recall += w * m.recall;
    report.weighted_avg.f1 += w * m.f1;
  }
  report.macro_avg.support = report.weighted_avg.support = y_true.size();
  return report;
}

double score(Metric metric, std::span<const int> y_true, std::span<const int> y_pred, int n_classes) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw Error(ErrorKind::InvalidArgument, "score needs equal-length, non-empty label vectors");
  if (metric == Metric::Accuracy) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hit += y_true[i] == y_pred[i];
    return static_cast<double>(hit) / static_cast<double>(y_true.size());
  }
  std::vector<double> tp(static_cast<std::size_t>(n_classes)), predicted(tp.size()), support(tp.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto t = static_cast<std::size_t>(y_true[i]);
    const auto p = static_cast<std::size_t>(y_pred[i]);
    support[t] += 1;
    predicted[p] += 1;
    if (t == p) tp[t] += 1;
  }
  // Same operation order as classification_report, so both agree bitwise.
  const double total = static_cast<double>(y_true.size());
  double weighted = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) {
    const double precision = predicted[c] > 0 ? tp[c] / predicted[c] : 0.0;
    weighted += (support[c] / total) * precision;
  }
  return weighted;
}

// ---------------------------------------------------------------------------

std::vector<LevelProbability> risk_group_probability(const LogitModel& model, const Cohort& test) {
  if (!test.has_labels()) throw Error(ErrorKind::InvalidArgument, "test cohort carries no risk levels");
  const auto cols = model.columns_in(test.schema());
  std::vector<std::vector<double>> groups(kRiskLevels);
  std::vector<double> features(cols.size());
  for (std::size_t i = 0; i < test.row_count(); ++i) {
    const int level = test.labels()[i];
    if (level < 0 || level >= kRiskLevels) throw Error(ErrorKind::InvalidArgument, "row without a CSPP level");
    const auto row = test.row(i);
    for (std::size_t k = 0; k < cols.size(); ++k) features[k] = row[cols[k]];
    groups[static_cast<std::size_t>(level)].push_back(predict_proba(model, features));
  }
  std::vector<LevelProbability> out;
  for (int level = 0; level < kRiskLevels; ++level) {
    const auto& p = groups[static_cast<std::size_t>(level)];
    if (p.empty())
      throw Error(ErrorKind::InvalidArgument,
                  "no test rows at level " + std::string(to_string(static_cast<RiskLabel>(level))));
    const double n = static_cast<double>(p.size());
    const double mean = std::accumulate(p.begin(), p.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : p) ss += (v - mean) * (v - mean);
    const double sd = p.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    const double half = kWaldZ95 * sd / std::sqrt(n);
    out.push_back({static_cast<RiskLabel>(level), p.size(), mean, mean - half, mean + half});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct MeanBand {
  double mean, low, high;
};

MeanBand mean_band(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : xs) ss += (v - mean) * (v - mean);
  const double half = xs.size() > 1 ? kWaldZ95 * std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
  return {mean, mean - half, mean + half};
}

}  // namespace

SweepResult missing_sweep(const ForestModel& model, const Cohort& test, const SweepConfig& config) {
  if (config.repetitions < 2) throw Error(ErrorKind::InvalidArgument, "sweep needs at least two repetitions");
  if (!test.has_labels()) throw Error(ErrorKind::InvalidArgument, "sweep needs a labeled test set");
  for (std::size_t k = 0; k < config.proportions.size(); ++k) {
    const double p = config.proportions[k];
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "missing proportions must lie in [0, 1]");
    if (k > 0 && !(p > config.proportions[k - 1]))
      throw Error(ErrorKind::InvalidArgument, "missing proportions must be strictly increasing");
  }
  std::vector<std::string> features = config.features.empty() ? test.schema().names() : config.features;
  const int n_classes = std::max(model.n_classes, test.class_count());

  auto weighted_precision = [&](const Cohort& data) {
    return score(Metric::WeightedPrecision, test.labels(), predict_classes(model, data), n_classes);
  };

  SweepResult result;
  result.baseline = weighted_precision(test);
  const auto n = test.row_count();
  for (std::size_t fi = 0; fi < features.size(); ++fi) {
    const auto column = static_cast<Eigen::Index>(test.schema().require(features[fi]));
    SweepCurve curve;
    curve.feature = features[fi];
    for (std::size_t pi = 0; pi < config.proportions.size(); ++pi) {
      const double p = config.proportions[pi];
      const auto count = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
      SweepPoint point;
      point.proportion = p;
      for (int r = 0; r < config.repetitions; ++r) {
        if (count == 0) {
          point.scores.push_back(result.baseline);
          continue;
        }
        const std::uint64_t stream = (static_cast<std::uint64_t>(fi) << 40) | (static_cast<std::uint64_t>(pi) << 20) |
                                     static_cast<std::uint64_t>(r);
        auto rng = make_rng(config.seed, stream);
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        CellMatrix cells = test.cells();
        for (std::size_t k = 0; k < count; ++k) cells(static_cast<Eigen::Index>(rows[k]), column) = kMissing;
        point.scores.push_back(weighted_precision(test.with_cells(std::move(cells))));
      }
      const auto band = mean_band(point.scores);
      point.mean = band.mean;
      point.band_low = band.low;
      point.band_high = band.high;
      curve.points.push_back(std::move(point));
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

SweepResult missing_sweep(const ForestTrainer& trainer, const Cohort& train, const Cohort& test,
                          const SweepConfig& config) {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < train.feature_count(); ++j) {
    const auto& name = train.schema()[j].name;
    if (std::find(config.drop_columns.begin(), config.drop_columns.end(), name) == config.drop_columns.end())
      keep.push_back(j);
  }
  for (const auto& f : config.features)
    if (std::find(config.drop_columns.begin(), config.drop_columns.end(), f) != config.drop_columns.end())
      throw Error(ErrorKind::InvalidArgument, "swept feature '" + f + "' is also in drop_columns");
  const Cohort reduced_train = train.select_columns(keep);
  const auto names = reduced_train.schema().names();
  const Cohort reduced_test = test.select_columns(names);
  return missing_sweep(trainer(reduced_train), reduced_test, config);
}

// ---------------------------------------------------------------------------

RfeTrace rfe(const ForestTrainer& trainer, const Cohort& train, const Cohort& test, std::size_t target_n) {
  if (target_n < 1 || target_n >= train.feature_count())
    throw Error(ErrorKind::InvalidArgument, "RFE target must satisfy 1 <= target < feature count");
  std::vector<std::string> remaining = train.schema().names();
  const int n_classes = std::max(train.class_count(), test.class_count());
  std::vector<std::string> class_names;
  for (int c = 0; c < n_classes; ++c)
    class_names.push_back(n_classes == kRiskLevels ? risk_level_names()[static_cast<std::size_t>(c)] : std::to_string(c));

  RfeTrace trace;
  while (true) {
    const Cohort tr = train.select_columns(remaining);
    const Cohort te = test.select_columns(remaining);
    const ForestModel model = trainer(tr);
    const auto pred = predict_classes(model, te);
    const auto report = classification_report(te.labels(), pred, class_names);

    RfeStep step;
    step.features = remaining;
    step.importance = mdi_importance(model);
    for (const auto& m : report.classes) step.class_precision.push_back(m.precision);
    step.weighted_precision = report.weighted_avg.precision;
    if (remaining.size() > target_n) {
      Eigen::Index least = 0;
      double lowest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < step.importance.size(); ++j) {
        if (step.importance[j] < lowest) {
          lowest = step.importance[j];
          least = j;
        }
      }
      step.removed = remaining[static_cast<std::size_t>(least)];
      remaining.erase(remaining.begin() + least);
      trace.steps.push_back(std::move(step));
    } else {
      trace.steps.push_back(std::move(step));
      break;
    }
  }
  return trace;
}

std::size_t precision_plateau(const RfeTrace& trace, double tolerance) {
  if (trace.steps.empty()) throw Error(ErrorKind::InvalidArgument, "empty RFE trace");
  double best = 0.0;
  for (const auto& s : trace.steps) best = std::max(best, s.weighted_precision);
  // steps run from most to fewest features
  std::size_t plateau = trace.steps.front().features.size();
  for (const auto& s : trace.steps) {
    if (s.weighted_precision < best - tolerance) break;
    plateau = s.features.size();
  }
  return plateau;
}

}  // namespace strokerisk
