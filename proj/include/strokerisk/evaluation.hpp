#ifndef STROKERISK_EVALUATION_HPP
#define STROKERISK_EVALUATION_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/logit.hpp"
#include "strokerisk/tree.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace strokerisk {

enum class Metric { Accuracy, WeightedPrecision };

std::string_view to_string(Metric metric);

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  ClassMetrics macro_avg;
  ClassMetrics weighted_avg;
  Eigen::MatrixXi confusion;  // rows: true class, cols: predicted class
  std::vector<std::string> warnings;
};

/// One-vs-rest precision/recall/F1 per class. A class that is never predicted
/// (or never present) scores 0 on the undefined ratio and adds a warning.
ClassificationReport classification_report(std::span<const int> y_true, std::span<const int> y_pred,
                                           const std::vector<std::string>& class_names);

/// Score of predictions under `metric`, with `n_classes` classes.
double score(Metric metric, std::span<const int> y_true, std::span<const int> y_pred, int n_classes);

std::vector<std::string> risk_level_names();

// ---------------------------------------------------------------------------
// Mean predicted probability per CSPP level

struct LevelProbability {
  RiskLabel level = RiskLabel::Low;
  std::size_t count = 0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// `test` carries CSPP levels as labels. CI = mean +/- 1.96 * sd / sqrt(n)
/// with the sample standard deviation.
std::vector<LevelProbability> risk_group_probability(const LogitModel& model, const Cohort& test);

// ---------------------------------------------------------------------------
// Missing-proportion sweep

using ForestTrainer = std::function<ForestModel(const Cohort&)>;

struct SweepConfig {
  std::vector<std::string> features;  // empty: every feature
  std::vector<double> proportions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repetitions = 100;
  std::uint64_t seed = 0;
  /// Columns removed from train and test before fitting (one member of each
  /// strongly correlated pair).
  std::vector<std::string> drop_columns{"Height", "Weight"};
};

struct SweepPoint {
  double proportion = 0.0;
  double mean = 0.0;
  double band_low = 0.0;
  double band_high = 0.0;
  std::vector<double> scores;  // one per repetition
};

struct SweepCurve {
  std::string feature;
  std::vector<SweepPoint> points;
};

struct SweepResult {
  double baseline = 0.0;  // weighted precision on the uncorrupted test set
  std::vector<SweepCurve> curves;
};

/// Test-time robustness: the model stays fixed while round(p * n) random test
/// cells of one feature are set to the missing sentinel, R times per
/// proportion. The band is the normal-approximation 95% interval of the mean.
SweepResult missing_sweep(const ForestModel& model, const Cohort& test, const SweepConfig& config);

/// Drops `config.drop_columns`, trains once, then sweeps.
SweepResult missing_sweep(const ForestTrainer& trainer, const Cohort& train, const Cohort& test,
                          const SweepConfig& config);

// ---------------------------------------------------------------------------
// Recursive feature elimination

struct RfeStep {
  std::vector<std::string> features;  // remaining at this step
  Eigen::VectorXd importance;         // MDI of the model fitted on `features`
  std::vector<double> class_precision;
  double weighted_precision = 0.0;
  std::optional<std::string> removed;  // least important feature, dropped before the next step
};

struct RfeTrace {
  std::vector<RfeStep> steps;
};

/// Fit, score on `test`, drop the lowest-MDI feature (lowest index on ties);
/// repeat down to `target_n` features.
RfeTrace rfe(const ForestTrainer& trainer, const Cohort& train, const Cohort& test, std::size_t target_n);

/// Smallest feature count n such that every step with at least n features
/// reaches the best weighted precision minus `tolerance`.
std::size_t precision_plateau(const RfeTrace& trace, double tolerance);

}  // namespace strokerisk

#endif  // STROKERISK_EVALUATION_HPP
