#ifndef STROKERISK_EXPLAIN_HPP
#define STROKERISK_EXPLAIN_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/evaluation.hpp"
#include "strokerisk/tree.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strokerisk {

/// Additive attribution of one model output: output = base_value + sum(contributions).
struct Explanation {
  double base_value = 0.0;
  Eigen::VectorXd contributions;
  double output = 0.0;
  int target_class = 0;
};

/// Scalar model output for one row (e.g. probability of a class).
using ModelOutput = std::function<double(std::span<const double>)>;

inline constexpr int kMaxExactShapleyFeatures = 20;

/// Shapley values of an arbitrary set function over n players, by full
/// enumeration. `value(mask)` is the worth of the coalition whose bit i is set
/// iff player i belongs to it.
Eigen::VectorXd shapley_values(int n, const std::function<double(std::uint32_t)>& value);

/// Interventional Shapley values: v(S) averages the model over background
/// rows with features in S taken from `row`. base_value = v(empty set).
Explanation exact_shapley(const ModelOutput& model, std::span<const double> row, const Cohort& background,
                          int target_class = 0);

/// Same value function as exact_shapley for a logistic model, with `row` and
/// the background laid out in model feature order. Linear predictors of all
/// coalitions are assembled from two half-tables, so no per-coalition dot
/// products are needed.
Explanation logit_shapley(const LogitModel& model, std::span<const double> row, const Cohort& background);

/// Path-dependent TreeSHAP on the probability of `target_class`, using node
/// sample counts as covers.
Explanation tree_shap(const TreeModel& model, std::span<const double> row, int target_class);
/// Mean of the per-tree explanations.
Explanation tree_shap(const ForestModel& model, std::span<const double> row, int target_class);

/// `n` rows drawn without replacement (all rows when the cohort is smaller),
/// deterministic per seed, kept in original order. Features only.
Cohort sample_background(const Cohort& data, std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Permutation importance

using Classifier = std::function<std::vector<int>(const Cohort&)>;

struct PermutationReport {
  std::vector<std::string> feature_names;
  Metric metric = Metric::WeightedPrecision;
  int repetitions = 0;
  std::uint64_t seed = 0;
  double baseline = 0.0;
  Eigen::MatrixXd scores;      // feature x repetition
  /// baseline - (left-to-right sum of the feature's scores) / repetitions
  Eigen::VectorXd importance;
};

/// Shuffles one column at a time (K times each, permutation seeded by
/// (seed, feature, repetition)) and records the score drop.
PermutationReport permutation_importance(const Classifier& model, const Cohort& data, Metric metric, int repetitions,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// SHAP exports

struct ShapRecord {
  std::size_t row = 0;
  std::size_t feature = 0;
  double shap = 0.0;
  double value = 0.0;
};

struct ShapSummary {
  std::vector<std::string> feature_names;
  std::vector<ShapRecord> records;  // row-major: every feature of row 0, then row 1, ...
  std::vector<std::pair<std::size_t, double>> ranking;  // (feature, mean |shap|), descending
  std::vector<double> base_values;  // one per row
};

ShapSummary shap_summary_export(const ForestModel& model, const Cohort& data, int target_class);

struct DependencePoint {
  double value_a = 0.0;
  double shap_a = 0.0;
  double value_b = 0.0;
};

std::vector<DependencePoint> shap_dependence_export(const ForestModel& model, const Cohort& data,
                                                    std::string_view feature_a, std::string_view feature_b,
                                                    int target_class);

}  // namespace strokerisk

#endif  // STROKERISK_EXPLAIN_HPP
