#ifndef STROKERISK_TREE_HPP
#define STROKERISK_TREE_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace strokerisk {

enum class SplitCriterion { Gini, Entropy };

/// Hyperparameters for trees and forests. `feature_subsample_size == 0` means
/// ceil(sqrt(n_features)) for forests; single trees always see every feature.
struct TrainConfig {
  int max_depth = 12;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;
  int n_trees = 100;
  int feature_subsample_size = 0;
  bool bootstrap = true;
  SplitCriterion criterion = SplitCriterion::Gini;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: one per hardware thread

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Gini impurity 1 - sum p_i^2 of a class histogram.
template <typename Count>
double gini(std::span<const Count> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "impurity of an empty node");
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

/// Shannon entropy (natural log) of a class histogram.
template <typename Count>
double entropy(std::span<const Count> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, "impurity of an empty node");
  double h = 0.0;
  for (auto c : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

inline double gini(std::initializer_list<int> counts) {
  return gini(std::span<const int>(counts.begin(), counts.size()));
}

/// Rows with `value <= threshold` go left.
struct SplitRule {
  int feature = -1;
  double threshold = 0.0;

  friend bool operator==(const SplitRule&, const SplitRule&) = default;
};

/// Node of a binary tree stored in a flat array. Leaves have rule.feature < 0
/// and no children. class_counts includes bootstrap multiplicity.
struct TreeNode {
  SplitRule rule;
  int left = -1;
  int right = -1;
  int n_samples = 0;
  std::vector<int> class_counts;
  double impurity = 0.0;

  bool is_leaf() const noexcept { return rule.feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int n_classes = 0;
  int n_features = 0;
  TrainConfig config;

  const TreeNode& root() const { return nodes.front(); }
  int depth() const;
  int leaf_count() const;
  /// Index of the leaf `row` falls into.
  int leaf_index(std::span<const double> row) const;

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  int feature_subsample_size = 0;
  int n_classes = 0;
  int n_features = 0;
  TrainConfig config;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

/// Greedy CART on the full cohort. Candidate thresholds are midpoints between
/// consecutive distinct values; ties go to the lowest feature index, then the
/// lowest threshold.
TreeModel fit_tree(const Cohort& train, const TrainConfig& config = {});

/// Leaf class frequencies.
Eigen::VectorXd predict_tree(const TreeModel& model, std::span<const double> row);

/// Bootstrap forest. Tree t draws from an mt19937_64 seeded with
/// splitmix64(config.seed ^ t): first the bootstrap rows, then the candidate
/// features of each split in depth-first order.
ForestModel fit_forest(const Cohort& train, const TrainConfig& config = {});

/// Mean of per-tree class probabilities.
Eigen::VectorXd predict_forest(const ForestModel& model, std::span<const double> row);

/// Majority vote over per-tree argmax; ties go to the lower class. Kept as a
/// reference next to the averaging rule.
int predict_forest_vote(const ForestModel& model, std::span<const double> row);

/// Wraps one tree as a single-tree forest so ensemble-level code can take it.
ForestModel as_forest(TreeModel tree);

int argmax(const Eigen::VectorXd& probabilities);

/// Predicted class for every row.
std::vector<int> predict_classes(const ForestModel& model, const Cohort& data);

/// Rows of the training set never drawn into tree t's bootstrap sample.
std::vector<std::size_t> out_of_bag_rows(const ForestModel& model, std::size_t tree, std::size_t train_rows);

/// Accuracy of out-of-bag averaged predictions over rows with at least one
/// out-of-bag tree.
double out_of_bag_accuracy(const ForestModel& model, const Cohort& train);

/// Mean decrease in impurity per feature, normalised to sum to one (all zeros
/// for a single-leaf model). For forests the raw per-tree sums are averaged
/// before normalising.
Eigen::VectorXd mdi_importance(const TreeModel& model);
Eigen::VectorXd mdi_importance(const ForestModel& model);

/// Un-normalised sum over the tree's splits of p(node) * impurity decrease.
Eigen::VectorXd weighted_impurity_decrease(const TreeModel& model);

}  // namespace strokerisk

#endif  // STROKERISK_TREE_HPP
