#include "strokerisk/tree.hpp"

#include "tree_builder.hpp"

#include <algorithm>
#include <numeric>

namespace strokerisk {

void TrainConfig::validate() const {
  if (max_depth < 1) throw Error(ErrorKind::InvalidArgument, "max_depth must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorKind::InvalidArgument, "min_samples_split must be >= 2");
  if (min_samples_leaf < 1) throw Error(ErrorKind::InvalidArgument, "min_samples_leaf must be >= 1");
  if (!(min_impurity_decrease >= 0.0)) throw Error(ErrorKind::InvalidArgument, "min_impurity_decrease must be >= 0");
  if (n_trees < 1) throw Error(ErrorKind::InvalidArgument, "n_trees must be >= 1");
  if (feature_subsample_size < 0) throw Error(ErrorKind::InvalidArgument, "feature_subsample_size must be >= 0");
  if (threads < 0) throw Error(ErrorKind::InvalidArgument, "threads must be >= 0");
}

namespace detail {

namespace {

double node_impurity(SplitCriterion criterion, std::span<const int> counts) {
  return criterion == SplitCriterion::Gini ? gini(counts) : entropy(counts);
}

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
};

}  // namespace

TreeBuilder::TreeBuilder(const CellMatrix& x, std::span<const int> y, int n_classes, const TrainConfig& config,
                         int max_features, Rng* rng)
    : x_(x), y_(y), n_classes_(n_classes), config_(config), max_features_(max_features), rng_(rng) {}

TreeModel TreeBuilder::build(std::vector<int> rows) {
  model_ = TreeModel{};
  model_.n_classes = n_classes_;
  model_.n_features = static_cast<int>(x_.cols());
  model_.config = config_;
  root_samples_ = static_cast<double>(rows.size());
  grow(rows, 0);
  return std::move(model_);
}

int TreeBuilder::grow(std::vector<int>& rows, int depth) {
  const int id = static_cast<int>(model_.nodes.size());
  model_.nodes.emplace_back();
  {
    TreeNode& node = model_.nodes.back();
    node.n_samples = static_cast<int>(rows.size());
    node.class_counts.assign(static_cast<std::size_t>(n_classes_), 0);
    for (int r : rows) ++node.class_counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
    node.impurity = node_impurity(config_.criterion, node.class_counts);
  }
  const TreeNode snapshot = model_.nodes[static_cast<std::size_t>(id)];
  const int n = snapshot.n_samples;
  if (depth >= config_.max_depth || n < config_.min_samples_split || snapshot.impurity <= 0.0) return id;

  const auto features = candidate_features();
  Candidate best;
  std::vector<std::pair<double, int>> column(rows.size());
  std::vector<int> left_counts(static_cast<std::size_t>(n_classes_));
  std::vector<int> right_counts(static_cast<std::size_t>(n_classes_));
  for (int f : features) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const int r = rows[k];
      column[k] = {x_(r, f), y_[static_cast<std::size_t>(r)]};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::fill(left_counts.begin(), left_counts.end(), 0);
    right_counts = snapshot.class_counts;
    for (int k = 0; k + 1 < n; ++k) {
      const auto cls = static_cast<std::size_t>(column[static_cast<std::size_t>(k)].second);
      ++left_counts[cls];
      --right_counts[cls];
      const double lo = column[static_cast<std::size_t>(k)].first;
      const double hi = column[static_cast<std::size_t>(k) + 1].first;
      if (lo == hi) continue;
      const int n_left = k + 1;
      const int n_right = n - n_left;
      if (n_left < config_.min_samples_leaf || n_right < config_.min_samples_leaf) continue;
      const double decrease =
          snapshot.impurity -
          (static_cast<double>(n_left) / n) * node_impurity(config_.criterion, left_counts) -
          (static_cast<double>(n_right) / n) * node_impurity(config_.criterion, right_counts);
      if (decrease > best.decrease + kTieTolerance) best = {f, split_threshold(lo, hi), decrease};
    }
  }
  if (best.feature < 0 || best.decrease <= kTieTolerance) return id;
  if ((n / root_samples_) * best.decrease < config_.min_impurity_decrease) return id;

  std::vector<int> left_rows, right_rows;
  for (int r : rows) (x_(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  const int left = grow(left_rows, depth + 1);
  const int right = grow(right_rows, depth + 1);
  TreeNode& node = model_.nodes[static_cast<std::size_t>(id)];
  node.rule = {best.feature, best.threshold};
  node.left = left;
  node.right = right;
  return id;
}

std::vector<int> TreeBuilder::candidate_features() {
  const int total = static_cast<int>(x_.cols());
  std::vector<int> features(static_cast<std::size_t>(total));
  std::iota(features.begin(), features.end(), 0);
  if (rng_ == nullptr || max_features_ >= total) return features;
  for (int i = 0; i < max_features_; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(pick(*rng_))]);
  }
  features.resize(static_cast<std::size_t>(max_features_));
  std::sort(features.begin(), features.end());
  return features;
}

double split_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

void check_training_data(const Cohort& train) {
  if (train.row_count() == 0) throw Error(ErrorKind::InvalidArgument, "cannot fit on an empty cohort");
  if (!train.has_labels()) throw Error(ErrorKind::InvalidArgument, "training cohort has no labels");
  for (int l : train.labels())
    if (l < 0) throw Error(ErrorKind::InvalidArgument, "training cohort has unlabeled rows");
  if (train.feature_count() == 0) throw Error(ErrorKind::InvalidArgument, "training cohort has no features");
}

}  // namespace detail

TreeModel fit_tree(const Cohort& train, const TrainConfig& config) {
  config.validate();
  detail::check_training_data(train);
  std::vector<int> rows(train.row_count());
  std::iota(rows.begin(), rows.end(), 0);
  TrainConfig stored = config;
  stored.threads = 0;
  detail::TreeBuilder builder(train.cells(), train.labels(), train.class_count(), stored,
                              static_cast<int>(train.feature_count()), nullptr);
  return builder.build(std::move(rows));
}

int TreeModel::leaf_index(std::span<const double> row) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(node.rule.feature)] <= node.rule.threshold ? node.left : node.right;
  }
  return i;
}

int TreeModel::depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& node = nodes[static_cast<std::size_t>(i)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

int TreeModel::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
}

Eigen::VectorXd predict_tree(const TreeModel& model, std::span<const double> row) {
  if (static_cast<int>(row.size()) != model.n_features)
    throw Error(ErrorKind::InvalidArgument, "row width does not match the model");
  const auto& leaf = model.nodes[static_cast<std::size_t>(model.leaf_index(row))];
  Eigen::VectorXd p(model.n_classes);
  for (int c = 0; c < model.n_classes; ++c)
    p[c] = static_cast<double>(leaf.class_counts[static_cast<std::size_t>(c)]) / leaf.n_samples;
  return p;
}

int argmax(const Eigen::VectorXd& probabilities) {
  Eigen::Index best = 0;
  probabilities.maxCoeff(&best);
  return static_cast<int>(best);
}

Eigen::VectorXd weighted_impurity_decrease(const TreeModel& model) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.n_features);
  const double total = model.root().n_samples;
  for (const auto& node : model.nodes) {
    if (node.is_leaf()) continue;
    const auto& l = model.nodes[static_cast<std::size_t>(node.left)];
    const auto& r = model.nodes[static_cast<std::size_t>(node.right)];
    out[node.rule.feature] +=
        (node.n_samples * node.impurity - l.n_samples * l.impurity - r.n_samples * r.impurity) / total;
  }
  return out;
}

namespace {
Eigen::VectorXd normalised(Eigen::VectorXd v) {
  const double sum = v.sum();
  if (sum > 0.0) v /= sum;
  else v.setZero();
  return v;
}
}  // namespace

Eigen::VectorXd mdi_importance(const TreeModel& model) { return normalised(weighted_impurity_decrease(model)); }

Eigen::VectorXd mdi_importance(const ForestModel& model) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.n_features);
  for (const auto& tree : model.trees) sum += weighted_impurity_decrease(tree);
  return normalised(sum / static_cast<double>(model.trees.size()));
}

}  // namespace strokerisk
