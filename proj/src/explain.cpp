#include "strokerisk/explain.hpp"

#include "strokerisk/error.hpp"
#include "strokerisk/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace strokerisk {

Eigen::VectorXd shapley_values(int n, const std::function<double(std::uint32_t)>& value) {
  if (n < 0 || n > kMaxExactShapleyFeatures)
    throw Error(ErrorKind::Unsupported, "exact Shapley enumeration is limited to " +
                                            std::to_string(kMaxExactShapleyFeatures) +
                                            " features; use tree_shap for tree models");
  const std::uint32_t full = 1U << n;
  std::vector<double> v(full);
  for (std::uint32_t mask = 0; mask < full; ++mask) v[mask] = value(mask);

  // |S|! (n - |S| - 1)! / n!  ==  1 / (n * C(n - 1, |S|))
  std::vector<double> weight(static_cast<std::size_t>(std::max(n, 1)));
  double binom = 1.0;
  for (int s = 0; s < n; ++s) {
    weight[static_cast<std::size_t>(s)] = 1.0 / (n * binom);
    binom = binom * (n - 1 - s) / (s + 1);
  }

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1U << i;
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      sum += weight[static_cast<std::size_t>(std::popcount(mask))] * (v[mask | bit] - v[mask]);
    }
    phi[i] = sum;
  }
  return phi;
}

Explanation exact_shapley(const ModelOutput& model, std::span<const double> row, const Cohort& background,
                          int target_class) {
  if (background.row_count() == 0) throw Error(ErrorKind::InvalidArgument, "background sample is empty");
  if (row.size() != background.feature_count())
    throw Error(ErrorKind::InvalidArgument, "row width does not match the background sample");
  const int n = static_cast<int>(row.size());
  if (n > kMaxExactShapleyFeatures)
    throw Error(ErrorKind::Unsupported, "exact Shapley enumeration is limited to " +
                                            std::to_string(kMaxExactShapleyFeatures) +
                                            " features; use tree_shap for tree models");

  std::vector<double> mixed(row.size());
  auto value = [&](std::uint32_t mask) {
    double sum = 0.0;
    for (std::size_t b = 0; b < background.row_count(); ++b) {
      const auto base = background.row(b);
      for (int i = 0; i < n; ++i) mixed[static_cast<std::size_t>(i)] = (mask >> i) & 1U ? row[i] : base[i];
      sum += model(mixed);
    }
    return sum / static_cast<double>(background.row_count());
  };

  Explanation out;
  out.target_class = target_class;
  out.base_value = value(0);
  out.output = model(row);
  out.contributions = shapley_values(n, value);
  return out;
}

Explanation logit_shapley(const LogitModel& model, std::span<const double> row, const Cohort& background) {
  if (background.row_count() == 0) throw Error(ErrorKind::InvalidArgument, "background sample is empty");
  const std::size_t p = model.feature_count();
  if (row.size() != p || background.feature_count() != p)
    throw Error(ErrorKind::InvalidArgument, "row width does not match the logistic model");
  const int n = static_cast<int>(p);
  if (n > kMaxExactShapleyFeatures)
    throw Error(ErrorKind::Unsupported, "exact Shapley enumeration is limited to " +
                                            std::to_string(kMaxExactShapleyFeatures) + " features");

  auto term = [&](std::size_t k, double x) {
    const auto j = static_cast<Eigen::Index>(k);
    return model.coefficients[j + 1] * (x - model.means[j]) / model.scales[j];
  };
  const int low_bits = n / 2;
  const int high_bits = n - low_bits;
  const std::uint32_t full = 1U << n;
  std::vector<double> v(full, 0.0);
  std::vector<double> low(std::size_t{1} << low_bits), high(std::size_t{1} << high_bits);

  for (std::size_t b = 0; b < background.row_count(); ++b) {
    const auto base = background.row(b);
    // Sum of the terms of the low (high) features, taking each from `row`
    // when its bit is set and from the background row otherwise.
    auto fill = [&](std::vector<double>& table, int offset, int bits) {
      for (std::uint32_t m = 0; m < table.size(); ++m) {
        double s = 0.0;
        for (int i = 0; i < bits; ++i) {
          const auto k = static_cast<std::size_t>(offset + i);
          s += term(k, (m >> i) & 1U ? row[k] : base[k]);
        }
        table[m] = s;
      }
    };
    fill(low, 0, low_bits);
    fill(high, low_bits, high_bits);
    const std::uint32_t low_mask = (1U << low_bits) - 1U;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      v[mask] += sigmoid(model.coefficients[0] + low[mask & low_mask] + high[mask >> low_bits]);
    }
  }
  const double count = static_cast<double>(background.row_count());
  for (double& x : v) x /= count;

  Explanation out;
  out.target_class = 1;
  out.base_value = v[0];
  out.output = predict_proba(model, row);
  out.contributions = shapley_values(n, [&](std::uint32_t mask) { return v[mask]; });
  return out;
}

// ---------------------------------------------------------------------------
// Path-dependent TreeSHAP

namespace {

struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double weight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, double zero_fraction, double one_fraction, int feature) {
  const auto depth = path.size();
  path.push_back({feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0});
  for (auto i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    path[k + 1].weight += one_fraction * path[k].weight * static_cast<double>(k + 1) / static_cast<double>(depth + 1);
    path[k].weight = zero_fraction * path[k].weight * static_cast<double>(depth - k) / static_cast<double>(depth + 1);
  }
}

void unwind_path(Path& path, std::size_t index) {
  const auto depth = path.size() - 1;
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  for (auto i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    if (one != 0.0) {
      const double tmp = path[k].weight;
      path[k].weight = next * static_cast<double>(depth + 1) / (static_cast<double>(k + 1) * one);
      next = tmp - path[k].weight * zero * static_cast<double>(depth - k) / static_cast<double>(depth + 1);
    } else {
      path[k].weight = path[k].weight * static_cast<double>(depth + 1) / (zero * static_cast<double>(depth - k));
    }
  }
  for (std::size_t k = index; k < depth; ++k) {
    path[k].feature = path[k + 1].feature;
    path[k].zero_fraction = path[k + 1].zero_fraction;
    path[k].one_fraction = path[k + 1].one_fraction;
  }
  path.pop_back();
}

/// Total weight the path would have if element `index` were unwound.
double unwound_sum(const Path& path, std::size_t index) {
  const auto depth = path.size() - 1;
  const double one = path[index].one_fraction;
  const double zero = path[index].zero_fraction;
  double next = path[depth].weight;
  double total = 0.0;
  for (auto i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    if (one != 0.0) {
      const double tmp = next * static_cast<double>(depth + 1) / (static_cast<double>(k + 1) * one);
      total += tmp;
      next = path[k].weight - tmp * zero * static_cast<double>(depth - k) / static_cast<double>(depth + 1);
    } else {
      total += path[k].weight * static_cast<double>(depth + 1) / (zero * static_cast<double>(depth - k));
    }
  }
  return total;
}

class TreeShapWalker {
 public:
  TreeShapWalker(const TreeModel& tree, std::span<const double> row, int target, Eigen::VectorXd& phi)
      : tree_(tree), row_(row), target_(static_cast<std::size_t>(target)), phi_(phi) {}

  void walk(int node_index, Path path, double zero_fraction, double one_fraction, int feature) {
    extend_path(path, zero_fraction, one_fraction, feature);
    const auto& node = tree_.nodes[static_cast<std::size_t>(node_index)];
    if (node.is_leaf()) {
      const double value = static_cast<double>(node.class_counts[target_]) / node.n_samples;
      for (std::size_t i = 1; i < path.size(); ++i) {
        const double w = unwound_sum(path, i);
        phi_[path[i].feature] += w * (path[i].one_fraction - path[i].zero_fraction) * value;
      }
      return;
    }
    const int split = node.rule.feature;
    const bool goes_left = row_[static_cast<std::size_t>(split)] <= node.rule.threshold;
    const int hot = goes_left ? node.left : node.right;
    const int cold = goes_left ? node.right : node.left;
    const double cover = node.n_samples;
    const double hot_fraction = tree_.nodes[static_cast<std::size_t>(hot)].n_samples / cover;
    const double cold_fraction = tree_.nodes[static_cast<std::size_t>(cold)].n_samples / cover;

    double incoming_zero = 1.0;
    double incoming_one = 1.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      if (path[k].feature == split) {
        incoming_zero = path[k].zero_fraction;
        incoming_one = path[k].one_fraction;
        unwind_path(path, k);
        break;
      }
    }
    walk(hot, path, hot_fraction * incoming_zero, incoming_one, split);
    walk(cold, path, cold_fraction * incoming_zero, 0.0, split);
  }

 private:
  const TreeModel& tree_;
  std::span<const double> row_;
  std::size_t target_;
  Eigen::VectorXd& phi_;
};

void check_tree(const TreeModel& model, std::span<const double> row, int target_class) {
  if (model.nodes.empty()) throw Error(ErrorKind::InvalidArgument, "tree has no nodes");
  if (static_cast<int>(row.size()) != model.n_features)
    throw Error(ErrorKind::InvalidArgument, "row width does not match the model");
  if (target_class < 0 || target_class >= model.n_classes)
    throw Error(ErrorKind::InvalidArgument, "target class out of range");
  for (const auto& node : model.nodes)
    if (node.n_samples <= 0 || node.class_counts.size() != static_cast<std::size_t>(model.n_classes))
      throw Error(ErrorKind::InvalidArgument, "tree lacks node statistics needed for TreeSHAP");
}

}  // namespace

Explanation tree_shap(const TreeModel& model, std::span<const double> row, int target_class) {
  check_tree(model, row, target_class);
  Explanation out;
  out.target_class = target_class;
  out.contributions = Eigen::VectorXd::Zero(model.n_features);
  const auto& root = model.root();
  out.base_value = static_cast<double>(root.class_counts[static_cast<std::size_t>(target_class)]) / root.n_samples;
  out.output = predict_tree(model, row)[target_class];
  TreeShapWalker walker(model, row, target_class, out.contributions);
  walker.walk(0, Path{}, 1.0, 1.0, -1);
  return out;
}

Explanation tree_shap(const ForestModel& model, std::span<const double> row, int target_class) {
  Explanation out;
  out.target_class = target_class;
  out.contributions = Eigen::VectorXd::Zero(model.n_features);
  for (const auto& tree : model.trees) {
    const auto e = tree_shap(tree, row, target_class);
    out.base_value += e.base_value;
    out.output += e.output;
    out.contributions += e.contributions;
  }
  const auto n = static_cast<double>(model.trees.size());
  out.base_value /= n;
  out.output /= n;
  out.contributions /= n;
  return out;
}

Cohort sample_background(const Cohort& data, std::size_t n, std::uint64_t seed) {
  if (n >= data.row_count()) return Cohort(data.schema(), data.cells());
  std::vector<std::size_t> idx(data.row_count());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed, 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  const Cohort rows = data.select_rows(idx);
  return Cohort(rows.schema(), rows.cells());
}

// ---------------------------------------------------------------------------

PermutationReport permutation_importance(const Classifier& model, const Cohort& data, Metric metric, int repetitions,
                                         std::uint64_t seed) {
  if (repetitions < 1) throw Error(ErrorKind::InvalidArgument, "permutation importance needs K >= 1");
  if (!data.has_labels()) throw Error(ErrorKind::InvalidArgument, "permutation importance needs labels");
  const auto& y = data.labels();
  int n_classes = data.class_count();
  if (metric == Metric::WeightedPrecision) {
    const bool single = std::all_of(y.begin(), y.end(), [&](int l) { return l == y.front(); });
    if (y.empty() || single)
      throw Error(ErrorKind::InvalidArgument, "weighted precision is undefined on single-class data");
  }
  auto score_of = [&](const std::vector<int>& pred) {
    int classes = n_classes;
    for (int p : pred) classes = std::max(classes, p + 1);
    return score(metric, y, pred, classes);
  };

  PermutationReport report;
  report.feature_names = data.schema().names();
  report.metric = metric;
  report.repetitions = repetitions;
  report.seed = seed;
  report.baseline = score_of(model(data));
  const auto features = static_cast<Eigen::Index>(data.feature_count());
  report.scores.resize(features, repetitions);

  CellMatrix cells = data.cells();
  for (Eigen::Index f = 0; f < features; ++f) {
    const Eigen::VectorXd original = cells.col(f);
    for (int k = 0; k < repetitions; ++k) {
      auto rng = make_rng(seed, (static_cast<std::uint64_t>(f) << 32) | static_cast<std::uint64_t>(k));
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(cells.rows()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index i = 0; i < cells.rows(); ++i) cells(i, f) = original[perm[static_cast<std::size_t>(i)]];
      report.scores(f, k) = score_of(model(data.with_cells(cells)));
      cells.col(f) = original;
    }
  }
  report.importance.resize(report.scores.rows());
  for (Eigen::Index i = 0; i < report.scores.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < report.scores.cols(); ++j) sum += report.scores(i, j);
    report.importance[i] = report.baseline - sum / static_cast<double>(repetitions);
  }
  return report;
}

// ---------------------------------------------------------------------------

ShapSummary shap_summary_export(const ForestModel& model, const Cohort& data, int target_class) {
  ShapSummary out;
  out.feature_names = data.schema().names();
  const auto n_features = data.feature_count();
  out.records.reserve(data.row_count() * n_features);
  Eigen::VectorXd mean_abs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_features));
  for (std::size_t i = 0; i < data.row_count(); ++i) {
    const auto row = data.row(i);
    const auto e = tree_shap(model, row, target_class);
    out.base_values.push_back(e.base_value);
    for (std::size_t j = 0; j < n_features; ++j) {
      const double phi = e.contributions[static_cast<Eigen::Index>(j)];
      out.records.push_back({i, j, phi, row[j]});
      mean_abs[static_cast<Eigen::Index>(j)] += std::abs(phi);
    }
  }
  if (data.row_count() > 0) mean_abs /= static_cast<double>(data.row_count());
  for (std::size_t j = 0; j < n_features; ++j) out.ranking.emplace_back(j, mean_abs[static_cast<Eigen::Index>(j)]);
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<DependencePoint> shap_dependence_export(const ForestModel& model, const Cohort& data,
                                                    std::string_view feature_a, std::string_view feature_b,
                                                    int target_class) {
  const auto a = data.schema().require(feature_a);
  const auto b = data.schema().require(feature_b);
  std::vector<DependencePoint> out;
  out.reserve(data.row_count());
  for (std::size_t i = 0; i < data.row_count(); ++i) {
    const auto row = data.row(i);
    const auto e = tree_shap(model, row, target_class);
    out.push_back({row[a], e.contributions[static_cast<Eigen::Index>(a)], row[b]});
  }
  return out;
}

}  // namespace strokerisk
