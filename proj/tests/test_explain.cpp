#include "strokerisk/error.hpp"
#include "strokerisk/explain.hpp"
#include "strokerisk/logit.hpp"

#include "oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace strokerisk;
using strokerisk::test::make_cohort;

namespace {

TreeNode leaf(std::vector<int> counts) {
  TreeNode n;
  for (int c : counts) n.n_samples += c;
  n.class_counts = std::move(counts);
  return n;
}

TreeNode split(int feature, double threshold, int left, int right, std::vector<int> counts) {
  TreeNode n = leaf(std::move(counts));
  n.rule = {feature, threshold};
  n.left = left;
  n.right = right;
  return n;
}

/// Depth-2 tree on (x0, x1): x0 <= 0.5 then x1 <= 0.5 on both sides.
TreeModel and_tree(std::vector<int> a, std::vector<int> b, std::vector<int> c, std::vector<int> d) {
  TreeModel t;
  t.n_classes = 2;
  t.n_features = 2;
  auto sum = [](const std::vector<int>& u, const std::vector<int>& v) { return std::vector<int>{u[0] + v[0], u[1] + v[1]}; };
  t.nodes = {split(0, 0.5, 1, 4, sum(sum(a, b), sum(c, d))),
             split(1, 0.5, 2, 3, sum(a, b)),
             leaf(a),
             leaf(b),
             split(1, 0.5, 5, 6, sum(c, d)),
             leaf(c),
             leaf(d)};
  return t;
}

/// Interventional value table and Shapley weights, expanded by hand.
Eigen::VectorXd enumerate(const ModelOutput& f, const std::vector<double>& row, const Cohort& background) {
  const int n = static_cast<int>(row.size());
  std::vector<double> v(std::size_t(1) << n, 0.0);
  for (unsigned s = 0; s < v.size(); ++s) {
    for (std::size_t b = 0; b < background.row_count(); ++b) {
      std::vector<double> mixed(background.row(b).begin(), background.row(b).end());
      for (int j = 0; j < n; ++j)
        if (s & (1u << j)) mixed[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j)];
      v[s] += f(mixed) / background.row_count();
    }
  }
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (unsigned s = 0; s < v.size(); ++s) {
      if (s & (1u << i)) continue;
      const int k = __builtin_popcount(s);
      phi[i] += oracle::factorial(k) * oracle::factorial(n - k - 1) / oracle::factorial(n) * (v[s | (1u << i)] - v[s]);
    }
  return phi;
}

ModelOutput tree_output(const TreeModel& t, int target) {
  return [&t, target](std::span<const double> r) { return predict_tree(t, r)[target]; };
}

}  // namespace

TEST_CASE("shapley values: single player and efficiency") {
  const auto one = shapley_values(1, [](std::uint32_t s) { return s ? 5.0 : 2.0; });
  CHECK(one[0] == 3.0);
  const auto phi = shapley_values(4, [](std::uint32_t s) { return double(s * s % 7) + 0.5 * __builtin_popcount(s); });
  CHECK(std::abs(phi.sum() - ((15 * 15 % 7) + 2.0 - 0.0)) < 1e-12);
  CHECK_THROWS_AS(shapley_values(21, [](std::uint32_t) { return 0.0; }), Error);
}

TEST_CASE("exact shapley: one feature") {
  const auto bg = make_cohort({{0}, {2}});
  const ModelOutput f = [](std::span<const double> r) { return 3 * r[0]; };
  const auto e = exact_shapley(f, std::vector<double>{4}, bg);
  CHECK(e.base_value == 3.0);
  CHECK(e.contributions[0] == 9.0);
  CHECK(e.output == 12.0);
}

TEST_CASE("exact shapley: symmetric features") {
  const auto bg = make_cohort({{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  const ModelOutput f = [](std::span<const double> r) { return r[0] + r[1]; };
  const auto e = exact_shapley(f, std::vector<double>{5, 5}, bg);
  CHECK(std::abs(e.contributions[0] - e.contributions[1]) < 1e-12);
}

TEST_CASE("exact shapley: depth-two tree against a hand-expanded table") {
  const auto data = make_cohort({{0, 0, 5}, {0, 1, 4}, {1, 0, 3}, {1, 1, 2}, {0, 1, 1}, {1, 1, 0}}, {0, 0, 0, 1, 1, 1});
  TrainConfig cfg;
  cfg.max_depth = 2;
  const auto t = fit_tree(data, cfg);
  const auto bg = make_cohort({{0, 0, 5}, {1, 1, 2}, {0, 1, 1}, {1, 0, 3}});
  const std::vector<double> row{1, 1, 4};
  const auto e = exact_shapley(tree_output(t, 1), row, bg, 1);
  const auto expect = enumerate(tree_output(t, 1), row, bg);
  CHECK((e.contributions - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(e.base_value + e.contributions.sum() - e.output) < 1e-12);
  CHECK(e.target_class == 1);
}

TEST_CASE("exact shapley: shared value gets zero") {
  const auto bg = make_cohort({{1, 7, 3}, {2, 7, 1}, {0, 7, 2}});
  const ModelOutput f = [](std::span<const double> r) { return r[0] * r[1] + std::sin(r[2]) * r[1]; };
  const auto e = exact_shapley(f, std::vector<double>{4, 7, 9}, bg);
  CHECK(e.contributions[1] == 0.0);
}

TEST_CASE("exact shapley: errors") {
  const ModelOutput f = [](std::span<const double>) { return 0.0; };
  CHECK_THROWS_AS(exact_shapley(f, std::vector<double>{1}, Cohort(test::numeric_schema(1), CellMatrix(0, 1))), Error);
  CHECK_THROWS_AS(exact_shapley(f, std::vector<double>{1, 2}, make_cohort({{1}})), Error);
  std::vector<double> wide(21, 0.0);
  try {
    exact_shapley(f, wide, make_cohort({wide}));
    FAIL("expected a refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
    CHECK(std::string(e.what()).find("tree_shap") != std::string::npos);
  }
}

TEST_CASE("logit shapley matches the generic enumeration") {
  Rng rng(19);
  std::normal_distribution<double> z(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 1 + trial % 9;
    LogitModel m;
    m.coefficients = Eigen::VectorXd(p + 1);
    m.means = Eigen::VectorXd(p);
    m.scales = Eigen::VectorXd(p);
    for (int j = 0; j <= p; ++j) m.coefficients[j] = z(rng);
    for (int j = 0; j < p; ++j) {
      m.feature_names.push_back("f" + std::to_string(j));
      m.means[j] = z(rng);
      m.scales[j] = 0.5 + std::abs(z(rng));
    }
    std::vector<std::vector<double>> bg_rows(7, std::vector<double>(static_cast<std::size_t>(p)));
    for (auto& r : bg_rows)
      for (auto& v : r) v = z(rng);
    const auto bg = make_cohort(bg_rows);
    std::vector<double> row(static_cast<std::size_t>(p));
    for (auto& v : row) v = z(rng);
    const ModelOutput f = [&m](std::span<const double> r) { return predict_proba(m, r); };
    const auto fast = logit_shapley(m, row, bg);
    const auto slow = exact_shapley(f, row, bg, 1);
    CHECK((fast.contributions - slow.contributions).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(fast.base_value - slow.base_value) < 1e-12);
    CHECK(std::abs(fast.base_value + fast.contributions.sum() - fast.output) < 1e-12);
  }
}

TEST_CASE("tree shap: single leaf") {
  TreeModel t;
  t.n_classes = 2;
  t.n_features = 3;
  t.nodes = {leaf({3, 1})};
  const auto e = tree_shap(t, std::vector<double>{1, 2, 3}, 1);
  CHECK(e.base_value == 0.25);
  CHECK(e.contributions == Eigen::Vector3d::Zero());
  CHECK(e.output == 0.25);
}

TEST_CASE("tree shap equals the cover-conditional brute force") {
  Rng rng(314);
  std::uniform_int_distribution<int> features(1, 12), depth(1, 3), levels(2, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 150; ++trial) {
    const int f = features(rng);
    const auto data = test::random_cohort(rng, 80, f, 3, levels(rng));
    TrainConfig cfg;
    cfg.max_depth = depth(rng);
    const auto t = fit_tree(data, cfg);
    for (int r = 0; r < 3; ++r) {
      const auto row = data.row(static_cast<std::size_t>(r) * 7);
      const int target = r % 3;
      const auto e = tree_shap(t, row, target);
      worst = std::max(worst, (e.contributions - oracle::brute_force_shap(t, row, target)).cwiseAbs().maxCoeff());
      CHECK(std::abs(e.base_value - oracle::cover_value(t, 0, row, 0u, target)) < 1e-12);
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("tree shap on a forest is the mean of its trees") {
  Rng rng(2);
  const auto data = test::random_cohort(rng, 100, 4, 2, 5);
  TrainConfig cfg;
  cfg.n_trees = 2;
  cfg.max_depth = 4;
  const auto f = fit_forest(data, cfg);
  const auto row = data.row(3);
  const auto whole = tree_shap(f, row, 1);
  const auto a = tree_shap(f.trees[0], row, 1);
  const auto b = tree_shap(f.trees[1], row, 1);
  CHECK((whole.contributions - (a.contributions + b.contributions) / 2).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(std::abs(whole.base_value - (a.base_value + b.base_value) / 2) < 1e-15);
  CHECK(std::abs(whole.base_value + whole.contributions.sum() - predict_forest(f, row)[1]) < 1e-9);
}

TEST_CASE("tree shap local accuracy on random forests") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto data = test::random_cohort(rng, 150, 6, 3, 8);
    TrainConfig cfg;
    cfg.n_trees = 5 + trial;
    cfg.max_depth = 1 + trial % 6;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto f = fit_forest(data, cfg);
    for (std::size_t i = 0; i < 20; ++i) {
      const auto e = tree_shap(f, data.row(i), 2);
      CHECK(std::abs(e.base_value + e.contributions.sum() - predict_forest(f, data.row(i))[2]) < 1e-9);
    }
  }
}

TEST_CASE("tree shap consistency pair") {
  // A outputs 0.8 only when x0 and x1 are both on; B adds 0.1 wherever x1 is on.
  const auto a = and_tree({10, 0}, {10, 0}, {10, 0}, {2, 8});
  const auto b = and_tree({10, 0}, {9, 1}, {10, 0}, {1, 9});
  for (const auto& row : {std::vector<double>{1, 1}, std::vector<double>{0, 1}}) {
    const auto ea = tree_shap(a, row, 1);
    const auto eb = tree_shap(b, row, 1);
    CHECK(eb.contributions[1] >= ea.contributions[1]);
  }
}

TEST_CASE("tree shap errors") {
  const auto t = and_tree({1, 0}, {1, 0}, {1, 0}, {0, 1});
  CHECK_THROWS_AS(tree_shap(t, std::vector<double>{1}, 0), Error);
  CHECK_THROWS_AS(tree_shap(t, std::vector<double>{1, 1}, 2), Error);
  auto broken = t;
  broken.nodes[2].n_samples = 0;
  CHECK_THROWS_AS(tree_shap(broken, std::vector<double>{1, 1}, 0), Error);
}

TEST_CASE("permutation importance") {
  // Label is x0 > 0; x1 is noise the tree never needs.
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    rows.push_back({u(rng), u(rng)});
    labels.push_back(rows.back()[0] > 0 ? 1 : 0);
  }
  const auto data = make_cohort(rows, labels);
  const auto t = as_forest(fit_tree(data));
  const Classifier model = [&t](const Cohort& c) { return predict_classes(t, c); };
  const auto report = permutation_importance(model, data, Metric::Accuracy, 5, 11);
  CHECK(report.baseline == 1.0);
  CHECK(report.importance[1] == 0.0);
  CHECK(report.importance[0] > 0.35);  // s minus chance level 0.5, up to shuffle noise
  CHECK(report.importance[0] < 0.65);
  for (Eigen::Index i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < report.scores.cols(); ++j) sum += report.scores(i, j);
    CHECK(report.importance[i] == report.baseline - sum / 5.0);
  }
  CHECK(report.scores.rows() == 2);
  CHECK(report.scores.cols() == 5);

  const auto again = permutation_importance(model, data, Metric::Accuracy, 5, 11);
  CHECK(again.scores == report.scores);

  const auto one_row = make_cohort({{0.5, 0.5}}, {1});
  CHECK(permutation_importance(model, one_row, Metric::Accuracy, 1, 0).importance.isZero());
  CHECK_THROWS_AS(permutation_importance(model, one_row, Metric::WeightedPrecision, 1, 0), Error);
  CHECK_THROWS_AS(permutation_importance(model, data, Metric::Accuracy, 0, 0), Error);
}

TEST_CASE("shap exports: shape and constant model") {
  TreeModel t;
  t.n_classes = 2;
  t.n_features = 3;
  t.nodes = {leaf({2, 2})};
  const auto f = as_forest(t);
  const auto data = make_cohort({{1, 2, 3}, {4, 5, 6}});
  const auto summary = shap_summary_export(f, data, 1);
  CHECK(summary.records.size() == 6);
  for (const auto& r : summary.records) CHECK(r.shap == 0.0);
  CHECK(summary.records[4].row == 1);
  CHECK(summary.records[4].feature == 1);
  CHECK(summary.records[4].value == 5.0);
  REQUIRE(summary.ranking.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(summary.ranking[k].first == k);

  const auto dep = shap_dependence_export(f, data, "f0", "f2", 1);
  REQUIRE(dep.size() == 2);
  CHECK(dep[1].value_a == 4.0);
  CHECK(dep[1].value_b == 6.0);
  CHECK(dep[1].shap_a == 0.0);
  CHECK_THROWS_AS(shap_dependence_export(f, data, "f0", "nope", 1), Error);
}

TEST_CASE("shap exports: driver feature ranks first and trends upward") {
  // P(class 1) rises with x0; x1 and x2 are noise.
  Rng rng(8);
  std::normal_distribution<double> z(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 1500; ++i) {
    rows.push_back({120 + 20 * z(rng), z(rng), z(rng)});
    labels.push_back(u(rng) < 1.0 / (1.0 + std::exp(-(rows.back()[0] - 130) / 6)) ? 1 : 0);
  }
  const auto data = make_cohort(rows, labels);
  TrainConfig cfg;
  cfg.n_trees = 30;
  cfg.max_depth = 5;
  cfg.min_samples_leaf = 20;
  const auto f = fit_forest(data, cfg);
  const auto sample = data.select_rows(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15,
                                                                16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28, 29});
  const auto summary = shap_summary_export(f, sample, 1);
  CHECK(summary.ranking.front().first == 0);
  const auto dep = shap_dependence_export(f, sample, "f0", "f1", 1);
  double above = 0, below = 0;
  int n_above = 0, n_below = 0;
  for (const auto& p : dep) {
    if (p.value_a > 140) above += p.shap_a, ++n_above;
    if (p.value_a < 120) below += p.shap_a, ++n_below;
  }
  REQUIRE(n_above > 0);
  REQUIRE(n_below > 0);
  CHECK(above / n_above > 0.0);
  CHECK(below / n_below < 0.0);
}

TEST_CASE("background sample") {
  Rng rng(1);
  const auto data = test::random_cohort(rng, 50, 2, 2, 100);
  const auto a = sample_background(data, 10, 4);
  CHECK(a.row_count() == 10);
  CHECK(a == sample_background(data, 10, 4));
  CHECK(sample_background(data, 100, 4) == data.with_labels({}));
  CHECK_FALSE(a.has_labels());
}
