#include "strokerisk/rng.hpp"
#include "strokerisk/tree.hpp"

#include "tree_builder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace strokerisk {

namespace {

int resolve_subsample(const TrainConfig& config, int n_features) {
  if (config.feature_subsample_size == 0)
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
  if (config.feature_subsample_size > n_features)
    throw Error(ErrorKind::InvalidArgument, "feature_subsample_size exceeds the number of features");
  return config.feature_subsample_size;
}

std::vector<int> bootstrap_rows(Rng& rng, std::size_t n) {
  std::vector<int> rows(n);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

ForestModel fit_forest(const Cohort& train, const TrainConfig& config) {
  config.validate();
  detail::check_training_data(train);
  const int n_features = static_cast<int>(train.feature_count());
  const int n_classes = train.class_count();

  ForestModel forest;
  forest.feature_subsample_size = resolve_subsample(config, n_features);
  forest.n_classes = n_classes;
  forest.n_features = n_features;
  // Thread count is scheduling, not a model property; keep it out of the snapshot.
  TrainConfig stored = config;
  stored.threads = 0;
  forest.config = stored;
  forest.trees.resize(static_cast<std::size_t>(config.n_trees));
  forest.tree_seeds.resize(static_cast<std::size_t>(config.n_trees));
  for (std::size_t t = 0; t < forest.tree_seeds.size(); ++t) forest.tree_seeds[t] = derive_seed(config.seed, t);

  parallel_for(forest.trees.size(), config.threads, [&](std::size_t t) {
    Rng rng(forest.tree_seeds[t]);
    std::vector<int> rows;
    if (config.bootstrap) {
      rows = bootstrap_rows(rng, train.row_count());
    } else {
      rows.resize(train.row_count());
      std::iota(rows.begin(), rows.end(), 0);
    }
    detail::TreeBuilder builder(train.cells(), train.labels(), n_classes, stored, forest.feature_subsample_size, &rng);
    forest.trees[t] = builder.build(std::move(rows));
  });
  return forest;
}

Eigen::VectorXd predict_forest(const ForestModel& model, std::span<const double> row) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(model.n_classes);
  for (const auto& tree : model.trees) p += predict_tree(tree, row);
  return p / static_cast<double>(model.trees.size());
}

int predict_forest_vote(const ForestModel& model, std::span<const double> row) {
  std::vector<int> votes(static_cast<std::size_t>(model.n_classes), 0);
  for (const auto& tree : model.trees) ++votes[static_cast<std::size_t>(argmax(predict_tree(tree, row)))];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

ForestModel as_forest(TreeModel tree) {
  ForestModel forest;
  forest.n_classes = tree.n_classes;
  forest.n_features = tree.n_features;
  forest.feature_subsample_size = tree.n_features;
  forest.config = tree.config;
  forest.config.n_trees = 1;
  forest.config.bootstrap = false;
  forest.tree_seeds = {0};
  forest.trees.push_back(std::move(tree));
  return forest;
}

std::vector<int> predict_classes(const ForestModel& model, const Cohort& data) {
  std::vector<int> out(data.row_count());
  for (std::size_t i = 0; i < data.row_count(); ++i) out[i] = argmax(predict_forest(model, data.row(i)));
  return out;
}

std::vector<std::size_t> out_of_bag_rows(const ForestModel& model, std::size_t tree, std::size_t train_rows) {
  std::vector<bool> drawn(train_rows, false);
  if (model.config.bootstrap) {
    Rng rng(model.tree_seeds.at(tree));
    for (int r : bootstrap_rows(rng, train_rows)) drawn[static_cast<std::size_t>(r)] = true;
  } else {
    std::fill(drawn.begin(), drawn.end(), true);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < train_rows; ++i)
    if (!drawn[i]) out.push_back(i);
  return out;
}

double out_of_bag_accuracy(const ForestModel& model, const Cohort& train) {
  const std::size_t n = train.row_count();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), model.n_classes);
  std::vector<int> votes(n, 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (auto i : out_of_bag_rows(model, t, n)) {
      sums.row(static_cast<Eigen::Index>(i)) += predict_tree(model.trees[t], train.row(i)).transpose();
      ++votes[i];
    }
  }
  std::size_t scored = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (votes[i] == 0) continue;
    ++scored;
    Eigen::Index cls = 0;
    sums.row(static_cast<Eigen::Index>(i)).maxCoeff(&cls);
    if (static_cast<int>(cls) == train.labels()[i]) ++correct;
  }
  if (scored == 0) throw Error(ErrorKind::InvalidArgument, "no out-of-bag rows (bootstrap disabled?)");
  return static_cast<double>(correct) / static_cast<double>(scored);
}

}  // namespace strokerisk
