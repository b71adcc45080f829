#ifndef STROKERISK_SRC_TREE_BUILDER_HPP
#define STROKERISK_SRC_TREE_BUILDER_HPP

#include "strokerisk/rng.hpp"
#include "strokerisk/tree.hpp"

#include <span>
#include <vector>

namespace strokerisk::detail {

/// Splits whose impurity decreases differ by less than this count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Grows one tree depth-first over a multiset of row indices.
class TreeBuilder {
 public:
  /// `rng == nullptr` disables feature subsampling.
  TreeBuilder(const CellMatrix& x, std::span<const int> y, int n_classes, const TrainConfig& config,
              int max_features, Rng* rng);

  TreeModel build(std::vector<int> rows);

 private:
  int grow(std::vector<int>& rows, int depth);
  std::vector<int> candidate_features();

  const CellMatrix& x_;
  std::span<const int> y_;
  int n_classes_;
  const TrainConfig& config_;
  int max_features_;
  Rng* rng_;
  double root_samples_ = 0.0;
  TreeModel model_;
};

double split_threshold(double lo, double hi);
void check_training_data(const Cohort& train);

}  // namespace strokerisk::detail

#endif  // STROKERISK_SRC_TREE_BUILDER_HPP
