#ifndef STROKERISK_TESTS_SUPPORT_HPP
#define STROKERISK_TESTS_SUPPORT_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/rng.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace strokerisk::test {

/// Numerical features named f0, f1, ... with no valid range.
inline FeatureSchema numeric_schema(int n) {
  std::vector<FeatureSpec> features;
  for (int j = 0; j < n; ++j) features.push_back({"f" + std::to_string(j), FeatureKind::Numerical, "", {}, 0});
  return FeatureSchema(std::move(features));
}

inline Cohort make_cohort(const std::vector<std::vector<double>>& rows, std::vector<int> labels = {}) {
  const int width = rows.empty() ? 0 : static_cast<int>(rows.front().size());
  CellMatrix cells(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < width; ++j) cells(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return Cohort(numeric_schema(width), std::move(cells), std::move(labels));
}

/// Integer-valued features in [0, levels) so ties between rows are common.
inline Cohort random_cohort(Rng& rng, int rows, int features, int classes, int levels) {
  std::uniform_int_distribution<int> value(0, levels - 1);
  std::uniform_int_distribution<int> label(0, classes - 1);
  CellMatrix cells(rows, features);
  std::vector<int> labels(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < features; ++j) cells(i, j) = value(rng);
    labels[static_cast<std::size_t>(i)] = label(rng);
  }
  return Cohort(numeric_schema(features), std::move(cells), std::move(labels));
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("strokerisk_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace strokerisk::test

#endif  // STROKERISK_TESTS_SUPPORT_HPP
