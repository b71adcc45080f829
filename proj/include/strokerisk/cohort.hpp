#ifndef STROKERISK_COHORT_HPP
#define STROKERISK_COHORT_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace strokerisk {

/// Sentinel stored in any cell whose value is missing, for both kinds of
/// feature. Numerical models see it as an ordinary value below every valid one.
inline constexpr double kMissing = -1.0;

inline bool is_missing(double v) noexcept { return v == kMissing; }

enum class FeatureKind { Categorical, Numerical };

struct ValueRange {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const noexcept { return v >= min && v <= max; }
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numerical;
  std::string unit;
  std::optional<ValueRange> valid_range;  // numerical only
  int category_count = 0;                 // categorical only; codes 0..count-1

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

/// Ordered feature list. Position defines the column index everywhere
/// downstream.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<FeatureSpec> features);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  const FeatureSpec& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureSpec>& features() const noexcept { return features_; }
  std::vector<std::string> names() const;

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Like index_of but throws ErrorKind::Schema when absent.
  std::size_t require(std::string_view name) const;

  FeatureSchema select(std::span<const std::size_t> columns) const;

  /// The 34-column resident survey layout (lifestyle, demographic, medical
  /// measurement and "8+2" factor columns).
  static FeatureSchema stroke_survey();

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<FeatureSpec> features_;
};

using CellMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Label value for a row that carries no class.
inline constexpr int kUnlabeled = -1;

/// Immutable table of resident records. `labels` holds a class index per row
/// (CSPP level or binary outcome) and `outcome` an observed stroke flag; either
/// may be empty when the cohort does not carry it.
class Cohort {
 public:
  Cohort() = default;
  Cohort(FeatureSchema schema, CellMatrix cells, std::vector<int> labels = {},
         std::vector<int> outcome = {});

  const FeatureSchema& schema() const noexcept { return schema_; }
  const CellMatrix& cells() const noexcept { return cells_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<int>& outcome() const noexcept { return outcome_; }

  std::size_t row_count() const noexcept { return static_cast<std::size_t>(cells_.rows()); }
  std::size_t feature_count() const noexcept { return schema_.size(); }
  bool has_labels() const noexcept { return !labels_.empty(); }
  bool has_outcome() const noexcept { return !outcome_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {cells_.data() + i * feature_count(), feature_count()};
  }
  double at(std::size_t row, std::size_t col) const { return cells_(row, col); }

  /// Number of distinct classes implied by the labels (max label + 1).
  int class_count() const;

  Cohort select_rows(std::span<const std::size_t> rows) const;
  Cohort select_columns(std::span<const std::size_t> columns) const;
  Cohort select_columns(std::span<const std::string> names) const;
  Cohort with_labels(std::vector<int> labels) const;
  Cohort with_cells(CellMatrix cells) const;

  friend bool operator==(const Cohort& a, const Cohort& b);

 private:
  FeatureSchema schema_;
  CellMatrix cells_;
  std::vector<int> labels_;
  std::vector<int> outcome_;
};

// ---------------------------------------------------------------------------
// CSV interchange

struct CsvColumns {
  std::string label = "risk_label";
  std::string outcome = "stroke";
};

struct IngestResult {
  Cohort cohort;
  std::size_t empty_cells = 0;
  std::size_t unparseable_cells = 0;
  std::vector<std::string> warnings;  // first few offending cells, for humans
};

/// Reads a comma-separated file whose header names every schema column (in
/// any order). The reserved label/outcome columns are optional. Empty or
/// unparseable cells become kMissing.
IngestResult ingest_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                        const CsvColumns& columns = {});
IngestResult ingest_csv_text(std::string_view text, const FeatureSchema& schema,
                             const CsvColumns& columns = {});

/// Writes schema columns in order, then the label and outcome columns when
/// present. Labels are written as CSPP level names when `label_names` is set.
std::string to_csv(const Cohort& cohort, bool label_names = true,
                   const CsvColumns& columns = {});
void write_csv(const std::filesystem::path& path, const Cohort& cohort, bool label_names = true,
               const CsvColumns& columns = {});

// ---------------------------------------------------------------------------
// Cleansing

struct CleanseConfig {
  double missing_threshold = 0.60;
  bool correct_blood_pressure = true;
  std::string systolic_column = "Systolic blood pressure";
  std::string diastolic_column = "Diastolic blood pressure";

  friend bool operator==(const CleanseConfig&, const CleanseConfig&) = default;
};

struct CleansingReport {
  std::vector<std::pair<std::string, double>> dropped_columns;  // name, missing fraction
  std::size_t imputed_cells = 0;
  std::size_t corrected_bp_rows = 0;
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
};

double missing_fraction(const Cohort& cohort, std::size_t column);

/// Drops columns whose missing fraction exceeds the threshold, tallies the
/// remaining sentinel cells, and swaps systolic/diastolic readings that are
/// out of order. Equal readings cannot be ordered, so the diastolic value of
/// such rows is marked missing. Never removes rows.
std::pair<Cohort, CleansingReport> cleanse(const Cohort& cohort, const CleanseConfig& config = {});

// ---------------------------------------------------------------------------
// Splitting

struct TrainTestSplit {
  Cohort train;
  Cohort test;
};

/// Per-class shuffle with round(test_fraction * class_size) rows moved to the
/// test side. Both halves keep the original row order.
TrainTestSplit split_stratified(const Cohort& cohort, double test_fraction, std::uint64_t seed);

/// FNV-1a over schema names, cells and labels; identifies training data in
/// model provenance.
std::uint64_t fingerprint(const Cohort& cohort);

}  // namespace strokerisk

#endif  // STROKERISK_COHORT_HPP
