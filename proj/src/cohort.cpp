#include "strokerisk/cohort.hpp"

#include "strokerisk/cspp.hpp"
#include "strokerisk/error.hpp"
#include "strokerisk/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace strokerisk {

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features) : features_(std::move(features)) {
  std::unordered_set<std::string> seen;
  for (const auto& f : features_) {
    if (f.name.empty()) throw Error(ErrorKind::Schema, "feature with empty name");
    if (!seen.insert(f.name).second)
      throw Error(ErrorKind::Schema, "duplicate feature name '" + f.name + "'");
    if (f.valid_range && !(f.valid_range->min < f.valid_range->max))
      throw Error(ErrorKind::Schema, "feature '" + f.name + "' has an empty valid range");
    if (f.kind == FeatureKind::Categorical && f.category_count < 0)
      throw Error(ErrorKind::Schema, "feature '" + f.name + "' has a negative category count");
  }
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const auto& f : features_) out.push_back(f.name);
  return out;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::size_t FeatureSchema::require(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw Error(ErrorKind::Schema, "unknown feature '" + std::string(name) + "'");
}

FeatureSchema FeatureSchema::select(std::span<const std::size_t> columns) const {
  std::vector<FeatureSpec> out;
  out.reserve(columns.size());
  for (auto c : columns) out.push_back(features_.at(c));
  return FeatureSchema(std::move(out));
}

FeatureSchema FeatureSchema::stroke_survey() {
  auto cat = [](std::string name, int count) {
    return FeatureSpec{std::move(name), FeatureKind::Categorical, "", std::nullopt, count};
  };
  auto num = [](std::string name, std::string unit, double lo, double hi) {
    return FeatureSpec{std::move(name), FeatureKind::Numerical, std::move(unit), ValueRange{lo, hi}, 0};
  };
  return FeatureSchema({
      cat("Favor", 3),
      cat("Alcohol", 2),
      cat("Frequency of Vegetables", 4),
      cat("Frequency of Fruits", 4),
      cat("Meat and Vegetables", 3),
      cat("Medical Payment Method", 4),
      cat("Sex", 2),
      num("Age", "years", 0, 120),
      num("BMI", "kg/m2", 10, 60),
      cat("Retire", 2),
      num("Height", "cm", 100, 230),
      num("Weight", "kg", 25, 250),
      cat("Ethnicity", 2),
      cat("Occupation", 6),
      cat("Marital Status", 4),
      cat("Education Level", 5),
      num("TC", "mmol/L", 1, 20),
      num("TG", "mmol/L", 0.1, 30),
      num("HDL", "mmol/L", 0.1, 5),
      num("LDL", "mmol/L", 0.1, 15),
      num("HCY", "umol/L", 1, 100),
      num("FBG", "mmol/L", 1, 40),
      num("Pulse", "bpm", 30, 200),
      num("Systolic blood pressure", "mmHg", 60, 260),
      num("Diastolic blood pressure", "mmHg", 30, 160),
      cat("Smoking", 2),
      cat("Physical Inactivity", 2),
      cat("Heart Disease", 2),
      cat("Hypertension", 2),
      cat("Hyperlipidemia", 2),
      cat("History of Stroke", 2),
      cat("Diabetes Mellitus", 2),
      cat("Family history of Stroke", 2),
      cat("History of TIA", 2),
  });
}

// ---------------------------------------------------------------------------
// Cohort

Cohort::Cohort(FeatureSchema schema, CellMatrix cells, std::vector<int> labels, std::vector<int> outcome)
    : schema_(std::move(schema)), cells_(std::move(cells)), labels_(std::move(labels)), outcome_(std::move(outcome)) {
  if (static_cast<std::size_t>(cells_.cols()) != schema_.size() && cells_.rows() > 0)
    throw Error(ErrorKind::Schema, "cell matrix has " + std::to_string(cells_.cols()) + " columns, schema has " +
                                       std::to_string(schema_.size()));
  if (cells_.rows() == 0) cells_.resize(0, static_cast<Eigen::Index>(schema_.size()));
  if (!labels_.empty() && labels_.size() != row_count())
    throw Error(ErrorKind::InvalidArgument, "label count does not match row count");
  if (!outcome_.empty() && outcome_.size() != row_count())
    throw Error(ErrorKind::InvalidArgument, "outcome count does not match row count");
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const bool categorical = schema_[j].kind == FeatureKind::Categorical;
    for (Eigen::Index i = 0; i < cells_.rows(); ++i) {
      const double v = cells_(i, static_cast<Eigen::Index>(j));
      if (!std::isfinite(v))
        throw Error(ErrorKind::Range, "non-finite cell in column '" + schema_[j].name + "'");
      if (categorical && (v < kMissing || v != std::floor(v)))
        throw Error(ErrorKind::Range, "categorical column '" + schema_[j].name + "' holds non-code value");
    }
  }
}

bool operator==(const Cohort& a, const Cohort& b) {
  return a.schema_ == b.schema_ && a.cells_.rows() == b.cells_.rows() && a.cells_.cols() == b.cells_.cols() &&
         a.cells_ == b.cells_ && a.labels_ == b.labels_ && a.outcome_ == b.outcome_;
}

int Cohort::class_count() const {
  int top = -1;
  for (int l : labels_) top = std::max(top, l);
  return top + 1;
}

Cohort Cohort::select_rows(std::span<const std::size_t> rows) const {
  CellMatrix out(static_cast<Eigen::Index>(rows.size()), cells_.cols());
  std::vector<int> labels, outcome;
  if (has_labels()) labels.reserve(rows.size());
  if (has_outcome()) outcome.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = rows[k];
    if (r >= row_count()) throw Error(ErrorKind::InvalidArgument, "row index out of range");
    out.row(static_cast<Eigen::Index>(k)) = cells_.row(static_cast<Eigen::Index>(r));
    if (has_labels()) labels.push_back(labels_[r]);
    if (has_outcome()) outcome.push_back(outcome_[r]);
  }
  return Cohort(schema_, std::move(out), std::move(labels), std::move(outcome));
}

Cohort Cohort::select_columns(std::span<const std::size_t> columns) const {
  CellMatrix out(cells_.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = cells_.col(static_cast<Eigen::Index>(columns[k]));
  return Cohort(schema_.select(columns), std::move(out), labels_, outcome_);
}

Cohort Cohort::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& n : names) idx.push_back(schema_.require(n));
  return select_columns(idx);
}

Cohort Cohort::with_labels(std::vector<int> labels) const {
  return Cohort(schema_, cells_, std::move(labels), outcome_);
}

Cohort Cohort::with_cells(CellMatrix cells) const {
  return Cohort(schema_, std::move(cells), labels_, outcome_);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::Parse, "unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

enum class CellParse { Ok, Empty, Bad };

CellParse parse_number(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return CellParse::Empty;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc::result_out_of_range)
    throw Error(ErrorKind::Range, "numeric cell '" + std::string(text) + "' is outside the representable range");
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return CellParse::Bad;
  return CellParse::Ok;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

constexpr std::size_t kMaxWarnings = 20;

}  // namespace

IngestResult ingest_csv_text(std::string_view text, const FeatureSchema& schema, const CsvColumns& columns) {
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorKind::Parse, "empty CSV input (no header row)");

  auto header = split_csv_line(lines.front());
  std::vector<std::optional<std::size_t>> target(header.size());  // schema column per CSV column
  std::optional<std::size_t> label_col, outcome_col;
  std::unordered_set<std::string> seen;
  std::vector<bool> covered(schema.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::string name(trim(header[c]));
    if (!seen.insert(name).second) throw Error(ErrorKind::Parse, "duplicate header '" + name + "'");
    if (name == columns.label) {
      label_col = c;
    } else if (name == columns.outcome) {
      outcome_col = c;
    } else if (auto idx = schema.index_of(name)) {
      target[c] = *idx;
      covered[*idx] = true;
    } else {
      throw Error(ErrorKind::Schema, "unknown column '" + name + "'");
    }
  }
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (!covered[j]) throw Error(ErrorKind::Schema, "column absent: '" + schema[j].name + "'");

  IngestResult result;
  const std::size_t n = lines.size() - 1;
  CellMatrix cells(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(schema.size()));
  std::vector<int> labels, outcome;
  if (label_col) labels.assign(n, kUnlabeled);
  if (outcome_col) outcome.assign(n, kUnlabeled);

  auto warn = [&](std::size_t row, const std::string& col, std::string_view cell) {
    ++result.unparseable_cells;
    if (result.warnings.size() < kMaxWarnings)
      result.warnings.push_back("row " + std::to_string(row) + ", column '" + col + "': unparseable value '" +
                                std::string(cell) + "' read as missing");
  };

  for (std::size_t r = 0; r < n; ++r) {
    auto fields = split_csv_line(lines[r + 1]);
    if (fields.size() != header.size())
      throw Error(ErrorKind::Parse, "row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                                        " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string_view cell = trim(fields[c]);
      if (label_col && c == *label_col) {
        if (cell.empty()) continue;
        if (auto lvl = parse_risk_label(cell)) {
          labels[r] = static_cast<int>(*lvl);
        } else {
          double v = 0;
          if (parse_number(cell, v) == CellParse::Ok && v >= 0 && v == std::floor(v)) labels[r] = static_cast<int>(v);
          else warn(r, columns.label, cell);
        }
        continue;
      }
      if (outcome_col && c == *outcome_col) {
        double v = 0;
        const auto st = parse_number(cell, v);
        if (st == CellParse::Ok && (v == 0 || v == 1)) outcome[r] = static_cast<int>(v);
        else if (st != CellParse::Empty) warn(r, columns.outcome, cell);
        continue;
      }
      const std::size_t j = *target[c];
      double v = 0;
      switch (parse_number(cell, v)) {
        case CellParse::Empty:
          ++result.empty_cells;
          v = kMissing;
          break;
        case CellParse::Bad:
          warn(r, schema[j].name, cell);
          v = kMissing;
          break;
        case CellParse::Ok:
          if (schema[j].kind == FeatureKind::Categorical && (v < kMissing || v != std::floor(v))) {
            warn(r, schema[j].name, cell);
            v = kMissing;
          }
          break;
      }
      cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
  }
  result.cohort = Cohort(schema, std::move(cells), std::move(labels), std::move(outcome));
  return result;
}

IngestResult ingest_csv(const std::filesystem::path& path, const FeatureSchema& schema, const CsvColumns& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str(), schema, columns);
}

std::string to_csv(const Cohort& cohort, bool label_names, const CsvColumns& columns) {
  std::string out;
  const auto& schema = cohort.schema();
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (j) out += ',';
    out += quote_if_needed(schema[j].name);
  }
  if (cohort.has_labels()) out += ',' + quote_if_needed(columns.label);
  if (cohort.has_outcome()) out += ',' + quote_if_needed(columns.outcome);
  out += '\n';
  for (std::size_t i = 0; i < cohort.row_count(); ++i) {
    auto row = cohort.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      if (is_missing(row[j])) continue;  // missing round-trips as an empty cell
      append_number(out, row[j]);
    }
    if (cohort.has_labels()) {
      out += ',';
      const int l = cohort.labels()[i];
      if (l == kUnlabeled) {
      } else if (label_names && l >= 0 && l < kRiskLevels) {
        out += to_string(static_cast<RiskLabel>(l));
      } else {
        out += std::to_string(l);
      }
    }
    if (cohort.has_outcome()) {
      out += ',';
      if (cohort.outcome()[i] != kUnlabeled) out += std::to_string(cohort.outcome()[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Cohort& cohort, bool label_names, const CsvColumns& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << to_csv(cohort, label_names, columns);
}

// ---------------------------------------------------------------------------
// Cleansing

double missing_fraction(const Cohort& cohort, std::size_t column) {
  if (cohort.row_count() == 0) return 0.0;
  const auto col = cohort.cells().col(static_cast<Eigen::Index>(column));
  const auto missing = (col.array() == kMissing).count();
  return static_cast<double>(missing) / static_cast<double>(cohort.row_count());
}

std::pair<Cohort, CleansingReport> cleanse(const Cohort& cohort, const CleanseConfig& config) {
  CleansingReport report;
  report.rows_in = cohort.row_count();

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < cohort.feature_count(); ++j) {
    const double frac = missing_fraction(cohort, j);
    if (frac > config.missing_threshold) report.dropped_columns.emplace_back(cohort.schema()[j].name, frac);
    else keep.push_back(j);
  }
  Cohort kept = cohort.select_columns(keep);
  CellMatrix cells = kept.cells();

  if (config.correct_blood_pressure) {
    const auto sys = kept.schema().index_of(config.systolic_column);
    const auto dia = kept.schema().index_of(config.diastolic_column);
    if (sys && dia) {
      const auto s = static_cast<Eigen::Index>(*sys);
      const auto d = static_cast<Eigen::Index>(*dia);
      for (Eigen::Index i = 0; i < cells.rows(); ++i) {
        double& sv = cells(i, s);
        double& dv = cells(i, d);
        if (is_missing(sv) || is_missing(dv) || dv < sv) continue;
        if (dv > sv) std::swap(sv, dv);
        else dv = kMissing;
        ++report.corrected_bp_rows;
      }
    }
  }
  report.imputed_cells = static_cast<std::size_t>((cells.array() == kMissing).count());
  report.rows_out = static_cast<std::size_t>(cells.rows());
  return {kept.with_cells(std::move(cells)), std::move(report)};
}

// ---------------------------------------------------------------------------
// Splitting

TrainTestSplit split_stratified(const Cohort& cohort, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "test fraction must lie in (0, 1)");
  if (!cohort.has_labels()) throw Error(ErrorKind::InvalidArgument, "stratified split needs labels");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < cohort.row_count(); ++i) by_class[cohort.labels()[i]].push_back(i);

  std::vector<std::size_t> train, test;
  for (auto& [label, rows] : by_class) {
    const auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    if (rows.size() < 2 || take == 0 || take == rows.size())
      throw Error(ErrorKind::InvalidArgument, "class " + std::to_string(label) + " has too few rows (" +
                                                  std::to_string(rows.size()) + ") to stratify");
    auto rng = make_rng(seed, static_cast<std::uint64_t>(label + 1));
    std::vector<std::size_t> order = rows;
    std::shuffle(order.begin(), order.end(), rng);
    test.insert(test.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {cohort.select_rows(train), cohort.select_rows(test)};
}

std::uint64_t fingerprint(const Cohort& cohort) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& f : cohort.schema().features()) mix(f.name.data(), f.name.size() + 1);
  mix(cohort.cells().data(), static_cast<std::size_t>(cohort.cells().size()) * sizeof(double));
  mix(cohort.labels().data(), cohort.labels().size() * sizeof(int));
  mix(cohort.outcome().data(), cohort.outcome().size() * sizeof(int));
  return h;
}

}  // namespace strokerisk
