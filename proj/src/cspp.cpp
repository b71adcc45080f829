#include "strokerisk/cspp.hpp"

#include "strokerisk/error.hpp"

#include <algorithm>
#include <cctype>

namespace strokerisk {

std::string_view to_string(RiskLabel label) {
  switch (label) {
    case RiskLabel::Low: return "Low";
    case RiskLabel::Medium: return "Medium";
    case RiskLabel::High: return "High";
  }
  return "?";
}

std::optional<RiskLabel> parse_risk_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "low") return RiskLabel::Low;
  if (lower == "medium" || lower == "mid") return RiskLabel::Medium;
  if (lower == "high") return RiskLabel::High;
  return std::nullopt;
}

RiskFactors RiskFactors::from_bits(std::uint32_t bits) {
  auto bit = [bits](int i) { return ((bits >> i) & 1U) != 0; };
  return {bit(0), bit(1), bit(2), bit(3), bit(4), bit(5), bit(6), bit(7), bit(8), bit(9)};
}

std::array<bool, RiskFactors::kCount> RiskFactors::as_array() const {
  return {hypertension, diabetes,   heart_disease,       hyperlipidemia, family_history,
          overweight,   smoking,    physical_inactivity, history_stroke, history_tia};
}

std::uint32_t RiskFactors::bits() const {
  std::uint32_t out = 0;
  const auto flags = as_array();
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out |= 1U << i;
  return out;
}

int RiskFactors::chronic_count() const {
  const auto flags = as_array();
  return static_cast<int>(std::count(flags.begin(), flags.begin() + 8, true));
}

RiskLabel label_risk(const RiskFactors& f) {
  if (f.history_stroke || f.history_tia || f.chronic_count() >= 3) return RiskLabel::High;
  // Fewer than three chronic factors here; one of the first three makes it Medium.
  if (f.hypertension || f.diabetes || f.heart_disease) return RiskLabel::Medium;
  return RiskLabel::Low;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kOverweight = 5;
}

FactorReader::FactorReader(const FeatureSchema& schema, const CsppConfig& config)
    : bmi_(schema.index_of(config.bmi_column)), overweight_bmi_(config.overweight_bmi) {
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) columns_[k] = schema.index_of(config.columns[k]);
}

FactorDerivation FactorReader::derive(std::span<const double> row) const {
  FactorDerivation out;
  std::array<bool, RiskFactors::kCount> flags{};
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) {
    const std::string name(kFactorNames[k]);
    if (columns_[k]) {
      const double v = row[*columns_[k]];
      if (is_missing(v)) out.notes.push_back(name + ": missing, counted as absent");
      else flags[k] = v > 0;
    } else if (k == kOverweight && bmi_) {
      const double bmi = row[*bmi_];
      if (is_missing(bmi)) out.notes.push_back(name + ": BMI missing, counted as absent");
      else flags[k] = bmi >= overweight_bmi_;
    } else {
      out.notes.push_back(name + ": column absent, counted as absent");
    }
  }
  out.factors = {flags[0], flags[1], flags[2], flags[3], flags[4], flags[5], flags[6], flags[7], flags[8], flags[9]};
  return out;
}

RiskFactors FactorReader::factors(std::span<const double> row) const { return derive(row).factors; }

std::vector<std::string> FactorReader::imputed(std::span<const double> row) const { return derive(row).notes; }

FactorDerivation derive_factors(const FeatureSchema& schema, std::span<const double> row, const CsppConfig& config) {
  if (row.size() != schema.size()) throw Error(ErrorKind::InvalidArgument, "row width does not match schema");
  return FactorReader(schema, config).derive(row);
}

Cohort label_cohort(const Cohort& cohort, const CsppConfig& config) {
  const FactorReader reader(cohort.schema(), config);
  std::vector<int> labels(cohort.row_count());
  for (std::size_t i = 0; i < cohort.row_count(); ++i)
    labels[i] = static_cast<int>(label_risk(reader.factors(cohort.row(i))));
  return cohort.with_labels(std::move(labels));
}

CohortStats cohort_stats(const Cohort& cohort, const CsppConfig& config) {
  if (cohort.row_count() == 0) throw Error(ErrorKind::InvalidArgument, "cohort statistics need at least one row");
  const FactorReader reader(cohort.schema(), config);

  std::array<std::size_t, RiskFactors::kCount> present{}, present_history{}, present_rest{};
  std::size_t history_rows = 0;
  for (std::size_t i = 0; i < cohort.row_count(); ++i) {
    const auto f = reader.factors(cohort.row(i));
    const auto flags = f.as_array();
    if (f.history_stroke) ++history_rows;
    for (std::size_t k = 0; k < flags.size(); ++k) {
      if (!flags[k]) continue;
      ++present[k];
      if (f.history_stroke) ++present_history[k];
      else ++present_rest[k];
    }
  }

  CohortStats stats;
  stats.row_count = cohort.row_count();
  const auto n = static_cast<double>(cohort.row_count());
  const auto rest_rows = cohort.row_count() - history_rows;
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) {
    stats.exposure_rate[k] = static_cast<double>(present[k]) / n;
    if (k >= 8 || history_rows == 0 || rest_rows == 0 || present_rest[k] == 0) continue;
    const double with_history = static_cast<double>(present_history[k]) / static_cast<double>(history_rows);
    const double without = static_cast<double>(present_rest[k]) / static_cast<double>(rest_rows);
    stats.risk_attribution[k] = with_history / without;
  }
  return stats;
}

}  // namespace strokerisk
