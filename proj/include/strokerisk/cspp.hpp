#ifndef STROKERISK_CSPP_HPP
#define STROKERISK_CSPP_HPP

#include "strokerisk/cohort.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strokerisk {

/// CSPP screening level. Ordered Low < Medium < High.
enum class RiskLabel : int { Low = 0, Medium = 1, High = 2 };

inline constexpr int kRiskLevels = 3;

std::string_view to_string(RiskLabel label);
std::optional<RiskLabel> parse_risk_label(std::string_view text);

/// The "8+2" screening factors: eight chronic/lifestyle factors followed by
/// the two history factors, in screening-sheet order.
struct RiskFactors {
  bool hypertension = false;
  bool diabetes = false;
  bool heart_disease = false;
  bool hyperlipidemia = false;
  bool family_history = false;
  bool overweight = false;
  bool smoking = false;
  bool physical_inactivity = false;
  bool history_stroke = false;
  bool history_tia = false;

  static constexpr std::size_t kCount = 10;

  /// Bit i set <=> factor i present (order as declared above).
  static RiskFactors from_bits(std::uint32_t bits);
  std::uint32_t bits() const;
  std::array<bool, kCount> as_array() const;

  /// Number of the eight chronic/lifestyle factors present.
  int chronic_count() const;

  friend bool operator==(const RiskFactors&, const RiskFactors&) = default;
};

inline constexpr std::array<std::string_view, RiskFactors::kCount> kFactorNames = {
    "Hypertension",   "Diabetes Mellitus", "Heart Disease",      "Hyperlipidemia",
    "Family history of Stroke", "Overweight", "Smoking",         "Physical Inactivity",
    "History of Stroke", "History of TIA"};

RiskLabel label_risk(const RiskFactors& f);

struct CsppConfig {
  /// Cohort column for each factor, indexed like kFactorNames. The overweight
  /// column is normally absent and derived from BMI instead.
  std::array<std::string, RiskFactors::kCount> columns{
      "Hypertension",   "Diabetes Mellitus", "Heart Disease",      "Hyperlipidemia",
      "Family history of Stroke", "Overweight", "Smoking",         "Physical Inactivity",
      "History of Stroke", "History of TIA"};
  std::string bmi_column = "BMI";
  double overweight_bmi = 24.0;

  friend bool operator==(const CsppConfig&, const CsppConfig&) = default;
};

struct FactorDerivation {
  RiskFactors factors;
  /// One entry per factor that was read from a missing or absent cell and
  /// therefore counted as absent.
  std::vector<std::string> notes;
};

/// Column lookups resolved once against a schema; reused for every row.
class FactorReader {
 public:
  FactorReader(const FeatureSchema& schema, const CsppConfig& config);

  FactorDerivation derive(std::span<const double> row) const;
  RiskFactors factors(std::span<const double> row) const;

  /// Names of the factors that were absent or missing in `row`.
  std::vector<std::string> imputed(std::span<const double> row) const;

 private:
  std::array<std::optional<std::size_t>, RiskFactors::kCount> columns_;
  std::optional<std::size_t> bmi_;
  double overweight_bmi_;
};

FactorDerivation derive_factors(const FeatureSchema& schema, std::span<const double> row,
                                const CsppConfig& config = {});

/// Cohort whose labels are the CSPP levels of every row.
Cohort label_cohort(const Cohort& cohort, const CsppConfig& config = {});

struct CohortStats {
  std::size_t row_count = 0;
  std::array<double, RiskFactors::kCount> exposure_rate{};
  /// Incidence among residents with a stroke history over incidence among
  /// the rest. Empty where undefined, and always for the two history factors.
  std::array<std::optional<double>, RiskFactors::kCount> risk_attribution{};
};

CohortStats cohort_stats(const Cohort& cohort, const CsppConfig& config = {});

}  // namespace strokerisk

#endif  // STROKERISK_CSPP_HPP
