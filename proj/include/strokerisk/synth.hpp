#ifndef STROKERISK_SYNTH_HPP
#define STROKERISK_SYNTH_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace strokerisk {

struct TruncatedNormal {
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  void validate(const std::string& what) const;
};

/// Draws from N(mean, sd) restricted to [lo, hi]: rejection sampling, with an
/// inverse-CDF draw when the interval holds under 5% of the mass or rejection
/// keeps failing. Throws when the interval holds (numerically) no mass.
double sample_truncated_normal(const TruncatedNormal& dist, Rng& rng);

/// A 0/1 factor column drawn at a fixed exposure rate.
struct FactorTarget {
  std::string column;
  double exposure = 0.0;
};

/// A categorical column drawn from a fixed distribution over its codes.
struct CategoricalTarget {
  std::string column;
  std::vector<double> probabilities;
};

/// A numerical column whose distribution depends on one 0/1 factor (or on
/// nothing when `factor` is empty).
struct NumericTarget {
  std::string column;
  std::string factor;
  TruncatedNormal absent;
  TruncatedNormal present;
  double missing_rate = 0.0;
};

/// Linear-predictor term (x - center) / scale * coef.
struct OutcomeTerm {
  std::string column;
  double coef = 0.0;
  double center = 0.0;
  double scale = 1.0;
};

/// Everything the generator needs. The defaults reproduce the published
/// factor exposure rates of the resident survey; couplings and outcome
/// coefficients are synthetic choices.
struct CalibrationTargets {
  FeatureSchema schema = FeatureSchema::stroke_survey();

  std::vector<FactorTarget> factors;
  /// Overweight has no column; it decides which side of the BMI cut-off BMI
  /// is drawn from.
  double overweight_exposure = 0.3373;
  double overweight_bmi = 24.0;
  TruncatedNormal bmi_normal{21.5, 1.6, 15.0, 23.99};
  TruncatedNormal bmi_overweight{26.5, 2.2, 24.0, 45.0};
  TruncatedNormal height{163.0, 8.0, 140.0, 195.0};

  /// Stroke history is drawn last among the factors, by a logistic model on
  /// the other eight with these log-odds (listed in kFactorNames order); its
  /// intercept is solved so the exposure matches `history_stroke_exposure`.
  double history_stroke_exposure = 0.0483;
  std::vector<double> history_log_odds;

  std::vector<CategoricalTarget> categoricals;
  std::vector<NumericTarget> numerics;
  /// Diastolic readings are capped at systolic minus this gap.
  double pulse_pressure_min = 10.0;

  double outcome_intercept = -3.2;
  std::vector<OutcomeTerm> outcome_terms;

  void validate() const;
  static CalibrationTargets defaults();
};

/// Intercept that makes the expected stroke-history exposure equal the target
/// given independent factor draws.
double solve_history_intercept(const CalibrationTargets& targets);

/// `n` synthetic residents: features, CSPP levels as labels and a latent
/// stroke outcome drawn from the documented logistic model. Row i uses its own
/// generator seeded with splitmix64(seed ^ i).
Cohort generate_cohort(const CalibrationTargets& targets, std::size_t n, std::uint64_t seed);

}  // namespace strokerisk

#endif  // STROKERISK_SYNTH_HPP
