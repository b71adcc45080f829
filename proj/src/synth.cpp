#include "strokerisk/synth.hpp"

#include "strokerisk/error.hpp"
#include "strokerisk/logit.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

namespace strokerisk {

namespace {

constexpr double kMinMass = 1e-12;
constexpr double kRejectionMass = 0.05;
constexpr int kRejectionTries = 100;

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, what + " must lie in [0, 1]");
  }
}

double inverse_cdf_draw(const TruncatedNormal& d, double cdf_lo, double cdf_hi, Rng& rng) {
  const boost::math::normal_distribution<double> standard;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = cdf_lo + unit(rng) * (cdf_hi - cdf_lo);
  const double p = std::clamp(u, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  return std::clamp(d.mean + d.sd * boost::math::quantile(standard, p), d.lo, d.hi);
}

struct ResolvedNumeric {
  std::size_t column = 0;
  std::optional<std::size_t> factor;
  const NumericTarget* target = nullptr;
};

struct ResolvedTerm {
  std::size_t column = 0;
  const OutcomeTerm* term = nullptr;
};

struct Plan {
  std::vector<std::pair<std::size_t, double>> factors;  // column, exposure
  std::vector<std::pair<std::size_t, const CategoricalTarget*>> categoricals;
  std::vector<ResolvedNumeric> numerics;
  std::optional<std::size_t> bmi, height, weight, systolic, diastolic, history_stroke;
  std::vector<ResolvedTerm> terms;
  std::array<std::optional<std::size_t>, RiskFactors::kCount> factor_columns;
  double history_intercept = 0.0;
};

Plan make_plan(const CalibrationTargets& t) {
  const FeatureSchema& schema = t.schema;
  Plan plan;
  std::vector<bool> covered(schema.size(), false);
  auto claim = [&](const std::string& name) {
    const std::size_t c = schema.require(name);
    if (covered[c]) throw Error(ErrorKind::InvalidArgument, "column targeted twice: '" + name + "'");
    covered[c] = true;
    return c;
  };

  const CsppConfig cspp;
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) {
    plan.factor_columns[k] = schema.index_of(cspp.columns[k]);
  }
  plan.history_stroke = schema.index_of("History of Stroke");
  if (plan.history_stroke) claim("History of Stroke");

  for (const auto& f : t.factors) plan.factors.emplace_back(claim(f.column), f.exposure);
  for (const auto& c : t.categoricals) {
    const std::size_t col = claim(c.column);
    if (schema[col].kind != FeatureKind::Categorical ||
        static_cast<int>(c.probabilities.size()) != schema[col].category_count) {
      throw Error(ErrorKind::InvalidArgument,
                  "categorical target '" + c.column + "' does not match the schema's category count");
    }
    plan.categoricals.emplace_back(col, &c);
  }
  auto optional_claim = [&](const char* name) -> std::optional<std::size_t> {
    if (!schema.index_of(name)) return std::nullopt;
    return claim(name);
  };
  plan.bmi = optional_claim("BMI");
  plan.height = optional_claim("Height");
  plan.weight = optional_claim("Weight");
  if (plan.weight && !(plan.bmi && plan.height)) {
    throw Error(ErrorKind::InvalidArgument, "Weight is derived from BMI and Height, which must both be present");
  }
  for (const auto& n : t.numerics) {
    ResolvedNumeric r{claim(n.column), std::nullopt, &n};
    if (!n.factor.empty()) r.factor = schema.require(n.factor);
    plan.numerics.push_back(r);
  }
  plan.systolic = schema.index_of("Systolic blood pressure");
  plan.diastolic = schema.index_of("Diastolic blood pressure");
  // The diastolic draw is capped by the systolic value, so it goes last.
  std::stable_partition(plan.numerics.begin(), plan.numerics.end(),
                        [&](const ResolvedNumeric& r) { return r.column != plan.diastolic; });

  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (!covered[c]) throw Error(ErrorKind::Schema, "no generation target for column '" + schema[c].name + "'");
  }
  // Factor-coupled numerics must be drawn after their factor; factor columns
  // are drawn first, so only numerics coupled to numerics need ordering.
  for (const auto& n : plan.numerics) {
    if (n.factor && schema[*n.factor].kind == FeatureKind::Numerical) {
      throw Error(ErrorKind::InvalidArgument, "numeric target '" + n.target->column + "' is coupled to a numeric column");
    }
  }
  for (const auto& term : t.outcome_terms) plan.terms.push_back({schema.require(term.column), &term});
  if (plan.history_stroke) plan.history_intercept = solve_history_intercept(t);
  return plan;
}

double factor_exposure(const CalibrationTargets& t, std::size_t k) {
  const CsppConfig cspp;
  if (k == 5) return t.overweight_exposure;
  for (const auto& f : t.factors) {
    if (f.column == cspp.columns[k]) return f.exposure;
  }
  return 0.0;
}

}  // namespace

void TruncatedNormal::validate(const std::string& what) const {
  if (!(sd > 0.0) || !std::isfinite(mean) || !std::isfinite(sd)) {
    throw Error(ErrorKind::InvalidArgument, what + ": sd must be positive and finite");
  }
  if (!(lo < hi)) throw Error(ErrorKind::InvalidArgument, what + ": bounds must satisfy lo < hi");
}

double sample_truncated_normal(const TruncatedNormal& d, Rng& rng) {
  d.validate("truncated normal");
  const boost::math::normal_distribution<double> standard;
  const double cdf_lo = boost::math::cdf(standard, (d.lo - d.mean) / d.sd);
  const double cdf_hi = boost::math::cdf(standard, (d.hi - d.mean) / d.sd);
  const double mass = cdf_hi - cdf_lo;
  if (!(mass > kMinMass)) {
    throw Error(ErrorKind::Numerical, "infeasible truncation: N(" + std::to_string(d.mean) + ", " +
                                          std::to_string(d.sd) + ") has no mass on [" + std::to_string(d.lo) +
                                          ", " + std::to_string(d.hi) + "]");
  }
  if (mass >= kRejectionMass) {
    std::normal_distribution<double> normal(d.mean, d.sd);
    for (int i = 0; i < kRejectionTries; ++i) {
      const double x = normal(rng);
      if (x >= d.lo && x <= d.hi) return x;
    }
  }
  return inverse_cdf_draw(d, cdf_lo, cdf_hi, rng);
}

void CalibrationTargets::validate() const {
  for (const auto& f : factors) check_probability(f.exposure, "exposure of '" + f.column + "'");
  check_probability(overweight_exposure, "overweight exposure");
  check_probability(history_stroke_exposure, "stroke history exposure");
  bmi_normal.validate("BMI (normal weight)");
  bmi_overweight.validate("BMI (overweight)");
  height.validate("Height");
  if (bmi_normal.hi >= overweight_bmi || bmi_overweight.lo < overweight_bmi) {
    throw Error(ErrorKind::InvalidArgument, "BMI bounds must sit on either side of the overweight cut-off");
  }
  if (!history_log_odds.empty() && history_log_odds.size() != 8) {
    throw Error(ErrorKind::InvalidArgument, "history_log_odds needs one entry per chronic factor (8)");
  }
  for (const auto& c : categoricals) {
    double total = 0.0;
    for (double p : c.probabilities) {
      check_probability(p, "category probability of '" + c.column + "'");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "category probabilities of '" + c.column + "' must sum to 1");
    }
  }
  for (const auto& n : numerics) {
    n.absent.validate(n.column);
    n.present.validate(n.column);
    check_probability(n.missing_rate, "missing rate of '" + n.column + "'");
  }
  if (!(pulse_pressure_min >= 0.0)) throw Error(ErrorKind::InvalidArgument, "pulse_pressure_min must be >= 0");
  for (const auto& term : outcome_terms) {
    if (!(term.scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "outcome term '" + term.column + "' needs scale > 0");
  }
}

CalibrationTargets CalibrationTargets::defaults() {
  CalibrationTargets t;
  t.factors = {
      {"Hypertension", 0.5158},        {"Hyperlipidemia", 0.3765}, {"Physical Inactivity", 0.3892},
      {"Smoking", 0.2058},             {"Family history of Stroke", 0.0999},
      {"Diabetes Mellitus", 0.0709},   {"Heart Disease", 0.0052},  {"History of TIA", 0.0023},
  };
  // Log risk attribution of each chronic factor, in kFactorNames order.
  t.history_log_odds = {std::log(1.187),  std::log(2.613), std::log(11.84), std::log(0.5846),
                        std::log(1.590),  std::log(0.6844), std::log(1.539), std::log(1.721)};
  t.categoricals = {
      {"Favor", {0.3, 0.5, 0.2}},
      {"Alcohol", {0.75, 0.25}},
      {"Frequency of Vegetables", {0.1, 0.2, 0.3, 0.4}},
      {"Frequency of Fruits", {0.25, 0.35, 0.25, 0.15}},
      {"Meat and Vegetables", {0.3, 0.5, 0.2}},
      {"Medical Payment Method", {0.6, 0.25, 0.1, 0.05}},
      {"Sex", {0.48, 0.52}},
      {"Retire", {0.6, 0.4}},
      {"Ethnicity", {0.98, 0.02}},
      {"Occupation", {0.45, 0.2, 0.1, 0.1, 0.1, 0.05}},
      {"Marital Status", {0.05, 0.85, 0.08, 0.02}},
      {"Education Level", {0.15, 0.35, 0.3, 0.15, 0.05}},
  };
  t.numerics = {
      {"Age", "Hypertension", {54, 12, 18, 95}, {63, 10, 18, 95}, 0.0},
      {"TC", "Hyperlipidemia", {4.6, 0.7, 2.5, 7.0}, {6.0, 1.0, 3.0, 11.0}, 0.03},
      {"TG", "Hyperlipidemia", {1.3, 0.5, 0.3, 4.0}, {2.4, 1.0, 0.5, 9.0}, 0.03},
      {"HDL", "Hyperlipidemia", {1.45, 0.3, 0.6, 3.0}, {1.1, 0.25, 0.4, 2.5}, 0.03},
      {"LDL", "Hyperlipidemia", {2.6, 0.6, 1.0, 5.0}, {3.8, 0.8, 1.5, 7.0}, 0.03},
      {"HCY", "", {12, 4, 4, 50}, {12, 4, 4, 50}, 0.03},
      {"FBG", "Diabetes Mellitus", {5.2, 0.6, 3.5, 6.9}, {9.0, 2.0, 7.0, 20.0}, 0.03},
      {"Pulse", "", {75, 10, 45, 130}, {75, 10, 45, 130}, 0.01},
      {"Systolic blood pressure", "Hypertension", {120, 12, 85, 180}, {155, 15, 100, 230}, 0.0},
      {"Diastolic blood pressure", "Hypertension", {76, 8, 50, 110}, {94, 10, 60, 130}, 0.0},
  };
  t.outcome_terms = {
      {"History of Stroke", 2.7, 0, 1},       {"Hypertension", 1.1, 0, 1},
      {"Physical Inactivity", 1.0, 0, 1},     {"Hyperlipidemia", 0.8, 0, 1},
      {"Smoking", 0.8, 0, 1},                 {"Diabetes Mellitus", 0.8, 0, 1},
      {"Family history of Stroke", 0.6, 0, 1}, {"Heart Disease", 0.5, 0, 1},
      {"History of TIA", 1.0, 0, 1},          {"BMI", 0.4, 23, 3.5},
      {"Systolic blood pressure", 0.3, 130, 18}, {"HDL", -0.3, 1.35, 0.3},
      {"Education Level", -0.3, 2, 1},        {"Frequency of Vegetables", -0.2, 2, 1},
  };
  return t;
}

double solve_history_intercept(const CalibrationTargets& t) {
  std::array<double, 8> rate{};
  std::array<double, 8> log_odds{};
  for (std::size_t k = 0; k < 8; ++k) {
    rate[k] = factor_exposure(t, k);
    log_odds[k] = t.history_log_odds.empty() ? 0.0 : t.history_log_odds[k];
  }
  // Expected exposure under independent factors, by enumerating all 256
  // factor combinations.
  auto expected = [&](double a) {
    double total = 0.0;
    for (std::uint32_t bits = 0; bits < 256; ++bits) {
      double p = 1.0;
      double eta = a;
      for (std::size_t k = 0; k < 8; ++k) {
        const bool on = (bits >> k) & 1U;
        p *= on ? rate[k] : 1.0 - rate[k];
        if (on) eta += log_odds[k];
      }
      total += p * sigmoid(eta);
    }
    return total;
  };
  const double target = t.history_stroke_exposure;
  if (target <= 0.0) return -std::numeric_limits<double>::infinity();
  if (target >= 1.0) return std::numeric_limits<double>::infinity();
  double lo = -60.0, hi = 60.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (expected(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Cohort generate_cohort(const CalibrationTargets& targets, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "generate_cohort needs n >= 1");
  targets.validate();
  const Plan plan = make_plan(targets);
  const std::size_t width = targets.schema.size();
  CellMatrix cells(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
  std::vector<int> outcome(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(seed, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto bernoulli = [&](double p) { return unit(rng) < p; };
    auto cell = [&](std::size_t c) -> double& { return cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)); };

    for (const auto& [col, rate] : plan.factors) cell(col) = bernoulli(rate) ? 1.0 : 0.0;
    const bool overweight = bernoulli(targets.overweight_exposure);

    if (plan.history_stroke) {
      double eta = plan.history_intercept;
      for (std::size_t k = 0; k < 8 && !targets.history_log_odds.empty(); ++k) {
        const bool on = k == 5 ? overweight : (plan.factor_columns[k] && cell(*plan.factor_columns[k]) > 0.0);
        if (on) eta += targets.history_log_odds[k];
      }
      cell(*plan.history_stroke) = bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
    }

    for (const auto& [col, target] : plan.categoricals) {
      std::discrete_distribution<int> pick(target->probabilities.begin(), target->probabilities.end());
      cell(col) = pick(rng);
    }

    double bmi = sample_truncated_normal(overweight ? targets.bmi_overweight : targets.bmi_normal, rng);
    if (plan.bmi) cell(*plan.bmi) = bmi;
    if (plan.height) {
      const double h = sample_truncated_normal(targets.height, rng);
      cell(*plan.height) = h;
      if (plan.weight) cell(*plan.weight) = bmi * (h / 100.0) * (h / 100.0);
    }

    for (const auto& num : plan.numerics) {
      const bool present = num.factor && cell(*num.factor) > 0.0;
      TruncatedNormal dist = present ? num.target->present : num.target->absent;
      if (plan.diastolic && num.column == *plan.diastolic && plan.systolic) {
        dist.hi = std::min(dist.hi, cell(*plan.systolic) - targets.pulse_pressure_min);
      }
      cell(num.column) = sample_truncated_normal(dist, rng);
    }

    double eta = targets.outcome_intercept;
    for (const auto& term : plan.terms) {
      eta += term.term->coef * (cell(term.column) - term.term->center) / term.term->scale;
    }
    outcome[i] = bernoulli(sigmoid(eta)) ? 1 : 0;

    // Missingness is applied last so it never disturbs the couplings above.
    for (const auto& num : plan.numerics) {
      if (num.target->missing_rate > 0.0 && bernoulli(num.target->missing_rate)) cell(num.column) = kMissing;
    }
  }

  Cohort raw(targets.schema, std::move(cells), {}, std::move(outcome));
  return label_cohort(raw);
}

}  // namespace strokerisk
