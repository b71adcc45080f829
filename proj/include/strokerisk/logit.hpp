#ifndef STROKERISK_LOGIT_HPP
#define STROKERISK_LOGIT_HPP

#include "strokerisk/cohort.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace strokerisk {

/// Logistic function, evaluated without overflow for large |z|.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar log1p_exp(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

/// Bernoulli log-likelihood of coefficients `beta` for a design matrix whose
/// first column is the intercept.
template <typename DerivedX, typename DerivedY, typename DerivedB>
typename DerivedB::Scalar log_likelihood(const Eigen::MatrixBase<DerivedX>& design,
                                         const Eigen::MatrixBase<DerivedY>& y,
                                         const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedB::Scalar;
  const auto eta = (design * beta).eval();
  Scalar ll(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - log1p_exp(eta[i]);
  return ll;
}

/// Gradient of log_likelihood with respect to beta: X^T (y - p).
template <typename DerivedX, typename DerivedY, typename DerivedB>
Eigen::Matrix<typename DerivedB::Scalar, Eigen::Dynamic, 1> score(const Eigen::MatrixBase<DerivedX>& design,
                                                                  const Eigen::MatrixBase<DerivedY>& y,
                                                                  const Eigen::MatrixBase<DerivedB>& beta) {
  const auto p = (design * beta).unaryExpr([](auto z) { return sigmoid(z); }).eval();
  return design.transpose() * (y - p);
}

/// Observed Fisher information X^T W X with W = diag(p (1 - p)).
template <typename DerivedX, typename DerivedB>
Eigen::Matrix<typename DerivedB::Scalar, Eigen::Dynamic, Eigen::Dynamic> fisher_information(
    const Eigen::MatrixBase<DerivedX>& design, const Eigen::MatrixBase<DerivedB>& beta) {
  const auto p = (design * beta).unaryExpr([](auto z) { return sigmoid(z); }).eval();
  const auto w = (p.array() * (1 - p.array())).matrix().eval();
  return design.transpose() * w.asDiagonal() * design;
}

/// Fitted model. Coefficients are in log-odds per standardised unit; entry 0
/// is the intercept. Categorical columns keep mean 0 and scale 1.
struct LogitModel {
  std::vector<std::string> feature_names;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd means;
  Eigen::VectorXd scales;

  std::size_t feature_count() const noexcept { return feature_names.size(); }
  /// Schema column of every model feature; throws if one is absent.
  std::vector<std::size_t> columns_in(const FeatureSchema& schema) const;

  friend bool operator==(const LogitModel& a, const LogitModel& b);
};

struct CoefficientStats {
  std::string name;
  double coef = 0.0;
  double std_err = 0.0;
  double z = 0.0;
  double p_value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct FitDiagnostics {
  std::vector<CoefficientStats> coefficients;  // intercept ("constant") first
  int iterations = 0;
  bool converged = false;
  double log_likelihood = 0.0;
  double max_abs_gradient = 0.0;
  std::vector<double> log_likelihood_trace;  // one entry per accepted iterate, starting at beta = 0
};

struct LogitOptions {
  int max_iter = 100;
  double tol = 1e-8;
  /// ||beta|| beyond this is reported as (quasi-)complete separation.
  double separation_norm = 50.0;
  bool standardize = true;
};

struct LogitFit {
  LogitModel model;
  FitDiagnostics diagnostics;
};

inline constexpr double kWaldZ95 = 1.96;

/// z statistic, two-sided normal p-value and 95% interval for one coefficient.
CoefficientStats wald_stats(std::string name, double coef, double std_err);

/// Maximum-likelihood fit by Newton/IRLS with step halving. Labels must be 0/1.
LogitFit fit_logit(const Cohort& data, const LogitOptions& options = {});

/// Standardised design matrix (intercept column first) for `data`, whose
/// schema must contain every model feature.
Eigen::MatrixXd design_matrix(const LogitModel& model, const Cohort& data);

/// Probability of class 1 for a row laid out in model feature order.
double predict_proba(const LogitModel& model, std::span<const double> features);

/// Probability of class 1 for a row laid out per `schema`.
double predict_proba(const LogitModel& model, const FeatureSchema& schema, std::span<const double> row);

/// Low/Medium -> 0, High -> 1, and any row whose outcome flag records a stroke
/// -> 1 regardless of level.
Cohort relabel_binary(const Cohort& data);

/// An explicit multicollinearity repair: `drop` columns go, `keep` (if set)
/// is protected from the variance filter.
struct CorrelationRule {
  std::string keep;
  std::vector<std::string> drop;
};

/// Keep BMI over Height/Weight; drop Ethnicity.
std::vector<CorrelationRule> default_correlation_rules();

/// Applies the explicit rules, then drops columns whose population variance is
/// strictly below the threshold.
Cohort select_features(const Cohort& data, double variance_threshold, std::span<const CorrelationRule> rules);

}  // namespace strokerisk

#endif  // STROKERISK_LOGIT_HPP
