#include "strokerisk/logit.hpp"

#include "strokerisk/cspp.hpp"
#include "strokerisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace strokerisk {

std::vector<std::size_t> LogitModel::columns_in(const FeatureSchema& schema) const {
  std::vector<std::size_t> out;
  out.reserve(feature_names.size());
  for (const auto& name : feature_names) out.push_back(schema.require(name));
  return out;
}

bool operator==(const LogitModel& a, const LogitModel& b) {
  auto same = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.size() == y.size() && x == y; };
  return a.feature_names == b.feature_names && same(a.coefficients, b.coefficients) && same(a.means, b.means) &&
         same(a.scales, b.scales);
}

Eigen::MatrixXd design_matrix(const LogitModel& model, const Cohort& data) {
  const auto cols = model.columns_in(data.schema());
  const auto n = static_cast<Eigen::Index>(data.row_count());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()) + 1);
  x.col(0).setOnes();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    x.col(j + 1) = (data.cells().col(static_cast<Eigen::Index>(cols[k])).array() - model.means[j]) / model.scales[j];
  }
  return x;
}

double predict_proba(const LogitModel& model, std::span<const double> features) {
  if (features.size() != model.feature_count())
    throw Error(ErrorKind::InvalidArgument, "row width does not match the logistic model");
  double z = model.coefficients[0];
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    z += model.coefficients[j + 1] * (features[k] - model.means[j]) / model.scales[j];
  }
  return sigmoid(z);
}

double predict_proba(const LogitModel& model, const FeatureSchema& schema, std::span<const double> row) {
  const auto cols = model.columns_in(schema);
  std::vector<double> features(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) features[k] = row[cols[k]];
  return predict_proba(model, features);
}

namespace {

// Change in log-likelihood between two linear predictors, summed row by row.
// Near the optimum the change is far below the rounding error of the full
// sum, so it is computed from per-row differences instead: for small steps
// log(1 + e^(eta + d)) - log(1 + e^eta) = log1p(p * expm1(d)).
double log_likelihood_gain(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const Eigen::VectorXd& next) {
  double gain = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double d = next[i] - eta[i];
    const double change = std::abs(d) < 1.0 ? std::log1p(sigmoid(eta[i]) * std::expm1(d))
                                            : log1p_exp(next[i]) - log1p_exp(eta[i]);
    gain += y[i] * d - change;
  }
  return gain;
}

}  // namespace

LogitFit fit_logit(const Cohort& data, const LogitOptions& options) {
  if (!data.has_labels()) throw Error(ErrorKind::InvalidArgument, "logistic fit needs 0/1 labels");
  const auto n = data.row_count();
  const auto p = data.feature_count();
  if (n <= p) throw Error(ErrorKind::InvalidArgument, "logistic fit needs more rows than features");
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < n; ++i) {
    const int l = data.labels()[i];
    if (l != 0 && l != 1) throw Error(ErrorKind::InvalidArgument, "logistic fit needs labels in {0, 1}");
    seen[l] = true;
    y[static_cast<Eigen::Index>(i)] = l;
  }
  if (!seen[0] || !seen[1]) throw Error(ErrorKind::InvalidArgument, "logistic fit needs both classes present");

  LogitModel model;
  model.feature_names = data.schema().names();
  model.means = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
  model.scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
  if (options.standardize) {
    for (std::size_t j = 0; j < p; ++j) {
      if (data.schema()[j].kind != FeatureKind::Numerical) continue;
      const auto col = data.cells().col(static_cast<Eigen::Index>(j));
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().mean());
      model.means[static_cast<Eigen::Index>(j)] = mean;
      if (sd > 0.0) model.scales[static_cast<Eigen::Index>(j)] = sd;
    }
  }
  model.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p) + 1);
  const Eigen::MatrixXd x = design_matrix(model, data);

  FitDiagnostics diag;
  Eigen::VectorXd beta = model.coefficients;
  double ll = log_likelihood(x, y, beta);
  diag.log_likelihood_trace.push_back(ll);
  Eigen::VectorXd eta = x * beta;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::VectorXd grad = score(x, y, beta);
    if (grad.cwiseAbs().maxCoeff() < options.tol) {
      diag.converged = true;
      break;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(fisher_information(x, beta));
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::Numerical, "information matrix is singular (collinear or constant features?)");
    const Eigen::VectorXd step = llt.solve(grad);
    if (!step.allFinite()) throw Error(ErrorKind::Numerical, "Newton step is not finite");

    double scale = 1.0;
    Eigen::VectorXd candidate = beta + step;
    Eigen::VectorXd candidate_eta = x * candidate;
    double gain = log_likelihood_gain(y, eta, candidate_eta);
    for (int halving = 0; halving < 40 && !(gain >= 0.0); ++halving) {
      scale *= 0.5;
      candidate = beta + scale * step;
      candidate_eta = x * candidate;
      gain = log_likelihood_gain(y, eta, candidate_eta);
    }
    if (!(gain >= 0.0)) break;  // no ascent direction left at machine precision
    beta = candidate;
    eta = std::move(candidate_eta);
    ll += gain;
    diag.iterations = iter + 1;
    diag.log_likelihood_trace.push_back(ll);
    if (beta.norm() > options.separation_norm)
      throw Error(ErrorKind::Separation, "coefficients diverge (||beta|| > " + std::to_string(options.separation_norm) +
                                             "): the classes are (quasi-)perfectly separated");
    if ((scale * step).norm() < options.tol) {
      diag.converged = true;
      break;
    }
  }

  model.coefficients = beta;
  diag.log_likelihood = log_likelihood(x, y, beta);
  diag.max_abs_gradient = score(x, y, beta).cwiseAbs().maxCoeff();

  const Eigen::LLT<Eigen::MatrixXd> llt(fisher_information(x, beta));
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "information matrix is singular at the optimum");
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    diag.coefficients.push_back(
        wald_stats(j == 0 ? "constant" : model.feature_names[static_cast<std::size_t>(j - 1)], beta[j],
                   std::sqrt(cov(j, j))));
  }
  return {std::move(model), std::move(diag)};
}

CoefficientStats wald_stats(std::string name, double coef, double std_err) {
  CoefficientStats row;
  row.name = std::move(name);
  row.coef = coef;
  row.std_err = std_err;
  row.z = coef / std_err;
  row.p_value = std::erfc(std::abs(row.z) / std::sqrt(2.0));
  row.ci_low = coef - kWaldZ95 * std_err;
  row.ci_high = coef + kWaldZ95 * std_err;
  return row;
}

Cohort relabel_binary(const Cohort& data) {
  if (data.row_count() == 0) return data.with_labels({});
  if (!data.has_labels() && !data.has_outcome()) throw Error(ErrorKind::InvalidArgument, "cohort has no labels");
  std::vector<int> y(data.row_count());
  for (std::size_t i = 0; i < data.row_count(); ++i) {
    const int level = data.has_labels() ? data.labels()[i] : kUnlabeled;
    const bool stroke = data.has_outcome() && data.outcome()[i] == 1;
    if (stroke) {
      y[i] = 1;
    } else if (level == kUnlabeled) {
      throw Error(ErrorKind::InvalidArgument, "row " + std::to_string(i) + " has no risk level and no stroke record");
    } else {
      y[i] = level == static_cast<int>(RiskLabel::High) ? 1 : 0;
    }
  }
  return data.with_labels(std::move(y));
}

std::vector<CorrelationRule> default_correlation_rules() {
  return {{"BMI", {"Height", "Weight"}}, {"", {"Ethnicity"}}};
}

Cohort select_features(const Cohort& data, double variance_threshold, std::span<const CorrelationRule> rules) {
  const auto& schema = data.schema();
  std::set<std::size_t> dropped, protected_cols;
  for (const auto& rule : rules) {
    if (!rule.keep.empty()) protected_cols.insert(schema.require(rule.keep));
    for (const auto& name : rule.drop) dropped.insert(schema.require(name));
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (dropped.count(j)) continue;
    if (!protected_cols.count(j)) {
      const auto col = data.cells().col(static_cast<Eigen::Index>(j));
      const double variance = data.row_count() ? (col.array() - col.mean()).square().mean() : 0.0;
      if (variance < variance_threshold) continue;
    }
    keep.push_back(j);
  }
  return data.select_columns(keep);
}

}  // namespace strokerisk
