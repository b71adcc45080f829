#include "strokerisk/reports.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace strokerisk {

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json class_metrics_json(const ClassMetrics& m) {
  return Json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Json to_json(const CleansingReport& r) {
  Json dropped = Json::array();
  for (const auto& [name, frac] : r.dropped_columns) dropped.push_back(Json{{"column", name}, {"missing_fraction", frac}});
  return Json{{"rows_in", r.rows_in},
              {"rows_out", r.rows_out},
              {"dropped_columns", std::move(dropped)},
              {"imputed_cells", r.imputed_cells},
              {"corrected_bp_rows", r.corrected_bp_rows}};
}

Json to_json(const ClassificationReport& r) {
  Json classes = Json::object();
  Json order = Json::array();
  for (const auto& m : r.classes) {
    classes[m.name] = class_metrics_json(m);
    order.push_back(m.name);
  }
  Json confusion = Json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) row.push_back(r.confusion(i, j));
    confusion.push_back(std::move(row));
  }
  return Json{{"class_order", std::move(order)},
              {"classes", std::move(classes)},
              {"accuracy", r.accuracy},
              {"macro_avg", class_metrics_json(r.macro_avg)},
              {"weighted_avg", class_metrics_json(r.weighted_avg)},
              {"confusion", std::move(confusion)},
              {"warnings", r.warnings}};
}

Json to_json(const CohortStats& s) {
  Json factors = Json::array();
  for (std::size_t k = 0; k < RiskFactors::kCount; ++k) {
    factors.push_back(Json{{"factor", kFactorNames[k]},
                           {"exposure_rate", s.exposure_rate[k]},
                           {"risk_attribution", optional_number(s.risk_attribution[k])}});
  }
  return Json{{"rows", s.row_count}, {"factors", std::move(factors)}};
}

Json coefficient_report(const FitDiagnostics& d) {
  Json rows = Json::array();
  auto add = [&](const CoefficientStats& c) {
    rows.push_back(Json{{"feature", c.name},
                        {"coef", c.coef},
                        {"std_err", c.std_err},
                        {"z", c.z},
                        {"p_value", c.p_value},
                        {"ci_low", c.ci_low},
                        {"ci_high", c.ci_high}});
  };
  for (std::size_t i = 1; i < d.coefficients.size(); ++i) add(d.coefficients[i]);
  if (!d.coefficients.empty()) add(d.coefficients.front());
  return Json{{"coefficients", std::move(rows)},
              {"iterations", d.iterations},
              {"converged", d.converged},
              {"log_likelihood", d.log_likelihood},
              {"max_abs_gradient", d.max_abs_gradient}};
}

std::string coefficient_csv(const FitDiagnostics& d) {
  std::string out = "feature,coef,std_err,z,p_value,ci_low,ci_high\n";
  auto add = [&](const CoefficientStats& c) {
    out += csv_field(c.name);
    for (double v : {c.coef, c.std_err, c.z, c.p_value, c.ci_low, c.ci_high}) out += "," + format_number(v);
    out += "\n";
  };
  for (std::size_t i = 1; i < d.coefficients.size(); ++i) add(d.coefficients[i]);
  if (!d.coefficients.empty()) add(d.coefficients.front());
  return out;
}

Json to_json(const std::vector<LevelProbability>& levels) {
  Json rows = Json::array();
  for (const auto& l : levels) {
    rows.push_back(Json{{"level", to_string(l.level)},
                        {"count", l.count},
                        {"mean", l.mean},
                        {"ci_low", l.ci_low},
                        {"ci_high", l.ci_high}});
  }
  return rows;
}

Json to_json(const Explanation& e, const std::vector<std::string>& names) {
  Json contributions = Json::object();
  Json order = Json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    contributions[names[i]] = e.contributions[static_cast<Eigen::Index>(i)];
    order.push_back(names[i]);
  }
  return Json{{"base_value", e.base_value},
              {"output", e.output},
              {"target_class", e.target_class},
              {"feature_order", std::move(order)},
              {"contributions", std::move(contributions)}};
}

std::string importance_csv(const std::vector<std::string>& names, const Eigen::VectorXd& importance) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importance[static_cast<Eigen::Index>(a)] > importance[static_cast<Eigen::Index>(b)];
  });
  std::string out = "feature,importance\n";
  for (std::size_t i : order) {
    out += csv_field(names[i]) + "," + format_number(importance[static_cast<Eigen::Index>(i)]) + "\n";
  }
  return out;
}

std::string permutation_csv(const PermutationReport& r) {
  std::string out = "feature,importance,score_mean,score_sd";
  for (int k = 0; k < r.repetitions; ++k) out += ",rep" + std::to_string(k);
  out += "\n";
  for (std::size_t f = 0; f < r.feature_names.size(); ++f) {
    const auto row = r.scores.row(static_cast<Eigen::Index>(f));
    const double mean = row.mean();
    const double sd = std::sqrt((row.array() - mean).square().mean());
    out += csv_field(r.feature_names[f]) + "," + format_number(r.importance[static_cast<Eigen::Index>(f)]) + "," +
           format_number(mean) + "," + format_number(sd);
    for (Eigen::Index k = 0; k < row.size(); ++k) out += "," + format_number(row[k]);
    out += "\n";
  }
  return out;
}

std::string shap_summary_csv(const ShapSummary& s) {
  std::string out = "row,feature,shap,value\n";
  for (const auto& r : s.records) {
    out += std::to_string(r.row) + "," + csv_field(s.feature_names[r.feature]) + "," + format_number(r.shap) + "," +
           format_number(r.value) + "\n";
  }
  return out;
}

std::string shap_ranking_csv(const ShapSummary& s) {
  std::string out = "feature,mean_abs_shap\n";
  for (const auto& [f, v] : s.ranking) out += csv_field(s.feature_names[f]) + "," + format_number(v) + "\n";
  return out;
}

std::string dependence_csv(const std::vector<DependencePoint>& points, std::string_view a, std::string_view b) {
  std::string out = csv_field(a) + "," + csv_field(std::string("shap ") + std::string(a)) + "," + csv_field(b) + "\n";
  for (const auto& p : points) {
    out += format_number(p.value_a) + "," + format_number(p.shap_a) + "," + format_number(p.value_b) + "\n";
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string out = "feature,proportion,mean,band_low,band_high\n";
  out += "(baseline),0," + format_number(r.baseline) + "," + format_number(r.baseline) + "," +
         format_number(r.baseline) + "\n";
  for (const auto& curve : r.curves) {
    for (const auto& p : curve.points) {
      out += csv_field(curve.feature) + "," + format_number(p.proportion) + "," + format_number(p.mean) + "," +
             format_number(p.band_low) + "," + format_number(p.band_high) + "\n";
    }
  }
  return out;
}

std::string rfe_csv(const RfeTrace& trace) {
  std::string out = "step,n_features,weighted_precision,removed,features\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    std::string joined;
    for (std::size_t k = 0; k < s.features.size(); ++k) joined += (k ? ";" : "") + s.features[k];
    out += std::to_string(i) + "," + std::to_string(s.features.size()) + "," + format_number(s.weighted_precision) +
           "," + csv_field(s.removed.value_or("")) + "," + csv_field(joined) + "\n";
  }
  return out;
}

}  // namespace strokerisk
