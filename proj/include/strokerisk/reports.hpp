#ifndef STROKERISK_REPORTS_HPP
#define STROKERISK_REPORTS_HPP

#include "strokerisk/config.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/evaluation.hpp"
#include "strokerisk/explain.hpp"
#include "strokerisk/logit.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace strokerisk {

/// Shortest decimal text that parses back to `v`.
std::string format_number(double v);

Json to_json(const CleansingReport& report);
Json to_json(const ClassificationReport& report);
Json to_json(const CohortStats& stats);

/// Coefficient table: one row per term, intercept ("constant") last as in the
/// usual regression printout.
Json coefficient_report(const FitDiagnostics& diagnostics);
std::string coefficient_csv(const FitDiagnostics& diagnostics);

Json to_json(const std::vector<LevelProbability>& levels);

Json to_json(const Explanation& explanation, const std::vector<std::string>& feature_names);

/// feature,importance sorted by decreasing importance (stable on ties).
std::string importance_csv(const std::vector<std::string>& feature_names, const Eigen::VectorXd& importance);
/// feature,importance,score_mean,score_sd, then one column per repetition.
std::string permutation_csv(const PermutationReport& report);
/// row,feature,shap,value
std::string shap_summary_csv(const ShapSummary& summary);
/// feature,mean_abs_shap in ranking order.
std::string shap_ranking_csv(const ShapSummary& summary);
std::string dependence_csv(const std::vector<DependencePoint>& points, std::string_view feature_a,
                           std::string_view feature_b);
/// feature,proportion,mean,band_low,band_high; the uncorrupted baseline is
/// written as proportion 0 under feature "(baseline)".
std::string sweep_csv(const SweepResult& result);
/// step,n_features,weighted_precision,removed,features (';'-joined)
std::string rfe_csv(const RfeTrace& trace);

}  // namespace strokerisk

#endif  // STROKERISK_REPORTS_HPP
