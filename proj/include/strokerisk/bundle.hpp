#ifndef STROKERISK_BUNDLE_HPP
#define STROKERISK_BUNDLE_HPP

#include "strokerisk/cohort.hpp"
#include "strokerisk/config.hpp"
#include "strokerisk/cspp.hpp"
#include "strokerisk/logit.hpp"
#include "strokerisk/tree.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace strokerisk {

inline constexpr int kBundleVersion = 1;

enum class ModelKind { Tree, Forest, Logit };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct Provenance {
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::uint64_t data_fingerprint = 0;
  std::size_t training_rows = 0;
  /// Fit summary kept for later reports (the coefficient table of a logistic
  /// fit); null for tree models.
  Json diagnostics;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A trained model with everything needed to serve it. `schema` is the input
/// layout requests are validated against; `model_features` names the columns
/// the model reads, in model order.
struct ModelBundle {
  int version = kBundleVersion;
  std::variant<TreeModel, ForestModel, LogitModel> model;
  FeatureSchema schema;
  std::vector<std::string> model_features;
  CleanseConfig cleanse;
  CsppConfig cspp;
  Provenance provenance;
  /// Logistic bundles only: rows (in model feature order) that define the
  /// "feature absent" reference for interventional Shapley values.
  Cohort background;

  ModelKind kind() const;

  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

Json to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const Json& j);

std::string serialize_bundle(const ModelBundle& bundle);
ModelBundle parse_bundle(std::string_view text);
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

}  // namespace strokerisk

#endif  // STROKERISK_BUNDLE_HPP
