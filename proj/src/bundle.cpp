#include "strokerisk/bundle.hpp"

#include "strokerisk/error.hpp"

namespace strokerisk {

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, std::string("bundle: '") + what + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

const Json& field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::Parse, std::string("bundle: missing field '") + key + "'");
  return *it;
}

Json tree_json(const TreeModel& t) {
  Json nodes = Json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(Json{{"feature", n.rule.feature},
                         {"threshold", n.rule.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"n_samples", n.n_samples},
                         {"class_counts", n.class_counts},
                         {"impurity", n.impurity}});
  }
  return Json{{"n_classes", t.n_classes},
              {"n_features", t.n_features},
              {"config", to_json(t.config)},
              {"nodes", std::move(nodes)}};
}

TreeModel tree_from_json(const Json& j) {
  TreeModel t;
  t.n_classes = field(j, "n_classes").get<int>();
  t.n_features = field(j, "n_features").get<int>();
  t.config = train_config_from_json(field(j, "config"));
  for (const auto& n : field(j, "nodes")) {
    TreeNode node;
    node.rule.feature = field(n, "feature").get<int>();
    node.rule.threshold = field(n, "threshold").get<double>();
    node.left = field(n, "left").get<int>();
    node.right = field(n, "right").get<int>();
    node.n_samples = field(n, "n_samples").get<int>();
    node.class_counts = field(n, "class_counts").get<std::vector<int>>();
    node.impurity = field(n, "impurity").get<double>();
    t.nodes.push_back(std::move(node));
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw Error(ErrorKind::Parse, "bundle: tree without nodes");
  for (const auto& n : t.nodes) {
    const bool leaf = n.is_leaf();
    if (!leaf && (n.rule.feature >= t.n_features || n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw Error(ErrorKind::Parse, "bundle: tree node refers outside the tree");
    }
    if (static_cast<int>(n.class_counts.size()) != t.n_classes) {
      throw Error(ErrorKind::Parse, "bundle: node class counts do not match n_classes");
    }
  }
  return t;
}

Json forest_json(const ForestModel& f) {
  Json trees = Json::array();
  for (const auto& t : f.trees) trees.push_back(tree_json(t));
  return Json{{"n_classes", f.n_classes},
              {"n_features", f.n_features},
              {"feature_subsample_size", f.feature_subsample_size},
              {"config", to_json(f.config)},
              {"tree_seeds", f.tree_seeds},
              {"trees", std::move(trees)}};
}

ForestModel forest_from_json(const Json& j) {
  ForestModel f;
  f.n_classes = field(j, "n_classes").get<int>();
  f.n_features = field(j, "n_features").get<int>();
  f.feature_subsample_size = field(j, "feature_subsample_size").get<int>();
  f.config = train_config_from_json(field(j, "config"));
  f.tree_seeds = field(j, "tree_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& t : field(j, "trees")) f.trees.push_back(tree_from_json(t));
  if (f.trees.empty() || f.trees.size() != f.tree_seeds.size()) {
    throw Error(ErrorKind::Parse, "bundle: forest needs one seed per tree and at least one tree");
  }
  return f;
}

Json logit_json(const LogitModel& m) {
  return Json{{"feature_names", m.feature_names},
              {"coefficients", vector_json(m.coefficients)},
              {"means", vector_json(m.means)},
              {"scales", vector_json(m.scales)}};
}

LogitModel logit_from_json(const Json& j) {
  LogitModel m;
  m.feature_names = field(j, "feature_names").get<std::vector<std::string>>();
  m.coefficients = vector_from_json(field(j, "coefficients"), "coefficients");
  m.means = vector_from_json(field(j, "means"), "means");
  m.scales = vector_from_json(field(j, "scales"), "scales");
  const auto p = static_cast<Eigen::Index>(m.feature_names.size());
  if (m.coefficients.size() != p + 1 || m.means.size() != p || m.scales.size() != p) {
    throw Error(ErrorKind::Parse, "bundle: logistic model vectors have inconsistent lengths");
  }
  return m;
}

int model_width(const ModelBundle& b) {
  return std::visit(
      [](const auto& m) -> int {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LogitModel>) {
          return static_cast<int>(m.feature_count());
        } else {
          return m.n_features;
        }
      },
      b.model);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Logit: return "logit";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "tree") return ModelKind::Tree;
  if (text == "forest") return ModelKind::Forest;
  if (text == "logit") return ModelKind::Logit;
  throw Error(ErrorKind::InvalidArgument, "unknown model kind '" + std::string(text) + "' (tree, forest or logit)");
}

ModelKind ModelBundle::kind() const { return static_cast<ModelKind>(model.index()); }

Json to_json(const ModelBundle& b) {
  Json payload = std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TreeModel>) return tree_json(m);
        else if constexpr (std::is_same_v<M, ForestModel>) return forest_json(m);
        else return logit_json(m);
      },
      b.model);
  Json background = Json::array();
  for (std::size_t i = 0; i < b.background.row_count(); ++i) {
    const auto row = b.background.row(i);
    background.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return Json{{"format_version", b.version},
              {"kind", to_string(b.kind())},
              {"schema", to_json(b.schema)},
              {"model_features", b.model_features},
              {"cleanse", to_json(b.cleanse)},
              {"cspp", to_json(b.cspp)},
              {"provenance", Json{{"seed", b.provenance.seed},
                                  {"config", b.provenance.config},
                                  {"data_fingerprint", b.provenance.data_fingerprint},
                                  {"training_rows", b.provenance.training_rows},
                                  {"diagnostics", b.provenance.diagnostics}}},
              {"model", std::move(payload)},
              {"background", std::move(background)}};
}

ModelBundle bundle_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "bundle: expected a JSON object");
  ModelBundle b;
  try {
    b.version = field(j, "format_version").get<int>();
    if (b.version != kBundleVersion) {
      throw Error(ErrorKind::Unsupported, "bundle: format version " + std::to_string(b.version) +
                                              " is not supported (expected " + std::to_string(kBundleVersion) + ")");
    }
    const ModelKind kind = parse_model_kind(field(j, "kind").get<std::string>());
    const Json& payload = field(j, "model");
    switch (kind) {
      case ModelKind::Tree: b.model = tree_from_json(payload); break;
      case ModelKind::Forest: b.model = forest_from_json(payload); break;
      case ModelKind::Logit: b.model = logit_from_json(payload); break;
    }
    b.schema = schema_from_json(field(j, "schema"));
    b.model_features = field(j, "model_features").get<std::vector<std::string>>();
    b.cleanse = cleanse_config_from_json(field(j, "cleanse"));
    b.cspp = cspp_config_from_json(field(j, "cspp"));
    const Json& prov = field(j, "provenance");
    b.provenance.seed = field(prov, "seed").get<std::uint64_t>();
    b.provenance.config = field(prov, "config");
    b.provenance.data_fingerprint = field(prov, "data_fingerprint").get<std::uint64_t>();
    b.provenance.training_rows = field(prov, "training_rows").get<std::size_t>();
    b.provenance.diagnostics = field(prov, "diagnostics");

    std::vector<std::size_t> columns;
    for (const auto& name : b.model_features) columns.push_back(b.schema.require(name));
    if (static_cast<int>(columns.size()) != model_width(b)) {
      throw Error(ErrorKind::Parse, "bundle: model_features does not match the model width");
    }
    const Json& background = field(j, "background");
    if (!background.empty()) {
      CellMatrix cells(static_cast<Eigen::Index>(background.size()), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t i = 0; i < background.size(); ++i) {
        const auto row = background[i].get<std::vector<double>>();
        if (row.size() != columns.size()) throw Error(ErrorKind::Parse, "bundle: background row width mismatch");
        for (std::size_t k = 0; k < row.size(); ++k) {
          cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
        }
      }
      b.background = Cohort(b.schema.select(columns), std::move(cells));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bundle: ") + e.what());
  }
  return b;
}

std::string serialize_bundle(const ModelBundle& bundle) { return dump_json(to_json(bundle)); }

ModelBundle parse_bundle(std::string_view text) { return bundle_from_json(parse_json(text, "bundle")); }

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  write_text_file(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_text_file(path)); }

}  // namespace strokerisk
