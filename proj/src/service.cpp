#include "strokerisk/service.hpp"

#include "strokerisk/error.hpp"
#include "strokerisk/evaluation.hpp"
#include "strokerisk/explain.hpp"
#include "strokerisk/reports.hpp"

#include <httplib.h>

#include <cmath>

namespace strokerisk {

namespace {

constexpr int kBadRequest = 400;
constexpr int kUnprocessable = 422;

std::vector<std::string> class_names(int n_classes) {
  if (n_classes == kRiskLevels) return risk_level_names();
  std::vector<std::string> out;
  for (int c = 0; c < n_classes; ++c) out.push_back(std::to_string(c));
  return out;
}

ServiceResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

ServiceResponse error_response(const RequestError& e) {
  return json_response(e.status(), Json{{"error", e.status() == kBadRequest ? "bad_request" : "unprocessable"},
                                        {"field", e.field()},
                                        {"reason", e.reason()}});
}

template <typename F>
ServiceResponse guarded(F&& f) {
  try {
    return f();
  } catch (const RequestError& e) {
    return error_response(e);
  } catch (const Error& e) {
    return json_response(500, Json{{"error", to_string(e.kind())}, {"reason", e.what()}});
  }
}

}  // namespace

InferenceService::InferenceService(ModelBundle bundle)
    : bundle_(std::move(bundle)), factors_(bundle_.schema, bundle_.cspp) {
  for (const auto& name : bundle_.model_features) model_columns_.push_back(bundle_.schema.require(name));
  if (bundle_.kind() == ModelKind::Logit && bundle_.background.row_count() == 0) {
    throw Error(ErrorKind::InvalidArgument, "logistic bundle has no background sample for explanations");
  }
}

std::vector<double> InferenceService::model_row(const std::vector<double>& row) const {
  std::vector<double> out(model_columns_.size());
  for (std::size_t k = 0; k < model_columns_.size(); ++k) out[k] = row[model_columns_[k]];
  return out;
}

ParsedRequest InferenceService::parse_request(std::string_view body) const {
  Json payload;
  try {
    payload = Json::parse(body.begin(), body.end());
  } catch (const nlohmann::json::parse_error&) {
    throw RequestError(kBadRequest, "body", "not valid JSON");
  }
  if (!payload.is_object()) throw RequestError(kBadRequest, "body", "expected a JSON object of feature values");

  const FeatureSchema& schema = bundle_.schema;
  ParsedRequest out;
  out.row.assign(schema.size(), kMissing);
  for (const auto& [name, value] : payload.items()) {
    const auto col = schema.index_of(name);
    if (!col) throw RequestError(kBadRequest, name, "unknown feature");
    const FeatureSpec& spec = schema[*col];
    if (value.is_null()) continue;
    if (!value.is_number()) throw RequestError(kBadRequest, name, "expected a number");
    const double v = value.get<double>();
    if (!std::isfinite(v)) throw RequestError(kBadRequest, name, "expected a finite number");
    if (is_missing(v)) continue;
    if (spec.kind == FeatureKind::Categorical) {
      if (v != std::floor(v)) throw RequestError(kBadRequest, name, "expected an integer category code");
      if (v < 0 || v >= spec.category_count) {
        throw RequestError(kUnprocessable, name,
                           "category code outside 0.." + std::to_string(spec.category_count - 1));
      }
    } else if (spec.valid_range && !spec.valid_range->contains(v)) {
      throw RequestError(kUnprocessable, name,
                         "outside valid range [" + format_number(spec.valid_range->min) + ", " +
                             format_number(spec.valid_range->max) + "]");
    }
    out.row[*col] = v;
  }
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (is_missing(out.row[c])) out.missing_imputed.push_back(schema[c].name);
  }
  return out;
}

Json InferenceService::schema_json() const {
  Json j = to_json(bundle_.schema);
  Json chronic = Json::array();
  for (std::size_t k = 0; k < 8; ++k) chronic.push_back(kFactorNames[k]);
  j["model_kind"] = to_string(bundle_.kind());
  j["model_features"] = bundle_.model_features;
  j["missing_sentinel"] = kMissing;
  j["cspp"] = to_json(bundle_.cspp);
  j["cspp"]["chronic_factors"] = std::move(chronic);
  j["cspp"]["history_factors"] = Json::array({kFactorNames[8], kFactorNames[9]});
  j["cspp"]["medium_factors"] = Json::array({kFactorNames[0], kFactorNames[1], kFactorNames[2]});
  return j;
}

Json InferenceService::predict_json(const ParsedRequest& request) const {
  const RiskLabel label = label_risk(factors_.factors(request.row));
  const auto features = model_row(request.row);
  Json classes = Json::object();
  double probability = 0.0;
  if (const auto* logit = std::get_if<LogitModel>(&bundle_.model)) {
    probability = predict_proba(*logit, features);
    classes["0"] = 1.0 - probability;
    classes["1"] = probability;
  } else {
    const Eigen::VectorXd p = std::holds_alternative<TreeModel>(bundle_.model)
                                  ? predict_tree(std::get<TreeModel>(bundle_.model), features)
                                  : predict_forest(std::get<ForestModel>(bundle_.model), features);
    const auto names = class_names(static_cast<int>(p.size()));
    for (Eigen::Index c = 0; c < p.size(); ++c) classes[names[static_cast<std::size_t>(c)]] = p[c];
    probability = p[p.size() - 1];
  }
  return Json{{"risk_label", to_string(label)},
              {"probability", probability},
              {"class_probabilities", std::move(classes)},
              {"missing_imputed", request.missing_imputed},
              {"model_kind", to_string(bundle_.kind())}};
}

Json InferenceService::explain_json(const ParsedRequest& request) const {
  const auto features = model_row(request.row);
  Explanation e;
  if (const auto* logit = std::get_if<LogitModel>(&bundle_.model)) {
    e = logit_shapley(*logit, features, bundle_.background);
  } else if (const auto* tree = std::get_if<TreeModel>(&bundle_.model)) {
    e = tree_shap(*tree, features, tree->n_classes - 1);
  } else {
    const auto& forest = std::get<ForestModel>(bundle_.model);
    e = tree_shap(forest, features, forest.n_classes - 1);
  }
  Json j = to_json(e, bundle_.model_features);
  j["probability"] = e.output;
  j["missing_imputed"] = request.missing_imputed;
  return j;
}

ServiceResponse InferenceService::get_schema() const { return json_response(200, schema_json()); }

ServiceResponse InferenceService::post_predict(std::string_view body) const {
  return guarded([&] { return json_response(200, predict_json(parse_request(body))); });
}

ServiceResponse InferenceService::post_explain(std::string_view body) const {
  return guarded([&] { return json_response(200, explain_json(parse_request(body))); });
}

ServiceResponse InferenceService::handle(std::string_view method, std::string_view path, std::string_view body) const {
  if (method == "GET" && path == "/schema") return get_schema();
  if (method == "POST" && path == "/predict") return post_predict(body);
  if (method == "POST" && path == "/explain") return post_explain(body);
  return json_response(404, Json{{"error", "not_found"}, {"reason", std::string(method) + " " + std::string(path)}});
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Impl(const InferenceService& s, ServeOptions o) : service(s), options(std::move(o)) {}

  const InferenceService& service;
  ServeOptions options;
  httplib::Server server;
  int port = -1;
};

HttpServer::HttpServer(const InferenceService& service, ServeOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& server = impl_->server;
  const InferenceService* svc = &impl_->service;
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get("/schema", [svc, reply](const httplib::Request&, httplib::Response& res) { reply(res, svc->get_schema()); });
  server.Post("/predict", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->post_predict(req.body));
  });
  server.Post("/explain", [svc, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc->post_explain(req.body));
  });
  if (impl_->options.static_dir) {
    if (!server.set_mount_point("/", impl_->options.static_dir->string())) {
      throw Error(ErrorKind::Io, "static directory '" + impl_->options.static_dir->string() + "' does not exist");
    }
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  impl_->port = o.port == 0 ? impl_->server.bind_to_any_port(o.host) : (impl_->server.bind_to_port(o.host, o.port) ? o.port : -1);
  if (impl_->port < 0) throw Error(ErrorKind::Io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  return impl_->port;
}

void HttpServer::listen() {
  if (impl_->port < 0) bind();
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace strokerisk
