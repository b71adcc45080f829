#ifndef STROKERISK_SERVICE_HPP
#define STROKERISK_SERVICE_HPP

#include "strokerisk/bundle.hpp"
#include "strokerisk/config.hpp"
#include "strokerisk/cspp.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace strokerisk {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Rejected request: 400 for payloads that break the schema (unknown field,
/// wrong type), 422 for well-typed values outside their valid range.
class RequestError : public std::runtime_error {
 public:
  RequestError(int status, std::string field, std::string reason)
      : std::runtime_error(field + ": " + reason), status_(status), field_(std::move(field)),
        reason_(std::move(reason)) {}

  int status() const noexcept { return status_; }
  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  int status_;
  std::string field_;
  std::string reason_;
};

/// A validated request: one cell per schema column, plus the columns that
/// were omitted, null or -1 and so hold the missing sentinel.
struct ParsedRequest {
  std::vector<double> row;
  std::vector<std::string> missing_imputed;
};

/// Stateless request handlers over an immutable bundle. All methods are
/// const and safe to call concurrently.
class InferenceService {
 public:
  explicit InferenceService(ModelBundle bundle);

  const ModelBundle& bundle() const noexcept { return bundle_; }

  ServiceResponse get_schema() const;
  ServiceResponse post_predict(std::string_view body) const;
  ServiceResponse post_explain(std::string_view body) const;

  /// Routes by method and path; unknown routes answer 404.
  ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

  /// Throws RequestError.
  ParsedRequest parse_request(std::string_view body) const;

  Json schema_json() const;
  Json predict_json(const ParsedRequest& request) const;
  Json explain_json(const ParsedRequest& request) const;

 private:
  std::vector<double> model_row(const std::vector<double>& row) const;

  ModelBundle bundle_;
  std::vector<std::size_t> model_columns_;
  FactorReader factors_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0: pick a free port
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end for an InferenceService, with an optional static mount for
/// the web UI.
class HttpServer {
 public:
  HttpServer(const InferenceService& service, ServeOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the port.
  int bind();
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace strokerisk

#endif  // STROKERISK_SERVICE_HPP
