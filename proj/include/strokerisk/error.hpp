#ifndef STROKERISK_ERROR_HPP
#define STROKERISK_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace strokerisk {

/// Machine-readable error category; the CLI prints it as the first token of
/// its error line and the service maps it to an HTTP status.
enum class ErrorKind {
  InvalidArgument,
  Io,
  Schema,
  Parse,
  Range,
  Numerical,
  Separation,
  Unsupported,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Range: return "range";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Separation: return "separation";
    case ErrorKind::Unsupported: return "unsupported";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace strokerisk

#endif  // STROKERISK_ERROR_HPP
