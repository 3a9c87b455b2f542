#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace decoysync {

enum class ErrorKind {
  InvalidConfig,
  InvalidInput,
  DegenerateSeries,
  UndefinedQber,
  Infeasible,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::InvalidConfig:
    return "invalid-config";
  case ErrorKind::InvalidInput:
    return "invalid-input";
  case ErrorKind::DegenerateSeries:
    return "degenerate-series";
  case ErrorKind::UndefinedQber:
    return "undefined-qber";
  case ErrorKind::Infeasible:
    return "infeasible";
  case ErrorKind::Io:
    return "io-error";
  }
  return "unknown";
}

//! Every failure raised by the library carries one of the ErrorKind tags so
//! callers (and the CLI exit path) can tell configuration problems from
//! numerical ones.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace decoysync
