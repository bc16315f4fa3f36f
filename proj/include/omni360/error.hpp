#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace omni360 {

enum class ErrorCode {
  InvalidArgument,
  InvalidScene,
  InvalidDepth,
  ShapeMismatch,
  Parse,
  Io,
  Infeasible,
  Degenerate,
};

constexpr std::string_view error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InvalidScene: return "invalid-scene";
    case ErrorCode::InvalidDepth: return "invalid-depth";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Io: return "io";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Degenerate: return "degenerate";
  }
  return "unknown";
}

/// Every failure the library reports. The code doubles as the
/// machine-readable prefix the CLI prints.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace omni360
