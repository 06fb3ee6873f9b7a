#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlt {

enum class ErrorCode {
  domain,
  shape,
  model_evaluation,
  frame,
  band,
  positivity,
  insufficient_data,
  support,
  tolerance,
  stagnation,
  blowup,
  contraction_failure,
  stiff_source,
  degenerate,
  config,
  io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of the numerics themselves (as opposed to bad input).
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::tolerance:
      case ErrorCode::stagnation:
      case ErrorCode::blowup:
      case ErrorCode::contraction_failure:
      case ErrorCode::stiff_source:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::shape: return "shape";
    case ErrorCode::model_evaluation: return "model_evaluation";
    case ErrorCode::frame: return "frame";
    case ErrorCode::band: return "band";
    case ErrorCode::positivity: return "positivity";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::support: return "support";
    case ErrorCode::tolerance: return "tolerance";
    case ErrorCode::stagnation: return "stagnation";
    case ErrorCode::blowup: return "blowup";
    case ErrorCode::contraction_failure: return "contraction_failure";
    case ErrorCode::stiff_source: return "stiff_source";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace nlt
