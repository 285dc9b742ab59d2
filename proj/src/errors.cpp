#include "microlam/errors.hpp"

namespace microlam {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::unsupported_order: return "unsupported-order";
    case ErrorCode::compatibility: return "compatibility";
    case ErrorCode::degenerate_parameters: return "degenerate-parameters";
    case ErrorCode::tiling: return "tiling";
    case ErrorCode::enumeration_guard: return "enumeration-guard";
    case ErrorCode::sequencing: return "sequencing";
    case ErrorCode::fit: return "fit";
    case ErrorCode::must_calibrate: return "must-calibrate";
    case ErrorCode::io: return "io";
    case ErrorCode::trivial_input: return "trivial-input";
    case ErrorCode::membership: return "membership";
  }
  return "unknown";
}

}  // namespace microlam
