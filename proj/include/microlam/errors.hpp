#pragma once

#include <stdexcept>
#include <string>

namespace microlam {

enum class ErrorCode {
  invalid_input = 1,
  dimension_mismatch,
  unsupported_order,
  compatibility,
  degenerate_parameters,
  tiling,
  enumeration_guard,
  sequencing,
  fit,
  must_calibrate,
  io,
  trivial_input,
  membership,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, msg) unless cond holds.
inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace microlam
