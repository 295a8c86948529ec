#pragma once

#include <stdexcept>
#include <string>

namespace mcnest {

enum class ErrorCode {
  ok = 0,
  invalid_argument,
  structure,
  precondition,
  config,
  parse,
  validation,
  refine_parse,
  reward_parse,
  reward_range,
  quality_parse,
  transport,
  timeout,
  transcript,
  init_failure,
  io,
  internal,
};

const char* error_code_name(ErrorCode code) noexcept;  // stable names for records

/// Single exception type for the whole library; the code discriminates the
/// failure class and maps one-to-one onto the C API status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mcnest
