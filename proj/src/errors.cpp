#include "mcnest/errors.hpp"

namespace mcnest {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ok:
      return "ok";
    case ErrorCode::invalid_argument:
      return "invalid_argument";
    case ErrorCode::structure:
      return "structure";
    case ErrorCode::precondition:
      return "precondition";
    case ErrorCode::config:
      return "config";
    case ErrorCode::parse:
      return "parse";
    case ErrorCode::validation:
      return "validation";
    case ErrorCode::refine_parse:
      return "refine_parse";
    case ErrorCode::reward_parse:
      return "reward_parse";
    case ErrorCode::reward_range:
      return "reward_range";
    case ErrorCode::quality_parse:
      return "quality_parse";
    case ErrorCode::transport:
      return "transport";
    case ErrorCode::timeout:
      return "timeout";
    case ErrorCode::transcript:
      return "transcript";
    case ErrorCode::init_failure:
      return "init_failure";
    case ErrorCode::io:
      return "io";
    case ErrorCode::internal:
      return "internal";
  }
  return "?";
}

}  // namespace mcnest
