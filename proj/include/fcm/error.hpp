#pragma once

#include <stdexcept>
#include <string>

namespace fcm {

enum class ErrorCode {
  invalid_map,       // map invariants violated
  invalid_argument,  // malformed call arguments (lengths, ranges)
  not_found,         // unknown factor, map, label
  unsupported,       // unsupported format version or typology cell
  parse_error,       // malformed document text
  schema_error,      // document parsed but a field is wrong
  unreachable,       // scenario inversion has zero gain
  locked,            // stabilization impossible: all edges locked
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_map: return "invalid_map";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_error: return "schema_error";
    case ErrorCode::unreachable: return "unreachable";
    case ErrorCode::locked: return "locked";
  }
  return "unknown";
}

/// Every failure raised by the library. `code()` is stable and machine
/// readable; `what()` names the offending identifier.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fcm
