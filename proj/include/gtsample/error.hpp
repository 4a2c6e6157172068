#pragma once

#include <stdexcept>
#include <string>

namespace gtsample {

enum class ErrorCode {
  invalid_argument,
  invalid_k,
  infeasible_counts,
  count_exceeds_pool,
  empty_list,
  invalid_a0,
  antichain_violation,
  overflow,
  bound_violation,
  empty_cell,
  parse_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_k: return "invalid-k";
    case ErrorCode::infeasible_counts: return "infeasible-counts";
    case ErrorCode::count_exceeds_pool: return "count-exceeds-pool";
    case ErrorCode::empty_list: return "empty-list";
    case ErrorCode::invalid_a0: return "invalid-a0";
    case ErrorCode::antichain_violation: return "antichain-violation";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::bound_violation: return "bound-violation";
    case ErrorCode::empty_cell: return "empty-cell";
    case ErrorCode::parse_error: return "parse-error";
  }
  return "unknown";
}

/// Library error carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gtsample
