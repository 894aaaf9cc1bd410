#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poststab {

enum class ErrorCode {
  Domain,
  Precondition,
  SpaceMismatch,
  InvalidMeasure,
  InvalidMetric,
  NonFinite,
  DegenerateLikelihood,
  EquivalenceViolation,
  RadiusExceeded,
  SolverFailure,
  SizeCapExceeded,
  NotSpd,
  Singular,
  Parse,
  Validation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const char* what) {
  if (!cond) fail(code, what);
}

}  // namespace poststab
