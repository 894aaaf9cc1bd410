#include "poststab/error.hpp"

namespace poststab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "domain error";
    case ErrorCode::Precondition: return "precondition violated";
    case ErrorCode::SpaceMismatch: return "space mismatch";
    case ErrorCode::InvalidMeasure: return "invalid measure";
    case ErrorCode::InvalidMetric: return "invalid metric";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::DegenerateLikelihood: return "degenerate likelihood";
    case ErrorCode::EquivalenceViolation: return "equivalence violation";
    case ErrorCode::RadiusExceeded: return "radius exceeded";
    case ErrorCode::SolverFailure: return "solver failure";
    case ErrorCode::SizeCapExceeded: return "size cap exceeded";
    case ErrorCode::NotSpd: return "matrix not SPD";
    case ErrorCode::Singular: return "measures are singular";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Validation: return "validation error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace poststab
