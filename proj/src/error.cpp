// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/error.hpp"

namespace anisoeig {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::SemidefiniteResult: return "semidefinite-result";
    case ErrorCode::DegenerateElement: return "degenerate-element";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::InvalidGeometry: return "invalid-geometry";
    case ErrorCode::Coefficient: return "coefficient";
    case ErrorCode::SpdViolation: return "spd-violation";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::Convergence: return "convergence";
    case ErrorCode::Recovery: return "recovery";
    case ErrorCode::Boundary: return "boundary";
    case ErrorCode::Remesh: return "remesh";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Range: return "range";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace anisoeig
