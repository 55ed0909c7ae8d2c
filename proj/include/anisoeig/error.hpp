// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace anisoeig {

enum class ErrorCode {
  InvalidInput,
  SemidefiniteResult,
  DegenerateElement,
  NotFound,
  InvalidGeometry,
  Coefficient,
  SpdViolation,
  Numeric,
  Convergence,
  Recovery,
  Boundary,
  Remesh,
  Domain,
  Range,
  Parse,
  Config,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is the
/// machine-readable category; what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

#define ANISOEIG_REQUIRE(cond, code, msg)        \
  do {                                           \
    if (!(cond)) ::anisoeig::fail((code), (msg)); \
  } while (false)

}  // namespace anisoeig
