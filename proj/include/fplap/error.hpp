#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fplap {

enum class ErrorCode {
  InvalidDomain,
  NonFiniteValue,
  InvalidExponent,
  InvalidParams,
  MeshMismatch,
  SingularLog,
  NonPositiveValue,
  ZeroFunction,
  NonPositiveT,
  DegenerateB,
  BracketFail,
  InvalidConstants,
  NotConverged,
  NonPositiveEigenvector,
  NoTwoRoots,
  SupercriticalAlpha,
  EmptyInterval,
  MonotonicityViolation,
  InvalidMode,
  ParseError,
  ValidationError,
  CacheFormat,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library error. Every failure surfaced by fplap carries one of the
/// ErrorCode values so callers (and the CLI exit-code mapping) can branch
/// on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fplap
