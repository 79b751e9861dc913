#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mollow {

enum class ErrorCode {
  InvalidDimension,
  UnknownLabel,
  DimensionMismatch,
  LayoutMismatch,
  InvalidArgument,
  NonHermitian,
  DegenerateSteadyState,
  UndefinedCorrelation,
  InsufficientStatistics,
  UndefinedRatio,
  VanishingNorm,
  IntegratorFailure,
  TruncationHealth,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// True for errors that originate in numerics rather than in user input.
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace mollow
