#include "mollow/error.hpp"

#include <iostream>
#include <mutex>

#include "mollow/diagnostics.hpp"

namespace mollow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::UnknownLabel: return "unknown-label";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::LayoutMismatch: return "layout-mismatch";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::NonHermitian: return "non-hermitian";
    case ErrorCode::DegenerateSteadyState: return "degenerate-steady-state";
    case ErrorCode::UndefinedCorrelation: return "undefined-correlation";
    case ErrorCode::InsufficientStatistics: return "insufficient-statistics";
    case ErrorCode::UndefinedRatio: return "undefined-R";
    case ErrorCode::VanishingNorm: return "vanishing-norm";
    case ErrorCode::IntegratorFailure: return "integrator-failure";
    case ErrorCode::TruncationHealth: return "truncation-health";
    case ErrorCode::ConfigError: return "config-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateSteadyState:
    case ErrorCode::UndefinedCorrelation:
    case ErrorCode::InsufficientStatistics:
    case ErrorCode::UndefinedRatio:
    case ErrorCode::VanishingNorm:
    case ErrorCode::IntegratorFailure:
    case ErrorCode::TruncationHealth:
      return true;
    default:
      return false;
  }
}

namespace {

std::mutex sink_mutex;
WarningSink& sink() {
  static WarningSink s = [](const std::string& m) {
    std::cerr << "warning: " << m << '\n';
  };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = std::move(s);
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex);
  if (sink()) sink()(message);
}

}  // namespace mollow
