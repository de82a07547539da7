#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace survkit {

enum class ErrorCode {
  // construction / validation
  NonPositiveTime,
  LengthMismatch,
  DuplicateColumn,
  MissingValue,
  NegativeTime,
  InvalidDistribution,
  InvalidArgument,
  // learners
  EmptyTask,
  NoEvents,
  Nonconvergence,
  SingularHessian,
  FeatureMismatch,
  EmptyNewdata,
  // measures
  MissingCrank,
  NoComparablePairs,
  DegenerateCensoring,
  MissingDistr,
  EmptyGrid,
  MissingLP,
  DegenerateLP,
  // compose
  MissingLPandCrank,
  InvalidForm,
  GridEmpty,
  // resampling / config
  TooManyFolds,
  ConfigError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DuplicateColumn: return "DuplicateColumn";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyTask: return "EmptyTask";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::Nonconvergence: return "Nonconvergence";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::FeatureMismatch: return "FeatureMismatch";
    case ErrorCode::EmptyNewdata: return "EmptyNewdata";
    case ErrorCode::MissingCrank: return "MissingCrank";
    case ErrorCode::NoComparablePairs: return "NoComparablePairs";
    case ErrorCode::DegenerateCensoring: return "DegenerateCensoring";
    case ErrorCode::MissingDistr: return "MissingDistr";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::MissingLP: return "MissingLP";
    case ErrorCode::DegenerateLP: return "DegenerateLP";
    case ErrorCode::MissingLPandCrank: return "MissingLPandCrank";
    case ErrorCode::InvalidForm: return "InvalidForm";
    case ErrorCode::GridEmpty: return "GridEmpty";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class SurvError : public std::runtime_error {
 public:
  SurvError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown when an iterative fit exhausts max_iter; carries the last iterate so
// callers can inspect how far the solver got.
class NonconvergenceError : public SurvError {
 public:
  NonconvergenceError(const std::string& what, std::vector<double> last_iterate)
      : SurvError(ErrorCode::Nonconvergence, what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

}  // namespace survkit
