#pragma once

#include <stdexcept>
#include <string>

namespace mtsysid {

/// Machine-parsable error categories; the CLI maps each category to a
/// distinct exit code and prints it in brackets on stderr.
enum class ErrorCategory {
  Input,        // inconsistent dimensions, invalid parameters
  Parse,        // malformed CSV/JSON, with location where known
  Numerical,    // non-finite values encountered during iteration
  StepSize,     // backtracking line search collapsed
  Unsupported,  // setting outside what an operation is defined for
  Scale,        // problem size beyond a hard guard (e.g. support enumeration)
  Estimation,   // a sampling-based estimate could not be formed
  Io,           // filesystem failures
};

const char* error_category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  const char* category_name() const noexcept { return error_category_name(category_); }

 private:
  ErrorCategory category_;
};

struct InputError : Error {
  explicit InputError(const std::string& m) : Error(ErrorCategory::Input, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorCategory::Parse, m) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(ErrorCategory::Numerical, m) {}
};
struct StepSizeCollapseError : Error {
  explicit StepSizeCollapseError(const std::string& m) : Error(ErrorCategory::StepSize, m) {}
};
struct UnsupportedSettingError : Error {
  explicit UnsupportedSettingError(const std::string& m) : Error(ErrorCategory::Unsupported, m) {}
};
struct ScaleGuardError : Error {
  explicit ScaleGuardError(const std::string& m) : Error(ErrorCategory::Scale, m) {}
};
struct EstimationFailureError : Error {
  explicit EstimationFailureError(const std::string& m) : Error(ErrorCategory::Estimation, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorCategory::Io, m) {}
};

inline const char* error_category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Input: return "input";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Numerical: return "numerical";
    case ErrorCategory::StepSize: return "step-size";
    case ErrorCategory::Unsupported: return "unsupported";
    case ErrorCategory::Scale: return "scale";
    case ErrorCategory::Estimation: return "estimation";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

}  // namespace mtsysid
