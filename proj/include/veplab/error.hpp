#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace veplab {

enum class Errc {
  InvalidParam,
  InvalidConfig,
  NyquistViolation,
  BandOutOfRange,
  WindowTooLong,
  SubsetTooLarge,
  RateMismatch,
  TooFewTrials,
  TooFewRows,
  ZeroNoise,
  DegenerateClass,
  DegenerateTemplate,
  UnknownClass,
  BadMagic,
  VersionUnsupported,
  TruncatedPayload,
  IoFailure,
  SingularSystem,
  DivergentInverse,
  EigSolverFailure,
};

std::string_view errc_name(Errc code) noexcept;

// CLI exit code for an error category: 2 config, 3 data, 4 numeric failure.
int exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }
  // Message without the code prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

using WarningHandler = std::function<void(std::string_view)>;

// Warnings go to stderr unless a handler is installed. Returns the previous handler.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace veplab
