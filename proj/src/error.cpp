#include "veplab/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace veplab {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::NyquistViolation: return "NyquistViolation";
    case Errc::BandOutOfRange: return "BandOutOfRange";
    case Errc::WindowTooLong: return "WindowTooLong";
    case Errc::SubsetTooLarge: return "SubsetTooLarge";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::TooFewTrials: return "TooFewTrials";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::ZeroNoise: return "ZeroNoise";
    case Errc::DegenerateClass: return "DegenerateClass";
    case Errc::DegenerateTemplate: return "DegenerateTemplate";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::TruncatedPayload: return "TruncatedPayload";
    case Errc::IoFailure: return "IoFailure";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::DivergentInverse: return "DivergentInverse";
    case Errc::EigSolverFailure: return "EigSolverFailure";
  }
  return "Unknown";
}

int exit_code(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParam:
    case Errc::InvalidConfig:
    case Errc::NyquistViolation:
    case Errc::BandOutOfRange:
    case Errc::WindowTooLong:
    case Errc::SubsetTooLarge:
      return 2;
    case Errc::SingularSystem:
    case Errc::DivergentInverse:
    case Errc::EigSolverFailure:
      return 4;
    default:
      return 3;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), detail_(what) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

namespace {
std::mutex g_warn_mutex;
WarningHandler g_warn_handler;
}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  return std::exchange(g_warn_handler, std::move(handler));
}

void warn(std::string_view message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::cerr << "veplab: warning: " << message << '\n';
  }
}

}  // namespace veplab
