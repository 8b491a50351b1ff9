#pragma once

#include <string>
#include <vector>

#include <doctest.h>

#include "veplab/error.hpp"

namespace veplab::testing {

// Collects warnings for the lifetime of the object instead of printing them.
class WarningCapture {
 public:
  WarningCapture() {
    previous_ = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  std::vector<std::string> messages;

 private:
  WarningHandler previous_;
};

template <typename Fn>
Errc error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a veplab::Error");
  return Errc::InvalidParam;
}

}  // namespace veplab::testing
