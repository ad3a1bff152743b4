#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xlqa {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  format,
  dimension_mismatch,
  not_found,
  duplicate,
  invariant,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as an Error carrying a category and a
/// message that already includes the position (line or byte offset) when the
/// failure came from an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (skipped records, protocol deviations).
using WarningSink = std::function<void(const std::string&)>;

}  // namespace xlqa
