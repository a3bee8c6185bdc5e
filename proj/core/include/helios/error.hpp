#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace helios {

enum class ErrorCode {
  out_of_domain,
  non_positive_index,
  zero_momentum,
  non_unit_direction,
  non_positive_frequency,
  newton_diverged,
  boundary_hit,
  degenerate_surface,
  ambiguous_crossing,
  non_power_of_two,
  resolution,
  unsupported_profile,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace helios
