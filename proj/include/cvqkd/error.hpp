#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvqkd {

enum class errc {
  dimension,
  parameter,
  conditioning,
  unsupported_dimension,
  degenerate_channel,
  not_symmetrizable,
  degenerate_basis,
  unrealizable,
  singular_tuning,
  domain,
  inconsistent_solution,
};

constexpr std::string_view to_string(errc code) {
  switch (code) {
    case errc::dimension: return "dimension error";
    case errc::parameter: return "parameter error";
    case errc::conditioning: return "conditioning error";
    case errc::unsupported_dimension: return "unsupported dimension";
    case errc::degenerate_channel: return "degenerate channel";
    case errc::not_symmetrizable: return "channel not symmetrizable";
    case errc::degenerate_basis: return "degenerate basis";
    case errc::unrealizable: return "unrealizable tuning";
    case errc::singular_tuning: return "singular tuning";
    case errc::domain: return "domain error";
    case errc::inconsistent_solution: return "inconsistent solution";
  }
  return "unknown error";
}

/// Every failure raised by the library carries one of the errc codes so the
/// CLI can map it onto an exit status without parsing messages.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace cvqkd
