#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dbf {

enum class errc {
  misaligned_edge,
  would_form_cycle,
  invalid_path,
  dimension_mismatch,
  not_enumerable,
  no_path_function,
  not_free,
  epoch_out_of_range,
  invalid_schedule,
  parse_error,
  config_error,
  too_large,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::misaligned_edge: return "MisalignedEdge";
    case errc::would_form_cycle: return "WouldFormCycle";
    case errc::invalid_path: return "InvalidPath";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::not_enumerable: return "NotEnumerable";
    case errc::no_path_function: return "NoPathFunction";
    case errc::not_free: return "NotFree";
    case errc::epoch_out_of_range: return "EpochOutOfRange";
    case errc::invalid_schedule: return "InvalidSchedule";
    case errc::parse_error: return "ParseError";
    case errc::config_error: return "ConfigError";
    case errc::too_large: return "TooLarge";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  [[nodiscard]] errc code() const noexcept { return code_; }
  /// The message without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  errc code_;
  std::string detail_;
};

/// Parse failures remember the byte offset at which the parser gave up.
class parse_error : public error {
 public:
  parse_error(std::size_t position, const std::string& expected, std::string_view input)
      : error(errc::parse_error, "at position " + std::to_string(position) + ": expected " +
                                     expected + " in '" + std::string(input) + "'"),
        position_(position),
        expected_(expected) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }
  [[nodiscard]] const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace dbf
