#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string_view>

namespace dbf::detail {

/// Whole-string unsigned decimal parse; nullopt on any stray character.
inline std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace dbf::detail
