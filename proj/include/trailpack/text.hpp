#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace trailpack::text {

/// Byte offset of the first invalid UTF-8 sequence, or nullopt when `bytes`
/// is well-formed (no overlongs, no surrogates, nothing above U+10FFFF).
std::optional<std::size_t> first_invalid_utf8(std::string_view bytes) noexcept;

/// Word separators: ASCII space, tab, LF, VT, FF, CR.
constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

std::string_view trim(std::string_view s) noexcept;

/// Whitespace-delimited tokens.
std::size_t word_count(std::string_view s) noexcept;

/// Number of code points in valid UTF-8.
std::size_t length(std::string_view utf8) noexcept;

/// Byte offset of code point `index`, or `utf8.size()` past the end.
std::size_t byte_offset(std::string_view utf8, std::size_t index) noexcept;

}  // namespace trailpack::text
