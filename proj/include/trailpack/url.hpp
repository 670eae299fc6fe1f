#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trailpack::url {

/// Components of an absolute http(s) URL. `scheme` is lower-cased; the other
/// fields are raw (still percent-encoded).
struct Url {
  std::string scheme;
  std::string authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

/// Accepts `http://` or `https://` with a non-empty host and no whitespace or
/// control characters; anything else yields nullopt.
std::optional<Url> parse_absolute_http(std::string_view text);

inline bool is_absolute_http(std::string_view text) { return parse_absolute_http(text).has_value(); }

/// Splits `a=1&b=2` into decoded pairs, keeping order and repeats. A bare key
/// decodes to an empty value. Returns nullopt on a broken percent escape.
std::optional<std::vector<std::pair<std::string, std::string>>> query_params(std::string_view query);

std::optional<std::string> percent_decode(std::string_view s);

/// Encodes everything except RFC 3986 unreserved characters.
std::string percent_encode(std::string_view s);

/// Lower-cased extension of the last path segment (without the dot), if any.
std::string path_extension(const Url& u);

}  // namespace trailpack::url
