#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "trailpack/http_fetcher.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "trailpack/error.hpp"
#include "trailpack/url.hpp"

namespace trailpack {

namespace {

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

// Resolves a Location header against the URL that produced it.
std::string resolve(const url::Url& base, const std::string& location) {
  if (url::is_absolute_http(location)) return location;
  if (location.rfind("//", 0) == 0) return base.scheme + ":" + location;
  if (!location.empty() && location.front() == '/') {
    return base.scheme + "://" + base.authority + location;
  }
  std::string dir = base.path.substr(0, base.path.rfind('/') + 1);
  if (dir.empty()) dir = "/";
  return base.scheme + "://" + base.authority + dir + location;
}

}  // namespace

HttpResponse HttpFetcher::get(const std::string& target) {
  std::string current = target;
  for (int hop = 0;; ++hop) {
    auto parsed = url::parse_absolute_http(current);
    if (!parsed) throw Error(ErrorCode::NotAUrl, current, "not an absolute http(s) URL");

    httplib::Client client(parsed->scheme + "://" + parsed->authority);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_follow_location(false);

    std::string path = parsed->path.empty() ? "/" : parsed->path;
    if (parsed->query) path += "?" + *parsed->query;

    HttpResponse out;
    bool too_large = false;
    auto result = client.Get(
        path,
        [&](const httplib::Response& r) {
          out.status = r.status;
          out.content_type = r.get_header_value("Content-Type");
          return true;
        },
        [&](const char* data, std::size_t len) {
          if (out.body.size() + len > options_.max_body_bytes) {
            too_large = true;
            return false;
          }
          out.body.append(data, len);
          return true;
        });

    if (too_large) {
      throw Error(ErrorCode::TooLarge, current,
                  fmt::format("response exceeds {} bytes", options_.max_body_bytes));
    }
    if (!result) {
      throw Error(ErrorCode::NetworkUnavailable, current,
                  fmt::format("request failed: {}", httplib::to_string(result.error())));
    }
    if (is_redirect(result->status) && hop < options_.max_redirects &&
        result->has_header("Location")) {
      current = resolve(*parsed, result->get_header_value("Location"));
      continue;
    }
    out.status = result->status;
    return out;
  }
}

}  // namespace trailpack
