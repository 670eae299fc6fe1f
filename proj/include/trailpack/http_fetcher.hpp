#pragma once

#include <chrono>
#include <cstddef>
#include <string>

#include "trailpack/provisioning.hpp"

namespace trailpack {

/// Plain HTTP(S) GET. Follows at most `max_redirects` redirects; the final
/// 3xx response is returned as is when the budget runs out. Bodies beyond
/// `max_body_bytes` abort the transfer with Error{TooLarge}.
class HttpFetcher final : public Fetcher {
 public:
  struct Options {
    std::chrono::seconds timeout{30};
    int max_redirects = 3;
    std::size_t max_body_bytes = kDefaultMaxBytes;
  };

  HttpFetcher() = default;
  explicit HttpFetcher(Options options) : options_(options) {}

  HttpResponse get(const std::string& url) override;

 private:
  Options options_;
};

}  // namespace trailpack
