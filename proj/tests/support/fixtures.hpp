#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "trailpack/error.hpp"
#include "trailpack/provisioning.hpp"

namespace trailpack::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(TRAILPACK_FIXTURE_DIR) / name;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

inline std::string fixture(const std::string& name) { return read_file(fixture_path(name)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("trailpack-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

/// Serves canned responses; unknown URLs get 404. Thread-safe.
class StubFetcher : public Fetcher {
 public:
  void serve(std::string url, std::string body, int status = 200,
             std::string content_type = "application/octet-stream") {
    std::lock_guard lock(mu_);
    responses_[std::move(url)] = {status, std::move(body), std::move(content_type)};
  }

  HttpResponse get(const std::string& url) override {
    std::lock_guard lock(mu_);
    requested_.push_back(url);
    auto it = responses_.find(url);
    if (it == responses_.end()) return {404, "not found", "text/plain"};
    return it->second;
  }

  std::vector<std::string> requested() const {
    std::lock_guard lock(mu_);
    return requested_;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, HttpResponse> responses_;
  std::vector<std::string> requested_;
};

/// Stands for "no network at all": every call is counted and refused.
class AbortingFetcher : public Fetcher {
 public:
  HttpResponse get(const std::string& url) override {
    ++calls_;
    throw Error(ErrorCode::NetworkUnavailable, url, "network access attempted in an offline test");
  }
  int calls() const { return calls_.load(); }

 private:
  std::atomic<int> calls_{0};
};

/// Deterministic pseudo-image bytes for a POI (JPEG SOI marker + noise).
inline std::string fake_image(const std::string& seed, std::size_t size = 2048) {
  std::seed_seq seq(seed.begin(), seed.end());
  std::mt19937 rng(seq);
  std::string bytes = "\xFF\xD8\xFF\xE0";
  while (bytes.size() < size) bytes.push_back(static_cast<char>(rng() & 0xFF));
  return bytes;
}

inline constexpr const char* kImageBase = "https://tours.example.org/montefegatesi/img/";

/// Stub serving one image per mill of the reference fixture.
inline void serve_mill_images(StubFetcher& f, int count = 8) {
  for (int i = 1; i <= count; ++i) {
    const std::string id = "mill-" + std::to_string(i);
    f.serve(kImageBase + id + ".jpg", fake_image(id), 200, "image/jpeg");
  }
}

}  // namespace trailpack::testing
