#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trailpack/provisioning.hpp"

namespace trailpack::cli {

enum class ExitStatus : int {
  Success = 0,
  Findings = 1,
  Usage = 2,
  Failure = 3,  // I/O or network
};

/// Process-level dependencies, injectable for tests.
struct Environment {
  std::function<std::optional<std::string>(const std::string&)> getenv;
  /// Returns the fetcher to use; `offline` is the resolved --offline /
  /// TRAILPACK_OFFLINE setting.
  std::function<std::unique_ptr<Fetcher>(bool offline)> make_fetcher;
};

/// Real environment variables and an HttpFetcher (OfflineFetcher when offline).
Environment process_environment();

/// Runs one command. `args` excludes the program name. Data goes to `out`,
/// human-readable findings to `err`; with --json, findings go to `out` as
/// JSON.
ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const Environment& env);

}  // namespace trailpack::cli
