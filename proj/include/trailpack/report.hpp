#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace trailpack {

/// One located finding. `path` uses the document's own addressing, e.g.
/// `features[2].properties.image`, or a bundle-relative file path.
struct Finding {
  std::string path;
  std::string code;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool valid() const noexcept { return errors.empty(); }
  bool clean() const noexcept { return errors.empty() && warnings.empty(); }

  bool operator==(const ValidationReport&) const = default;
};

nlohmann::ordered_json to_json(const Finding& f);
nlohmann::ordered_json to_json(const ValidationReport& r);

}  // namespace trailpack
