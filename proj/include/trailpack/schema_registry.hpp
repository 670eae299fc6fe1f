#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trailpack/config_model.hpp"
#include "trailpack/report.hpp"

namespace trailpack {

enum class PropertyKind { Text, Url, Integer, Number, Enum };

std::string_view to_string(PropertyKind kind) noexcept;
std::optional<PropertyKind> parse_kind(std::string_view name) noexcept;

struct PropertyRule {
  PropertyScope scope = PropertyScope::Poi;
  std::string name;
  PropertyKind kind = PropertyKind::Text;
  /// Permitted values of an Enum rule; empty for every other kind.
  std::vector<std::string> values;
  bool required = false;
  /// Maximum length in characters (code points) of a text value.
  std::optional<std::size_t> max_length;
  /// Advisory word count; exceeding it yields a warning.
  std::optional<std::size_t> word_budget;

  bool operator==(const PropertyRule&) const = default;
};

/// The machine-readable list of permitted properties per scope. Rule order
/// is significant: editors lay out form fields in this order.
struct SchemaDescriptor {
  std::string version;
  std::vector<PropertyRule> rules;

  const PropertyRule* find(PropertyScope scope, std::string_view name) const;
  KnownProperties known_properties() const;

  bool operator==(const SchemaDescriptor&) const = default;
};

/// Built-in descriptor for the tour profile of config_model.
const SchemaDescriptor& default_descriptor();

/// Throws Error with MalformedDescriptor(path), DuplicateRule(scope.name) or
/// UnknownKind(name).
SchemaDescriptor load_descriptor(std::string_view text);

/// The descriptor document format; load_descriptor(serialize_descriptor(d)) == d.
std::string serialize_descriptor(const SchemaDescriptor& d);

/// Checks every rule against every feature of its scope. Findings are ordered
/// by document position (collection first, then features by index) and then
/// by rule name. Each POI additionally gets an InvalidId error when its id is
/// present but not a `[A-Za-z0-9._-]+` token.
ValidationReport validate(const TourCollection& c, const SchemaDescriptor& d);

/// Parse + validate in one step, the way `trailpack validate` sees a file.
/// Fatal parse errors become a single error finding; parse diagnostics for
/// skipped features and unknown properties join the warnings.
ValidationReport validate_document(std::string_view text, const SchemaDescriptor& d);

}  // namespace trailpack
