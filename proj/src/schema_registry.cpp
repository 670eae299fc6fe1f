#include "trailpack/schema_registry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "trailpack/error.hpp"
#include "trailpack/text.hpp"
#include "trailpack/url.hpp"

namespace trailpack {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(std::string path, std::string message) {
  throw Error(ErrorCode::MalformedDescriptor, std::move(path), std::move(message));
}

PropertyRule rule(PropertyScope scope, std::string_view name, PropertyKind kind, bool required,
                  std::optional<std::size_t> max_length = std::nullopt,
                  std::optional<std::size_t> word_budget = std::nullopt) {
  PropertyRule r;
  r.scope = scope;
  r.name = std::string(name);
  r.kind = kind;
  r.required = required;
  r.max_length = max_length;
  r.word_budget = word_budget;
  return r;
}

std::size_t positive_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    malformed(path, "expected a positive integer");
  }
  return v.get<std::size_t>();
}

// Sort key for findings: 0 for collection-level paths, k+1 for `features[k]...`.
std::size_t document_position(std::string_view path) {
  constexpr std::string_view prefix = "features[";
  if (path.substr(0, prefix.size()) != prefix) return 0;
  std::size_t value = 0;
  for (std::size_t i = prefix.size(); i < path.size() && path[i] != ']'; ++i) {
    if (path[i] < '0' || path[i] > '9') return 0;
    value = value * 10 + static_cast<std::size_t>(path[i] - '0');
  }
  return value + 1;
}

struct Pending {
  std::size_t position;
  std::string rule_name;
  bool error;
  Finding finding;
};

void sort_pending(std::vector<Pending>& pending) {
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.position, a.rule_name) < std::tie(b.position, b.rule_name);
  });
}

ValidationReport to_report(std::vector<Pending> pending) {
  sort_pending(pending);
  ValidationReport report;
  for (auto& p : pending) {
    (p.error ? report.errors : report.warnings).push_back(std::move(p.finding));
  }
  return report;
}

bool integral(const json& v) {
  if (v.is_number_integer()) return true;
  if (!v.is_number_float()) return false;
  const double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d;
}

// At most one finding per (feature, rule).
void check_rule(const PropertyRule& r, const json& props, const std::string& base,
                std::size_t position, std::vector<Pending>& out) {
  const std::string path = base + "." + r.name;
  auto emit = [&](bool error, std::string code, std::string message) {
    out.push_back({position, r.name, error, {path, std::move(code), std::move(message)}});
  };

  auto it = props.find(r.name);
  if (it == props.end() || it->is_null()) {
    if (r.required) emit(true, "MissingRequired", fmt::format("required property '{}' is missing", r.name));
    return;
  }
  const json& v = *it;

  switch (r.kind) {
    case PropertyKind::Text:
    case PropertyKind::Url: {
      if (!v.is_string()) {
        emit(true, "TypeMismatch", fmt::format("'{}' must be a string", r.name));
        return;
      }
      const auto s = v.get<std::string>();
      if (r.kind == PropertyKind::Url && !url::is_absolute_http(s)) {
        emit(true, "InvalidUrl", fmt::format("'{}' must be an absolute http(s) URL", r.name));
        return;
      }
      if (r.required && text::trim(s).empty()) {
        emit(true, "EmptyValue", fmt::format("required property '{}' is empty", r.name));
        return;
      }
      if (r.max_length && text::length(s) > *r.max_length) {
        emit(true, "TooLong",
             fmt::format("'{}' has {} characters, limit is {}", r.name, text::length(s), *r.max_length));
        return;
      }
      if (r.word_budget) {
        const auto words = text::word_count(s);
        if (words > *r.word_budget) {
          emit(false, "WordBudgetExceeded",
               fmt::format("'{}' has {} words, budget is {}", r.name, words, *r.word_budget));
        }
      }
      return;
    }
    case PropertyKind::Integer:
      if (!integral(v)) emit(true, "TypeMismatch", fmt::format("'{}' must be an integer", r.name));
      return;
    case PropertyKind::Number:
      if (!v.is_number()) emit(true, "TypeMismatch", fmt::format("'{}' must be a number", r.name));
      return;
    case PropertyKind::Enum: {
      if (!v.is_string() ||
          std::find(r.values.begin(), r.values.end(), v.get<std::string>()) == r.values.end()) {
        emit(true, "InvalidEnumValue",
             fmt::format("'{}' must be one of: {}", r.name, fmt::join(r.values, ", ")));
      }
      return;
    }
  }
}

void check_scope(const SchemaDescriptor& d, PropertyScope scope, const json& props,
                 const std::string& base, std::size_t position, std::vector<Pending>& out) {
  for (const auto& r : d.rules) {
    if (r.scope == scope) check_rule(r, props, base, position, out);
  }
}

}  // namespace

std::string_view to_string(PropertyKind kind) noexcept {
  switch (kind) {
    case PropertyKind::Text: return "text";
    case PropertyKind::Url: return "url";
    case PropertyKind::Integer: return "integer";
    case PropertyKind::Number: return "number";
    case PropertyKind::Enum: return "enum";
  }
  return "text";
}

std::optional<PropertyKind> parse_kind(std::string_view name) noexcept {
  if (name == "text") return PropertyKind::Text;
  if (name == "url") return PropertyKind::Url;
  if (name == "integer") return PropertyKind::Integer;
  if (name == "number") return PropertyKind::Number;
  if (name == "enum") return PropertyKind::Enum;
  return std::nullopt;
}

const PropertyRule* SchemaDescriptor::find(PropertyScope scope, std::string_view name) const {
  for (const auto& r : rules) {
    if (r.scope == scope && r.name == name) return &r;
  }
  return nullptr;
}

KnownProperties SchemaDescriptor::known_properties() const {
  KnownProperties known{{PropertyScope::Collection, {}}, {PropertyScope::Poi, {}}, {PropertyScope::Track, {}}};
  for (const auto& r : rules) known[r.scope].insert(r.name);
  return known;
}

const SchemaDescriptor& default_descriptor() {
  using S = PropertyScope;
  using K = PropertyKind;
  static const SchemaDescriptor d{
      "1.0",
      {
          rule(S::Collection, profile::kName, K::Text, true, 200),
          rule(S::Collection, profile::kVersion, K::Text, true, 50),
          rule(S::Collection, profile::kLanguage, K::Text, true, 35),
          rule(S::Collection, profile::kDescription, K::Text, false, std::nullopt,
               profile::kDefaultWordBudget),
          rule(S::Collection, profile::kSchema, K::Url, false),
          rule(S::Poi, profile::kId, K::Text, true, 64),
          rule(S::Poi, profile::kTitle, K::Text, true, 120),
          rule(S::Poi, profile::kDescription, K::Text, false, std::nullopt,
               profile::kDefaultWordBudget),
          rule(S::Poi, profile::kImage, K::Url, true),
          rule(S::Track, profile::kTitle, K::Text, false, 120),
      }};
  return d;
}

SchemaDescriptor load_descriptor(std::string_view text) {
  if (auto bad = text::first_invalid_utf8(text)) {
    throw Error(ErrorCode::MalformedDescriptor, "", fmt::format("invalid UTF-8 at byte {}", *bad),
                static_cast<std::int64_t>(*bad));
  }
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedDescriptor, "", e.what(), static_cast<std::int64_t>(e.byte));
  }
  if (!root.is_object()) malformed("", "descriptor root must be an object");

  SchemaDescriptor d;
  auto version = root.find("version");
  if (version == root.end() || !version->is_string() || text::trim(version->get<std::string>()).empty()) {
    malformed("version", "version must be a non-empty string");
  }
  d.version = version->get<std::string>();

  auto rules = root.find("rules");
  if (rules == root.end() || !rules->is_array()) malformed("rules", "rules must be an array");

  std::set<std::pair<PropertyScope, std::string>> seen;
  for (std::size_t i = 0; i < rules->size(); ++i) {
    const json& item = (*rules)[i];
    const std::string path = fmt::format("rules[{}]", i);
    if (!item.is_object()) malformed(path, "rule must be an object");

    for (auto& [key, value] : item.items()) {
      static const std::set<std::string> kAllowed = {"scope", "name", "kind", "values",
                                                     "required", "max_length", "word_budget"};
      if (!kAllowed.contains(key)) malformed(path + "." + key, "unknown rule member");
    }

    PropertyRule r;
    auto scope = item.find("scope");
    if (scope == item.end() || !scope->is_string() || !parse_scope(scope->get<std::string>())) {
      malformed(path + ".scope", "scope must be one of collection, poi, track");
    }
    r.scope = *parse_scope(scope->get<std::string>());

    auto name = item.find("name");
    if (name == item.end() || !name->is_string() || name->get<std::string>().empty()) {
      malformed(path + ".name", "name must be a non-empty string");
    }
    r.name = name->get<std::string>();
    if (r.scope != PropertyScope::Collection && r.name == profile::kFeatureType) {
      malformed(path + ".name", "'type' is the reserved feature discriminator");
    }

    auto kind = item.find("kind");
    if (kind == item.end() || !kind->is_string()) malformed(path + ".kind", "kind must be a string");
    auto parsed_kind = parse_kind(kind->get<std::string>());
    if (!parsed_kind) {
      throw Error(ErrorCode::UnknownKind, kind->get<std::string>(),
                  fmt::format("{}.kind: unknown property kind '{}'", path, kind->get<std::string>()));
    }
    r.kind = *parsed_kind;

    auto values = item.find("values");
    if (r.kind == PropertyKind::Enum) {
      if (values == item.end() || !values->is_array() || values->empty()) {
        malformed(path + ".values", "enum rules need at least one value");
      }
      for (const auto& v : *values) {
        if (!v.is_string()) malformed(path + ".values", "enum values must be strings");
        r.values.push_back(v.get<std::string>());
      }
    } else if (values != item.end()) {
      malformed(path + ".values", "values are only allowed on enum rules");
    }

    if (auto req = item.find("required"); req != item.end()) {
      if (!req->is_boolean()) malformed(path + ".required", "required must be a boolean");
      r.required = req->get<bool>();
    }
    if (auto ml = item.find("max_length"); ml != item.end()) {
      r.max_length = positive_count(*ml, path + ".max_length");
    }
    if (auto wb = item.find("word_budget"); wb != item.end()) {
      r.word_budget = positive_count(*wb, path + ".word_budget");
    }

    if (!seen.emplace(r.scope, r.name).second) {
      throw Error(ErrorCode::DuplicateRule, fmt::format("{}.{}", to_string(r.scope), r.name),
                  fmt::format("{}: rule ({}, {}) is defined twice", path, to_string(r.scope), r.name));
    }
    d.rules.push_back(std::move(r));
  }
  return d;
}

std::string serialize_descriptor(const SchemaDescriptor& d) {
  ordered_json root;
  root["version"] = d.version;
  root["rules"] = ordered_json::array();
  for (const auto& r : d.rules) {
    ordered_json j;
    j["scope"] = to_string(r.scope);
    j["name"] = r.name;
    j["kind"] = to_string(r.kind);
    if (r.kind == PropertyKind::Enum) j["values"] = r.values;
    j["required"] = r.required;
    if (r.max_length) j["max_length"] = *r.max_length;
    if (r.word_budget) j["word_budget"] = *r.word_budget;
    root["rules"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

ValidationReport validate(const TourCollection& c, const SchemaDescriptor& d) {
  std::vector<Pending> pending;
  check_scope(d, PropertyScope::Collection, c.meta.properties, "properties", 0, pending);

  for (std::size_t i = 0; i < c.pois.size(); ++i) {
    const auto& poi = c.pois[i];
    const auto base = c.poi_path(i) + ".properties";
    const auto position = document_position(base);
    check_scope(d, PropertyScope::Poi, poi.properties, base, position, pending);

    auto id = poi.properties.find(std::string(profile::kId));
    if (id != poi.properties.end() && id->is_string()) {
      const auto value = id->get<std::string>();
      if (!text::trim(value).empty() && !is_valid_poi_id(value)) {
        pending.push_back({position, std::string(profile::kId), true,
                           {base + ".id", "InvalidId",
                            fmt::format("POI id '{}' must match [A-Za-z0-9._-]+", value)}});
      }
    }
  }
  for (std::size_t i = 0; i < c.tracks.size(); ++i) {
    const auto base = c.track_path(i) + ".properties";
    check_scope(d, PropertyScope::Track, c.tracks[i].properties, base, document_position(base),
                pending);
  }
  return to_report(std::move(pending));
}

ValidationReport validate_document(std::string_view text, const SchemaDescriptor& d) {
  ParseResult parsed;
  try {
    ParseOptions options;
    options.known_properties = d.known_properties();
    parsed = parse_collection(text, options);
  } catch (const Error& e) {
    ValidationReport report;
    report.errors.push_back({e.subject(), std::string(to_string(e.code())), e.what()});
    return report;
  }

  std::vector<Pending> pending;
  for (auto& f : parsed.diagnostics) {
    pending.push_back({document_position(f.path), "", false, std::move(f)});
  }
  // Rule findings sort after diagnostics at the same position; both lists
  // are already in document order.
  auto report = validate(parsed.collection, d);
  for (auto& f : report.errors) pending.push_back({document_position(f.path), "~", true, std::move(f)});
  for (auto& f : report.warnings) pending.push_back({document_position(f.path), "~", false, std::move(f)});
  return to_report(std::move(pending));
}

}  // namespace trailpack
