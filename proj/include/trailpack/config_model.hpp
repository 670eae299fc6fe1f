#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trailpack/report.hpp"

namespace trailpack {

/// WGS84 position in decimal degrees. Serialized as [lon, lat].
struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  bool valid() const noexcept;
  bool operator==(const GeoPoint&) const = default;
};

enum class PropertyScope { Collection, Poi, Track };

std::string_view to_string(PropertyScope scope) noexcept;
std::optional<PropertyScope> parse_scope(std::string_view name) noexcept;

/// Property names of the built-in tour profile.
namespace profile {
inline constexpr std::string_view kFeatureType = "type";
inline constexpr std::string_view kPoiType = "POI";
inline constexpr std::string_view kTrackType = "track";

inline constexpr std::string_view kId = "id";
inline constexpr std::string_view kTitle = "title";
inline constexpr std::string_view kDescription = "description";
inline constexpr std::string_view kImage = "image";

inline constexpr std::string_view kName = "name";
inline constexpr std::string_view kVersion = "version";
inline constexpr std::string_view kLanguage = "language";
inline constexpr std::string_view kSchema = "schema";

inline constexpr std::size_t kDefaultWordBudget = 300;
}  // namespace profile

/// POI ids are tokens of `[A-Za-z0-9._-]+`; they also name bundle asset files.
bool is_valid_poi_id(std::string_view id) noexcept;

// Features keep their `properties` object verbatim (minus the `type`
// discriminator) so unknown properties survive a round trip. The typed
// accessors return the profile values, or empty when absent or not a string.

struct PoiFeature {
  GeoPoint location;
  nlohmann::json properties = nlohmann::json::object();
  /// Feature members other than type/geometry/properties (e.g. `id`, `bbox`).
  nlohmann::json foreign = nlohmann::json::object();
  /// Index in the source document's `features` array; not part of equality.
  std::optional<std::size_t> source_index;

  std::string id() const;
  std::string title() const;
  std::string description() const;
  std::optional<std::string> image_url() const;

  bool operator==(const PoiFeature& o) const {
    return location == o.location && properties == o.properties && foreign == o.foreign;
  }
};

struct TrackFeature {
  std::vector<GeoPoint> points;
  nlohmann::json properties = nlohmann::json::object();
  nlohmann::json foreign = nlohmann::json::object();
  std::optional<std::size_t> source_index;

  std::optional<std::string> title() const;

  bool operator==(const TrackFeature& o) const {
    return points == o.points && properties == o.properties && foreign == o.foreign;
  }
};

struct CollectionMeta {
  nlohmann::json properties = nlohmann::json::object();

  std::string name() const;
  std::string version() const;
  std::string language() const;
  std::optional<std::string> description() const;
  std::optional<std::string> schema_url() const;

  bool operator==(const CollectionMeta&) const = default;
};

struct TourCollection {
  CollectionMeta meta;
  std::vector<PoiFeature> pois;
  std::vector<TrackFeature> tracks;
  /// Top-level members other than type/features/properties.
  nlohmann::json foreign = nlohmann::json::object();

  const PoiFeature* find_poi(std::string_view id) const;

  /// `features[k]` for the POI at `index`: the source index when parsed,
  /// otherwise its position in serialized order (POIs first, then tracks).
  std::string poi_path(std::size_t index) const;
  std::string track_path(std::size_t index) const;

  bool operator==(const TourCollection&) const = default;
};

PoiFeature make_poi(std::string id, std::string title, std::string description,
                    std::string image_url, GeoPoint location);
/// Collapses consecutive duplicate points.
TrackFeature make_track(std::vector<GeoPoint> points,
                        std::optional<std::string> title = std::nullopt);
CollectionMeta make_meta(std::string name, std::string version, std::string language,
                         std::optional<std::string> description = std::nullopt,
                         std::optional<std::string> schema_url = std::nullopt);

using KnownProperties = std::map<PropertyScope, std::set<std::string, std::less<>>>;

/// Property names of the built-in profile, per scope.
const KnownProperties& profile_properties();

struct ParseOptions {
  /// Properties outside this set are kept but reported as UnknownProperty.
  KnownProperties known_properties = profile_properties();
};

struct ParseResult {
  TourCollection collection;
  /// Non-fatal findings in document order: skipped features, unknown
  /// properties, dropped altitudes.
  std::vector<Finding> diagnostics;
};

/// Parses a tour document. Throws Error with NotUtf8, MalformedJson,
/// NotFeatureCollection, NoPoiFeatures, DuplicatePoiId or InvalidCoordinate.
ParseResult parse_collection(std::string_view text, const ParseOptions& options = {});

/// Throws Error{InvariantViolation} naming the first offending path.
void check_invariants(const TourCollection& c);

/// Deterministic GeoJSON (sorted keys, two-space indent, shortest round-trip
/// floats, trailing newline). Calls check_invariants first.
std::string serialize_collection(const TourCollection& c);

}  // namespace trailpack
