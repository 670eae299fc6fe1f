#include "trailpack/config_model.hpp"

#include <algorithm>
#include <unordered_set>
#include <utility>

#include <fmt/format.h>

#include "trailpack/error.hpp"
#include "trailpack/text.hpp"

namespace trailpack {

using nlohmann::json;

namespace {

std::string string_property(const json& props, std::string_view key) {
  auto it = props.find(std::string(key));
  if (it == props.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

std::optional<std::string> optional_string_property(const json& props, std::string_view key) {
  auto it = props.find(std::string(key));
  if (it == props.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::string feature_path(std::size_t index) { return fmt::format("features[{}]", index); }

void collapse_duplicates(std::vector<GeoPoint>& points) {
  points.erase(std::unique(points.begin(), points.end()), points.end());
}

json position_to_json(const GeoPoint& p) { return json::array({p.lon, p.lat}); }

class Parser {
 public:
  Parser(const ParseOptions& options) : options_(options) {}

  ParseResult run(std::string_view text) {
    if (auto bad = text::first_invalid_utf8(text)) {
      throw Error(ErrorCode::NotUtf8, "", fmt::format("invalid UTF-8 at byte {}", *bad),
                  static_cast<std::int64_t>(*bad));
    }
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
      throw Error(ErrorCode::MalformedJson, "", "byte order mark is not permitted", 0);
    }

    json root;
    try {
      root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedJson, "", e.what(), static_cast<std::int64_t>(e.byte));
    }

    if (!root.is_object()) {
      throw Error(ErrorCode::NotFeatureCollection, "", "root is not a JSON object");
    }
    auto type = root.find("type");
    if (type == root.end() || *type != "FeatureCollection") {
      throw Error(ErrorCode::NotFeatureCollection, "type", "root type is not FeatureCollection");
    }
    auto features = root.find("features");
    if (features == root.end() || !features->is_array()) {
      throw Error(ErrorCode::NotFeatureCollection, "features", "features is not an array");
    }

    ParseResult result;
    TourCollection& c = result.collection;

    auto props = root.find("properties");
    if (props != root.end() && !props->is_null()) {
      if (!props->is_object()) {
        throw Error(ErrorCode::NotFeatureCollection, "properties",
                    "collection properties is not an object");
      }
      c.meta.properties = *props;
      report_unknown(PropertyScope::Collection, c.meta.properties, "properties");
    }
    for (auto& [key, value] : root.items()) {
      if (key != "type" && key != "features" && key != "properties") c.foreign[key] = value;
    }

    for (std::size_t i = 0; i < features->size(); ++i) {
      parse_feature((*features)[i], i, c);
    }
    if (c.pois.empty()) {
      throw Error(ErrorCode::NoPoiFeatures, "features", "document contains no POI feature");
    }
    result.diagnostics = std::move(diagnostics_);
    return result;
  }

 private:
  void warn(std::string path, std::string code, std::string message) {
    diagnostics_.push_back({std::move(path), std::move(code), std::move(message)});
  }

  void report_unknown(PropertyScope scope, const json& props, const std::string& base) {
    const auto& known = options_.known_properties;
    auto it = known.find(scope);
    for (auto& [key, value] : props.items()) {
      if (scope != PropertyScope::Collection && key == profile::kFeatureType) continue;
      if (it != known.end() && it->second.contains(key)) continue;
      warn(fmt::format("{}.{}", base, key), "UnknownProperty",
           fmt::format("property '{}' is not part of the {} profile; kept as is", key,
                       to_string(scope)));
    }
  }

  GeoPoint parse_position(const json& pos, const std::string& path) {
    if (!pos.is_array() || pos.size() < 2 || pos.size() > 3) {
      throw Error(ErrorCode::InvalidCoordinate, path, "position must be [lon, lat]");
    }
    for (const auto& v : pos) {
      if (!v.is_number()) {
        throw Error(ErrorCode::InvalidCoordinate, path, "position element is not a number");
      }
    }
    GeoPoint p{pos[0].get<double>(), pos[1].get<double>()};
    if (!p.valid()) {
      throw Error(ErrorCode::InvalidCoordinate, path,
                  fmt::format("position [{}, {}] is outside lon [-180, 180] / lat [-90, 90]",
                              p.lon, p.lat));
    }
    if (pos.size() == 3) warn(path, "AltitudeDropped", "altitude is not supported and was dropped");
    return p;
  }

  void parse_feature(const json& f, std::size_t index, TourCollection& c) {
    const std::string path = feature_path(index);
    if (!f.is_object() || f.value("type", json()) != "Feature") {
      warn(path, "NotAFeature", "skipped: element is not a GeoJSON Feature");
      return;
    }
    json props = json::object();
    if (auto p = f.find("properties"); p != f.end() && !p->is_null()) {
      if (!p->is_object()) {
        warn(path + ".properties", "InvalidProperties", "skipped: properties is not an object");
        return;
      }
      props = *p;
    }
    auto kind = props.find(std::string(profile::kFeatureType));
    if (kind == props.end()) {
      warn(path + ".properties.type", "MissingFeatureType",
           "skipped: feature has no 'type' property (POI or track)");
      return;
    }
    const bool is_poi = *kind == profile::kPoiType;
    const bool is_track = *kind == profile::kTrackType;
    if (!is_poi && !is_track) {
      warn(path + ".properties.type", "UnknownFeatureType",
           fmt::format("skipped: feature type {} is neither POI nor track", kind->dump()));
      return;
    }
    props.erase(kind);

    auto geom = f.find("geometry");
    if (geom == f.end() || geom->is_null() || !geom->is_object()) {
      warn(path + ".geometry", "MissingGeometry", "skipped: feature has no geometry");
      return;
    }
    const std::string expected = is_poi ? "Point" : "LineString";
    if (geom->value("type", json()) != expected) {
      warn(path + ".geometry", "UnsupportedGeometry",
           fmt::format("skipped: {} features need {} geometry", is_poi ? "POI" : "track",
                       expected));
      return;
    }
    auto coords = geom->find("coordinates");
    const std::string coord_path = path + ".geometry.coordinates";
    if (coords == geom->end()) {
      throw Error(ErrorCode::InvalidCoordinate, coord_path, "geometry has no coordinates");
    }
    for (auto& [key, value] : geom->items()) {
      if (key != "type" && key != "coordinates") {
        warn(path + ".geometry." + key, "GeometryMemberDropped",
             "geometry member is not supported and was dropped");
      }
    }

    json foreign = json::object();
    for (auto& [key, value] : f.items()) {
      if (key != "type" && key != "geometry" && key != "properties") foreign[key] = value;
    }

    if (is_poi) {
      PoiFeature poi;
      poi.location = parse_position(*coords, coord_path);
      poi.properties = std::move(props);
      poi.foreign = std::move(foreign);
      poi.source_index = index;
      if (auto id = poi.properties.find(std::string(profile::kId));
          id != poi.properties.end() && id->is_string()) {
        const auto value = id->get<std::string>();
        if (!seen_ids_.insert(value).second) {
          throw Error(ErrorCode::DuplicatePoiId, path + ".properties.id",
                      fmt::format("POI id '{}' is used more than once", value));
        }
      }
      report_unknown(PropertyScope::Poi, poi.properties, path + ".properties");
      c.pois.push_back(std::move(poi));
    } else {
      if (!coords->is_array()) {
        throw Error(ErrorCode::InvalidCoordinate, coord_path, "LineString coordinates not an array");
      }
      TrackFeature track;
      for (std::size_t k = 0; k < coords->size(); ++k) {
        track.points.push_back(parse_position((*coords)[k], fmt::format("{}[{}]", coord_path, k)));
      }
      collapse_duplicates(track.points);
      if (track.points.size() < 2) {
        warn(coord_path, "TrackTooShort", "skipped: track needs at least two distinct points");
        return;
      }
      track.properties = std::move(props);
      track.foreign = std::move(foreign);
      track.source_index = index;
      report_unknown(PropertyScope::Track, track.properties, path + ".properties");
      c.tracks.push_back(std::move(track));
    }
  }

  const ParseOptions& options_;
  std::vector<Finding> diagnostics_;
  std::unordered_set<std::string> seen_ids_;
};

[[noreturn]] void violation(std::string path, std::string message) {
  throw Error(ErrorCode::InvariantViolation, std::move(path), std::move(message));
}

}  // namespace

bool GeoPoint::valid() const noexcept {
  return lon >= -180.0 && lon <= 180.0 && lat >= -90.0 && lat <= 90.0;
}

std::string_view to_string(PropertyScope scope) noexcept {
  switch (scope) {
    case PropertyScope::Collection: return "collection";
    case PropertyScope::Poi: return "poi";
    case PropertyScope::Track: return "track";
  }
  return "collection";
}

std::optional<PropertyScope> parse_scope(std::string_view name) noexcept {
  if (name == "collection") return PropertyScope::Collection;
  if (name == "poi") return PropertyScope::Poi;
  if (name == "track") return PropertyScope::Track;
  return std::nullopt;
}

bool is_valid_poi_id(std::string_view id) noexcept {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char ch) {
    return (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') ||
           ch == '.' || ch == '_' || ch == '-';
  });
}

std::string PoiFeature::id() const { return string_property(properties, profile::kId); }
std::string PoiFeature::title() const { return string_property(properties, profile::kTitle); }
std::string PoiFeature::description() const {
  return string_property(properties, profile::kDescription);
}
std::optional<std::string> PoiFeature::image_url() const {
  return optional_string_property(properties, profile::kImage);
}

std::optional<std::string> TrackFeature::title() const {
  return optional_string_property(properties, profile::kTitle);
}

std::string CollectionMeta::name() const { return string_property(properties, profile::kName); }
std::string CollectionMeta::version() const {
  return string_property(properties, profile::kVersion);
}
std::string CollectionMeta::language() const {
  return string_property(properties, profile::kLanguage);
}
std::optional<std::string> CollectionMeta::description() const {
  return optional_string_property(properties, profile::kDescription);
}
std::optional<std::string> CollectionMeta::schema_url() const {
  return optional_string_property(properties, profile::kSchema);
}

const PoiFeature* TourCollection::find_poi(std::string_view id) const {
  for (const auto& p : pois) {
    if (p.id() == id) return &p;
  }
  return nullptr;
}

std::string TourCollection::poi_path(std::size_t index) const {
  return feature_path(pois.at(index).source_index.value_or(index));
}

std::string TourCollection::track_path(std::size_t index) const {
  return feature_path(tracks.at(index).source_index.value_or(pois.size() + index));
}

PoiFeature make_poi(std::string id, std::string title, std::string description,
                    std::string image_url, GeoPoint location) {
  PoiFeature poi;
  poi.location = location;
  poi.properties[std::string(profile::kId)] = std::move(id);
  poi.properties[std::string(profile::kTitle)] = std::move(title);
  poi.properties[std::string(profile::kDescription)] = std::move(description);
  poi.properties[std::string(profile::kImage)] = std::move(image_url);
  return poi;
}

TrackFeature make_track(std::vector<GeoPoint> points, std::optional<std::string> title) {
  TrackFeature track;
  track.points = std::move(points);
  collapse_duplicates(track.points);
  if (title) track.properties[std::string(profile::kTitle)] = std::move(*title);
  return track;
}

CollectionMeta make_meta(std::string name, std::string version, std::string language,
                         std::optional<std::string> description,
                         std::optional<std::string> schema_url) {
  CollectionMeta meta;
  meta.properties[std::string(profile::kName)] = std::move(name);
  meta.properties[std::string(profile::kVersion)] = std::move(version);
  meta.properties[std::string(profile::kLanguage)] = std::move(language);
  if (description) meta.properties[std::string(profile::kDescription)] = std::move(*description);
  if (schema_url) meta.properties[std::string(profile::kSchema)] = std::move(*schema_url);
  return meta;
}

const KnownProperties& profile_properties() {
  static const KnownProperties known = {
      {PropertyScope::Collection,
       {std::string(profile::kName), std::string(profile::kVersion),
        std::string(profile::kLanguage), std::string(profile::kDescription),
        std::string(profile::kSchema)}},
      {PropertyScope::Poi,
       {std::string(profile::kId), std::string(profile::kTitle),
        std::string(profile::kDescription), std::string(profile::kImage)}},
      {PropertyScope::Track, {std::string(profile::kTitle)}},
  };
  return known;
}

ParseResult parse_collection(std::string_view text, const ParseOptions& options) {
  return Parser(options).run(text);
}

void check_invariants(const TourCollection& c) {
  if (!c.meta.properties.is_object()) violation("properties", "properties is not an object");
  if (text::trim(c.meta.name()).empty()) violation("properties.name", "name is empty");
  if (text::trim(c.meta.version()).empty()) violation("properties.version", "version is empty");
  if (c.pois.empty()) violation("features", "collection has no POI");

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < c.pois.size(); ++i) {
    const auto& poi = c.pois[i];
    const auto path = c.poi_path(i);
    if (!poi.properties.is_object()) violation(path + ".properties", "not an object");
    if (!poi.location.valid()) violation(path + ".geometry.coordinates", "invalid position");
    const auto id = poi.id();
    if (!is_valid_poi_id(id)) violation(path + ".properties.id", "id is not a valid token");
    if (!ids.insert(id).second) violation(path + ".properties.id", "duplicate id " + id);
    if (text::trim(poi.title()).empty()) violation(path + ".properties.title", "title is empty");
  }
  for (std::size_t i = 0; i < c.tracks.size(); ++i) {
    const auto& track = c.tracks[i];
    const auto path = c.track_path(i);
    if (!track.properties.is_object()) violation(path + ".properties", "not an object");
    if (track.points.size() < 2) violation(path + ".geometry.coordinates", "fewer than 2 points");
    for (std::size_t k = 0; k < track.points.size(); ++k) {
      if (!track.points[k].valid()) {
        violation(fmt::format("{}.geometry.coordinates[{}]", path, k), "invalid position");
      }
      if (k > 0 && track.points[k] == track.points[k - 1]) {
        violation(fmt::format("{}.geometry.coordinates[{}]", path, k), "consecutive duplicate");
      }
    }
  }
}

std::string serialize_collection(const TourCollection& c) {
  check_invariants(c);

  json features = json::array();
  for (const auto& poi : c.pois) {
    json f = poi.foreign.is_object() ? poi.foreign : json::object();
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", position_to_json(poi.location)}};
    f["properties"] = poi.properties;
    f["properties"][std::string(profile::kFeatureType)] = profile::kPoiType;
    features.push_back(std::move(f));
  }
  for (const auto& track : c.tracks) {
    json f = track.foreign.is_object() ? track.foreign : json::object();
    json coords = json::array();
    for (const auto& p : track.points) coords.push_back(position_to_json(p));
    f["type"] = "Feature";
    f["geometry"] = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
    f["properties"] = track.properties;
    f["properties"][std::string(profile::kFeatureType)] = profile::kTrackType;
    features.push_back(std::move(f));
  }

  json root = c.foreign.is_object() ? c.foreign : json::object();
  root["type"] = "FeatureCollection";
  root["properties"] = c.meta.properties;
  root["features"] = std::move(features);
  return root.dump(2) + "\n";
}

}  // namespace trailpack
