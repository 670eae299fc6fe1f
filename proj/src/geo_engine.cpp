#include "trailpack/geo_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

#include "trailpack/error.hpp"

namespace trailpack {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const GeoPoint& p) {
  const double lat = p.lat * kDegToRad;
  const double lon = p.lon * kDegToRad;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

Vec3 minus(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double segment_distance(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
  const double endpoints = std::min(haversine_distance(p, a), haversine_distance(p, b));
  if (a == b) return endpoints;

  const Vec3 va = to_unit(a);
  const Vec3 vb = to_unit(b);
  const Vec3 vp = to_unit(p);
  const Vec3 n = cross(va, vb);
  const double n_len = norm(n);
  if (n_len < 1e-15) return endpoints;
  const Vec3 pole = scaled(n, 1.0 / n_len);

  const double s = std::clamp(dot(vp, pole), -1.0, 1.0);
  const Vec3 foot = minus(vp, scaled(pole, s));
  if (norm(foot) < 1e-15) return endpoints;

  const bool inside = dot(cross(va, foot), pole) >= 0.0 && dot(cross(foot, vb), pole) >= 0.0;
  if (!inside) return endpoints;
  return std::min(endpoints, kEarthRadiusM * std::abs(std::asin(s)));
}

}  // namespace

std::string_view to_string(FixSource source) noexcept {
  switch (source) {
    case FixSource::Gps: return "gps";
    case FixSource::Manual: return "manual";
    case FixSource::QrMarker: return "qr_marker";
  }
  return "gps";
}

std::optional<FixSource> parse_fix_source(std::string_view name) noexcept {
  if (name == "gps") return FixSource::Gps;
  if (name == "manual") return FixSource::Manual;
  if (name == "qr_marker") return FixSource::QrMarker;
  return std::nullopt;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double half_dlat = std::sin((b.lat - a.lat) * kDegToRad / 2.0);
  const double half_dlon = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  const double h = half_dlat * half_dlat + std::cos(lat1) * std::cos(lat2) * half_dlon * half_dlon;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double initial_bearing(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double y = std::sin(dlon) * std::cos(lat2);
  const double x = std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
  if (a == b || std::hypot(x, y) < 1e-12) {
    throw Error(ErrorCode::UndefinedBearing, "",
                fmt::format("bearing from ({}, {}) to ({}, {}) is undefined", a.lon, a.lat, b.lon,
                            b.lat));
  }
  double deg = std::atan2(y, x) / kDegToRad;
  deg = std::fmod(deg + 360.0, 360.0);
  return deg >= 360.0 ? 0.0 : deg;
}

NearestPoi nearest_poi(const GpsFix& fix, const TourCollection& c) {
  if (c.pois.empty()) throw Error(ErrorCode::EmptyCollection, "", "collection has no POI");
  const PoiFeature* best = nullptr;
  std::string best_id;
  double best_d = 0.0;
  for (const auto& poi : c.pois) {
    const double d = haversine_distance(fix.location, poi.location);
    std::string id = poi.id();
    if (best == nullptr || std::tie(d, id) < std::tie(best_d, best_id)) {
      best = &poi;
      best_d = d;
      best_id = std::move(id);
    }
  }
  return {std::move(best_id), best_d};
}

HighlightState select_highlight(const HighlightState& prev, const GpsFix& fix,
                                const TourCollection& c, double margin_m) {
  if (!(margin_m >= 0.0)) throw std::invalid_argument("hysteresis margin must be >= 0");
  if (!prev.current_poi_id) {
    auto nearest = nearest_poi(fix, c);
    return {std::move(nearest.id), fix.t};
  }
  const PoiFeature* current = c.find_poi(*prev.current_poi_id);
  if (current == nullptr) {
    throw Error(ErrorCode::StalePoi, *prev.current_poi_id,
                fmt::format("highlighted POI '{}' is not in the collection", *prev.current_poi_id));
  }
  const double current_d = haversine_distance(fix.location, current->location);
  auto nearest = nearest_poi(fix, c);
  const double threshold = std::max(margin_m, fix.accuracy_m);
  if (nearest.id != *prev.current_poi_id && nearest.distance_m < current_d - threshold) {
    return {std::move(nearest.id), fix.t};
  }
  return prev;
}

double point_to_track_distance(const GeoPoint& p, const TrackFeature& track) {
  if (track.points.size() < 2) throw std::invalid_argument("track needs at least two points");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < track.points.size(); ++i) {
    best = std::min(best, segment_distance(p, track.points[i - 1], track.points[i]));
  }
  return best;
}

}  // namespace trailpack
