#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "trailpack/config_model.hpp"

namespace trailpack {

/// IUGG mean Earth radius, meters.
inline constexpr double kEarthRadiusM = 6'371'008.8;

/// Static hysteresis margin used when the caller has no preference, meters.
inline constexpr double kDefaultMarginM = 5.0;

enum class FixSource { Gps, Manual, QrMarker };

std::string_view to_string(FixSource source) noexcept;
std::optional<FixSource> parse_fix_source(std::string_view name) noexcept;

/// One position estimate. `accuracy_m` is the 1-sigma horizontal radius and
/// must be positive.
struct GpsFix {
  double t = 0.0;
  GeoPoint location;
  double accuracy_m = 1.0;
  FixSource source = FixSource::Gps;

  bool operator==(const GpsFix&) const = default;
};

/// The POI currently highlighted on the map and when it became so.
struct HighlightState {
  std::optional<std::string> current_poi_id;
  double since_t = 0.0;

  bool operator==(const HighlightState&) const = default;
};

struct NearestPoi {
  std::string id;
  double distance_m = 0.0;
};

/// Great-circle distance on the mean sphere.
double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Initial great-circle bearing from `a` to `b` in [0, 360), clockwise from
/// true north. Throws Error{UndefinedBearing} when a == b or the points are
/// antipodal.
double initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// POI closest to the fix; equal distances go to the lexicographically
/// smallest id. Throws Error{EmptyCollection} when `c` has no POI.
NearestPoi nearest_poi(const GpsFix& fix, const TourCollection& c);

/// Hysteresis fold step. With no current POI the nearest is adopted;
/// otherwise the highlight moves only when the nearest POI is closer than the
/// current one by more than max(margin_m, fix.accuracy_m).
/// Throws Error{StalePoi} if the current POI is not in `c`.
HighlightState select_highlight(const HighlightState& prev, const GpsFix& fix,
                                const TourCollection& c, double margin_m = kDefaultMarginM);

/// Shortest distance from `p` to the track polyline: per segment, the
/// cross-track distance when the foot of the perpendicular falls inside the
/// segment, otherwise the nearer endpoint.
double point_to_track_distance(const GeoPoint& p, const TrackFeature& track);

}  // namespace trailpack
