#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trailpack/config_model.hpp"
#include "trailpack/geo_engine.hpp"
#include "trailpack/provisioning.hpp"

namespace trailpack {

inline constexpr double kDefaultArrivalM = 15.0;
inline constexpr std::size_t kDefaultPreviewCap = 280;

struct TracePoint {
  double t = 0.0;
  GeoPoint location;
  double accuracy_m = 1.0;

  bool operator==(const TracePoint&) const = default;
};

/// CSV lines `t,lat,lon,accuracy`; an optional non-numeric header line and
/// blank lines are skipped. Throws Error with MalformedLine,
/// NonMonotonicTime or InvalidCoordinate, numbered by physical line.
std::vector<TracePoint> parse_trace(std::string_view csv);

/// Header plus one line per point; parse_trace(write_trace(p)) == p.
std::string write_trace(std::span<const TracePoint> points);

struct SimParams {
  double margin_m = kDefaultMarginM;
  double arrival_m = kDefaultArrivalM;
};

struct GuidanceEvent {
  double t = 0.0;
  GpsFix fix;
  std::string highlight;
  /// Distance to the highlighted POI (not necessarily the nearest one).
  double distance_m = 0.0;
  bool changed = false;
  bool within_arrival = false;
  /// Minimum distance to any track; absent when the tour has no track.
  std::optional<double> off_track_m;
};

/// One event per trace point, highlight folded through select_highlight.
/// Throws Error{EmptyCollection} for a collection without POIs.
std::vector<GuidanceEvent> simulate(const TourCollection& c, std::span<const TracePoint> trace,
                                    const SimParams& params = {});
std::vector<GuidanceEvent> simulate(const Bundle& b, std::span<const TracePoint> trace,
                                    const SimParams& params = {});

/// One NDJSON line (no newline). Keys in fixed order; distances carry three
/// decimals, inputs keep their shortest round-trip form.
std::string to_ndjson(const GuidanceEvent& e);
std::string write_events(std::span<const GuidanceEvent> events);
/// Throws Error{MalformedLine} with the 1-based line number.
std::vector<GuidanceEvent> parse_events(std::string_view ndjson);

struct Preview {
  std::string text;
  bool truncated = false;
};

/// Fits `text` into `cap` characters without splitting a word; truncated
/// previews end with "…". A text with no usable word boundary is cut hard at
/// cap-1 characters. Throws std::invalid_argument when cap < 8.
Preview truncate_description(std::string_view text, std::size_t cap = kDefaultPreviewCap);

/// "X m" while the rounded distance is below 1000 m, otherwise "X.X km".
std::string format_distance(double meters);

/// What the single-page app shows: map pane, image pane, description pane.
struct ScreenState {
  GeoPoint map_center;
  std::vector<std::string> visible_pois;
  std::string highlight;
  /// Bundle-relative path of the cached image; absent after a failed fetch.
  std::optional<std::string> image_ref;
  std::string distance_text;
  std::string description_preview;
  bool truncated = false;
};

/// Throws std::invalid_argument if `h` has no current POI and
/// Error{StalePoi} if it names a POI missing from the bundle.
ScreenState render_screen_state(const Bundle& b, const GpsFix& fix, const HighlightState& h,
                                std::size_t preview_cap = kDefaultPreviewCap);

struct VisitSummary {
  /// Highlighted POIs seen within the arrival radius, in order of first visit.
  std::vector<std::string> pois_visited;
  /// Number of POIs in the tour, when known.
  std::optional<std::size_t> pois_total;
  double path_length_m = 0.0;
  double duration_s = 0.0;
};

/// A POI counts as visited when an event highlights it at a distance of at
/// most `arrival_m`.
VisitSummary summarize(std::span<const GuidanceEvent> events, double arrival_m = kDefaultArrivalM,
                       std::optional<std::size_t> pois_total = std::nullopt);

nlohmann::ordered_json to_json(const ScreenState& s);
nlohmann::ordered_json to_json(const VisitSummary& s);

}  // namespace trailpack
