#include "trailpack/guidance_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "trailpack/error.hpp"
#include "trailpack/text.hpp"

namespace trailpack {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kEllipsis = "\xE2\x80\xA6";  // U+2026

std::optional<double> parse_number(std::string_view s) {
  s = text::trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Calls `fn(line, number)` for every line, stripping a trailing CR.
template <typename Fn>
void for_each_line(std::string_view doc, Fn&& fn) {
  std::size_t number = 0;
  while (!doc.empty()) {
    const auto nl = doc.find('\n');
    std::string_view line = doc.substr(0, nl);
    doc = nl == std::string_view::npos ? std::string_view{} : doc.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++number);
  }
}

[[noreturn]] void line_error(ErrorCode code, std::size_t n, std::string message) {
  throw Error(code, fmt::format("line {}", n), fmt::format("line {}: {}", n, message),
              static_cast<std::int64_t>(n));
}

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }

}  // namespace

std::vector<TracePoint> parse_trace(std::string_view csv) {
  std::vector<TracePoint> points;
  bool first = true;
  for_each_line(csv, [&](std::string_view line, std::size_t n) {
    if (text::trim(line).empty()) return;
    const bool header_allowed = first;
    first = false;
    auto fields = split(line, ',');
    if (header_allowed && !fields.empty() && !parse_number(fields[0])) return;
    if (fields.size() != 4) line_error(ErrorCode::MalformedLine, n, "expected t,lat,lon,accuracy");

    auto t = parse_number(fields[0]);
    auto lat = parse_number(fields[1]);
    auto lon = parse_number(fields[2]);
    auto acc = parse_number(fields[3]);
    if (!t || !lat || !lon || !acc) line_error(ErrorCode::MalformedLine, n, "field is not a finite number");
    if (!(*acc > 0.0)) line_error(ErrorCode::MalformedLine, n, "accuracy must be positive");
    GeoPoint p{*lon, *lat};
    if (!p.valid()) line_error(ErrorCode::InvalidCoordinate, n, "position out of range");
    if (!points.empty() && !(*t > points.back().t)) {
      line_error(ErrorCode::NonMonotonicTime, n, "time must increase strictly");
    }
    points.push_back({*t, p, *acc});
  });
  return points;
}

std::string write_trace(std::span<const TracePoint> points) {
  std::string out = "t,lat,lon,accuracy\n";
  for (const auto& p : points) {
    out += fmt::format("{},{},{},{}\n", p.t, p.location.lat, p.location.lon, p.accuracy_m);
  }
  return out;
}

std::vector<GuidanceEvent> simulate(const TourCollection& c, std::span<const TracePoint> trace,
                                    const SimParams& params) {
  if (c.pois.empty()) throw Error(ErrorCode::EmptyCollection, "", "collection has no POI");
  if (!(params.margin_m >= 0.0) || !(params.arrival_m >= 0.0)) {
    throw std::invalid_argument("margin and arrival radius must be >= 0");
  }

  std::vector<GuidanceEvent> events;
  events.reserve(trace.size());
  HighlightState state;
  for (const auto& point : trace) {
    const GpsFix fix{point.t, point.location, point.accuracy_m, FixSource::Gps};
    const std::optional<std::string> previous = state.current_poi_id;
    state = select_highlight(state, fix, c, params.margin_m);

    GuidanceEvent e;
    e.t = point.t;
    e.fix = fix;
    e.highlight = *state.current_poi_id;
    e.distance_m = haversine_distance(fix.location, c.find_poi(e.highlight)->location);
    e.changed = previous != state.current_poi_id;
    e.within_arrival = e.distance_m <= params.arrival_m;
    if (!c.tracks.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& track : c.tracks) best = std::min(best, point_to_track_distance(fix.location, track));
      e.off_track_m = best;
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<GuidanceEvent> simulate(const Bundle& b, std::span<const TracePoint> trace,
                                    const SimParams& params) {
  return simulate(b.collection, trace, params);
}

std::string to_ndjson(const GuidanceEvent& e) {
  std::string out = fmt::format(
      R"({{"t":{},"lat":{},"lon":{},"accuracy_m":{},"source":"{}","highlight":{},"distance_m":{},)"
      R"("changed":{},"within_arrival":{})",
      e.t, e.fix.location.lat, e.fix.location.lon, e.fix.accuracy_m, to_string(e.fix.source),
      json(e.highlight).dump(), fixed3(e.distance_m), e.changed, e.within_arrival);
  if (e.off_track_m) out += fmt::format(R"(,"off_track_m":{})", fixed3(*e.off_track_m));
  out += "}";
  return out;
}

std::string write_events(std::span<const GuidanceEvent> events) {
  std::string out;
  for (const auto& e : events) {
    out += to_ndjson(e);
    out += '\n';
  }
  return out;
}

std::vector<GuidanceEvent> parse_events(std::string_view ndjson) {
  std::vector<GuidanceEvent> events;
  for_each_line(ndjson, [&](std::string_view line, std::size_t n) {
    if (text::trim(line).empty()) return;
    try {
      const json j = json::parse(line);
      GuidanceEvent e;
      e.t = j.at("t").get<double>();
      e.fix.t = e.t;
      e.fix.location = {j.at("lon").get<double>(), j.at("lat").get<double>()};
      e.fix.accuracy_m = j.at("accuracy_m").get<double>();
      auto source = parse_fix_source(j.at("source").get<std::string>());
      if (!source) line_error(ErrorCode::MalformedLine, n, "unknown fix source");
      e.fix.source = *source;
      e.highlight = j.at("highlight").get<std::string>();
      e.distance_m = j.at("distance_m").get<double>();
      e.changed = j.at("changed").get<bool>();
      e.within_arrival = j.at("within_arrival").get<bool>();
      if (auto off = j.find("off_track_m"); off != j.end()) e.off_track_m = off->get<double>();
      events.push_back(std::move(e));
    } catch (const json::exception& ex) {
      line_error(ErrorCode::MalformedLine, n, ex.what());
    }
  });
  return events;
}

Preview truncate_description(std::string_view text, std::size_t cap) {
  if (cap < 8) throw std::invalid_argument("preview cap must be at least 8 characters");
  if (text::length(text) <= cap) return {std::string(text), false};

  // The prefix may use cap-1 characters; the ellipsis takes the last one.
  const std::size_t limit = text::byte_offset(text, cap - 1);
  for (std::size_t b = std::min(limit, text.size() - 1) + 1; b-- > 0;) {
    if (!text::is_space(text[b])) continue;
    std::string_view prefix = text.substr(0, b);
    while (!prefix.empty() && text::is_space(prefix.back())) prefix.remove_suffix(1);
    if (!prefix.empty()) return {std::string(prefix) + std::string(kEllipsis), true};
    break;
  }
  return {std::string(text.substr(0, limit)) + std::string(kEllipsis), true};
}

std::string format_distance(double meters) {
  const double rounded = std::round(meters);
  if (rounded < 1000.0) return fmt::format("{} m", static_cast<long long>(rounded));
  const double tenths = std::round(meters / 100.0);
  return fmt::format("{:.1f} km", tenths / 10.0);
}

ScreenState render_screen_state(const Bundle& b, const GpsFix& fix, const HighlightState& h,
                                std::size_t preview_cap) {
  if (!h.current_poi_id) throw std::invalid_argument("highlight state has no current POI");
  const PoiFeature* poi = b.collection.find_poi(*h.current_poi_id);
  if (poi == nullptr) {
    throw Error(ErrorCode::StalePoi, *h.current_poi_id,
                fmt::format("highlighted POI '{}' is not in the bundle", *h.current_poi_id));
  }

  ScreenState s;
  s.map_center = fix.location;
  for (const auto& p : b.collection.pois) s.visible_pois.push_back(p.id());
  s.highlight = *h.current_poi_id;
  s.image_ref = b.asset_for(s.highlight);
  s.distance_text = format_distance(haversine_distance(fix.location, poi->location));
  auto preview = truncate_description(poi->description(), preview_cap);
  s.description_preview = std::move(preview.text);
  s.truncated = preview.truncated;
  return s;
}

VisitSummary summarize(std::span<const GuidanceEvent> events, double arrival_m,
                       std::optional<std::size_t> pois_total) {
  VisitSummary s;
  s.pois_total = pois_total;
  if (events.empty()) return s;

  std::set<std::string> seen;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.distance_m <= arrival_m && seen.insert(e.highlight).second) {
      s.pois_visited.push_back(e.highlight);
    }
    if (i > 0) s.path_length_m += haversine_distance(events[i - 1].fix.location, e.fix.location);
  }
  s.duration_s = events.back().t - events.front().t;
  return s;
}

ordered_json to_json(const ScreenState& s) {
  ordered_json j;
  j["map_center"] = {{"lat", s.map_center.lat}, {"lon", s.map_center.lon}};
  j["visible_pois"] = s.visible_pois;
  j["highlight"] = s.highlight;
  j["image_ref"] = s.image_ref ? ordered_json(*s.image_ref) : ordered_json(nullptr);
  j["distance_text"] = s.distance_text;
  j["description_preview"] = s.description_preview;
  j["truncated"] = s.truncated;
  return j;
}

ordered_json to_json(const VisitSummary& s) {
  ordered_json j;
  j["pois_visited"] = s.pois_visited;
  j["pois_total"] = s.pois_total ? ordered_json(*s.pois_total) : ordered_json(nullptr);
  j["path_length_m"] = std::round(s.path_length_m * 1000.0) / 1000.0;
  j["duration_s"] = s.duration_s;
  return j;
}

}  // namespace trailpack
