#include <gtest/gtest.h>

#include <cctype>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "trailpack/error.hpp"
#include "trailpack/guidance_sim.hpp"
#include "trailpack/text.hpp"

namespace trailpack {
namespace {

using nlohmann::json;
using testing::fixture;
using testing::offset_m;
using testing::Rng;

const std::string kEllipsis = "\xE2\x80\xA6";

TourCollection reference() { return parse_collection(fixture("montefegatesi.geojson")).collection; }

template <typename F>
std::pair<ErrorCode, std::optional<std::int64_t>> error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.number()};
  }
  ADD_FAILURE() << "no error";
  return {ErrorCode::InvariantViolation, std::nullopt};
}

TEST(ParseTrace, SingleLine) {
  const auto pts = parse_trace("0,44.05,10.60,5");
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], (TracePoint{0, {10.60, 44.05}, 5}));
}

TEST(ParseTrace, HeaderBlankLinesAndCrLf) {
  const auto pts = parse_trace("t,lat,lon,accuracy\r\n\r\n0,44.05,10.6,5\r\n  \n1.5, 44.06 ,10.61,3\n");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[1].t, 1.5);
  EXPECT_TRUE(parse_trace("").empty());
  EXPECT_TRUE(parse_trace("t,lat,lon,accuracy\n").empty());
}

TEST(ParseTrace, Errors) {
  EXPECT_EQ(error_of([] { parse_trace("0,44.05,10.6,5\n0,44.05,10.6,5\n"); }),
            std::make_pair(ErrorCode::NonMonotonicTime, std::optional<std::int64_t>(2)));
  EXPECT_EQ(error_of([] { parse_trace("2,44.05,10.6,5\n\n1,44.05,10.6,5\n"); }),
            std::make_pair(ErrorCode::NonMonotonicTime, std::optional<std::int64_t>(3)));
  EXPECT_EQ(error_of([] { parse_trace("0,44.05,10.6\n"); }).first, ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] { parse_trace("0,44.05,10.6,5\nx,1,2,3\n"); }),
            std::make_pair(ErrorCode::MalformedLine, std::optional<std::int64_t>(2)));
  EXPECT_EQ(error_of([] { parse_trace("0,44.05,10.6,0\n"); }).first, ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] { parse_trace("0,44.05,10.6,nan\n"); }).first, ErrorCode::MalformedLine);
  EXPECT_EQ(error_of([] { parse_trace("0,91,10.6,5\n"); }).first, ErrorCode::InvalidCoordinate);
  EXPECT_EQ(error_of([] { parse_trace("0,44,-181,5\n"); }).first, ErrorCode::InvalidCoordinate);
}

TEST(ParseTrace, GeneratedRoundTrip) {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    std::vector<TracePoint> pts;
    double t = testing::uniform(rng, -100, 100);
    for (int i = 0; i < 100; ++i) {
      t += testing::uniform(rng, 1e-3, 30);
      pts.push_back({t, testing::random_point(rng), testing::uniform(rng, 0.1, 50)});
    }
    const auto back = parse_trace(write_trace(pts));
    ASSERT_EQ(back.size(), 100u);
    EXPECT_EQ(back, pts);
  }
}

TEST(ParseTrace, WalkFixture) {
  const auto pts = parse_trace(fixture("walk.csv"));
  EXPECT_EQ(pts.size(), 57u);
}

TEST(Simulate, EmptyTrace) { EXPECT_TRUE(simulate(reference(), std::vector<TracePoint>{}).empty()); }

TEST(Simulate, ConstantNearestGivesOneChange) {
  const auto c = reference();
  const GeoPoint mill4 = c.find_poi("mill-4")->location;
  std::vector<TracePoint> trace;
  for (int i = 0; i < 5; ++i) trace.push_back({double(i), offset_m(mill4, i * 2.0, -i * 3.0), 5});
  for (const auto& tp : trace) ASSERT_EQ(testing::brute_force_nearest(tp.location, c), "mill-4");
  const auto events = simulate(c, trace);
  ASSERT_EQ(events.size(), 5u);
  int changes = 0;
  for (const auto& e : events) {
    EXPECT_EQ(e.highlight, "mill-4");
    changes += e.changed;
  }
  EXPECT_EQ(changes, 1);
  EXPECT_TRUE(events[0].changed);
}

TEST(Simulate, BisectorJitter) {
  const auto s = testing::bisector_jitter(30);
  for (double margin : {5.0, 0.0}) {
    const auto events = simulate(s.collection, s.trace, {margin, kDefaultArrivalM});
    std::vector<std::string> got;
    int changes = 0;
    for (const auto& e : events) {
      got.push_back(e.highlight);
      changes += e.changed;
    }
    EXPECT_EQ(got, testing::replay_highlights(s.collection, s.trace, margin));
    if (margin > 0) {
      EXPECT_LE(changes, 1);
    } else {
      EXPECT_GE(changes, 3);
    }
    EXPECT_FALSE(events[0].off_track_m);
  }
}

TEST(Simulate, EventInvariants) {
  const auto c = reference();
  Rng rng(32);
  std::vector<TracePoint> trace;
  for (int i = 0; i < 500; ++i) {
    trace.push_back({i * 2.0, {testing::uniform(rng, 10.585, 10.607), testing::uniform(rng, 44.048, 44.064)},
                     testing::uniform(rng, 0.5, 20)});
  }
  const SimParams params{0.0, 40.0};
  const auto events = simulate(c, trace, params);
  ASSERT_EQ(events.size(), trace.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    EXPECT_EQ(e.t, trace[i].t);
    EXPECT_EQ(e.changed, i == 0 || e.highlight != events[i - 1].highlight);
    EXPECT_EQ(e.within_arrival, e.distance_m <= params.arrival_m);
    ASSERT_TRUE(e.off_track_m);
    EXPECT_NEAR(*e.off_track_m, point_to_track_distance(trace[i].location, c.tracks[0]), 1e-9);
  }
}

TEST(Simulate, MarginZeroMatchesBruteForceStepwise) {
  const auto c = reference();
  Rng rng(33);
  std::vector<TracePoint> trace;
  for (int i = 0; i < 1000; ++i) {
    trace.push_back({double(i), {testing::uniform(rng, 10.585, 10.607), testing::uniform(rng, 44.048, 44.064)}, 1e-6});
  }
  const auto events = simulate(c, trace, {0.0, 15.0});
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(events[i].highlight, testing::brute_force_nearest(trace[i].location, c));
  }
}

TEST(Simulate, EmptyCollection) {
  TourCollection c;
  EXPECT_EQ(error_of([&] { simulate(c, std::vector<TracePoint>{{0, {0, 0}, 1}}); }).first,
            ErrorCode::EmptyCollection);
}

TEST(Ndjson, FixedKeyOrderAndFormatting) {
  GuidanceEvent e;
  e.t = 15;
  e.fix = {15, {10.590312, 44.052125}, 8, FixSource::Gps};
  e.highlight = "mill-1";
  e.distance_m = 27.12345;
  e.changed = true;
  e.within_arrival = false;
  e.off_track_m = 0.0004;
  EXPECT_EQ(to_ndjson(e),
            R"({"t":15,"lat":44.052125,"lon":10.590312,"accuracy_m":8,"source":"gps","highlight":"mill-1",)"
            R"("distance_m":27.123,"changed":true,"within_arrival":false,"off_track_m":0.000})");
  e.off_track_m.reset();
  EXPECT_EQ(to_ndjson(e).find("off_track_m"), std::string::npos);
}

TEST(Ndjson, DeterministicAndParsable) {
  const auto c = reference();
  const auto trace = parse_trace(fixture("walk.csv"));
  const auto a = write_events(simulate(c, trace));
  const auto b = write_events(simulate(c, trace));
  EXPECT_EQ(a, b);
  const auto parsed = parse_events(a);
  ASSERT_EQ(parsed.size(), trace.size());
  EXPECT_EQ(write_events(parsed), a);
  for (const auto& line : {std::string("{}"), std::string("not json")}) {
    EXPECT_EQ(error_of([&] { parse_events("\n" + line + "\n"); }),
              std::make_pair(ErrorCode::MalformedLine, std::optional<std::int64_t>(2)));
  }
}

TEST(FormatDistance, Rounding) {
  EXPECT_EQ(format_distance(0.0), "0 m");
  EXPECT_EQ(format_distance(12.5), "13 m");
  EXPECT_EQ(format_distance(999.4), "999 m");
  EXPECT_EQ(format_distance(999.5), "1.0 km");
  EXPECT_EQ(format_distance(1049), "1.0 km");
  EXPECT_EQ(format_distance(1050), "1.1 km");
  EXPECT_EQ(format_distance(12345), "12.3 km");
}

// Independent model: whole words by code point offset, last one ending
// at or before cap-1.
Preview truncation_oracle(const std::string& s, std::size_t cap) {
  std::vector<std::string> cps;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t len = 1;
    const auto c = static_cast<unsigned char>(s[i]);
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    cps.push_back(s.substr(i, len));
    i += len;
  }
  if (cps.size() <= cap) return {s, false};
  auto space = [&](std::size_t i) { return cps[i].size() == 1 && std::isspace(static_cast<unsigned char>(cps[i][0])); };
  std::size_t best_end = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const bool word_end = !space(i) && (i + 1 == cps.size() || space(i + 1));
    if (word_end && i + 1 <= cap - 1) best_end = i + 1;
  }
  if (best_end == 0) best_end = cap - 1;
  std::string out;
  for (std::size_t i = 0; i < best_end; ++i) out += cps[i];
  return {out + kEllipsis, true};
}

TEST(TruncateDescription, Examples) {
  EXPECT_EQ(truncate_description("Ten chars!", 280).text, "Ten chars!");
  EXPECT_FALSE(truncate_description("Ten chars!", 280).truncated);

  const auto long_text = testing::words(500);
  const auto p = truncate_description(long_text, 280);
  EXPECT_TRUE(p.truncated);
  EXPECT_LE(text::length(p.text), 280u);
  ASSERT_GE(p.text.size(), kEllipsis.size());
  EXPECT_EQ(p.text.substr(p.text.size() - kEllipsis.size()), kEllipsis);
  const auto body = p.text.substr(0, p.text.size() - kEllipsis.size());
  EXPECT_EQ(long_text.compare(0, body.size(), body), 0);
  EXPECT_EQ(long_text[body.size()], ' ');

  const std::string solid(400, 'a');
  const auto hard = truncate_description(solid, 280);
  EXPECT_EQ(hard.text, std::string(279, 'a') + kEllipsis);
  EXPECT_THROW(truncate_description("abc", 7), std::invalid_argument);
}

TEST(TruncateDescription, PropertyAgainstOracle) {
  Rng rng(34);
  for (int i = 0; i < 5000; ++i) {
    const auto s = testing::random_text(rng, testing::uniform_int(rng, 0, 80));
    const auto cap = static_cast<std::size_t>(testing::uniform_int(rng, 8, 300));
    const auto got = truncate_description(s, cap);
    const auto want = truncation_oracle(s, cap);
    ASSERT_EQ(got.text, want.text) << "cap " << cap << " text [" << s << "]";
    ASSERT_EQ(got.truncated, want.truncated);
    EXPECT_LE(text::length(got.text), cap);
    EXPECT_EQ(got.truncated, text::length(s) > cap);
    if (!got.truncated) EXPECT_EQ(got.text, s);
  }
}

class RenderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    testing::serve_mill_images(fetcher_);
    fetcher_.serve(std::string(testing::kImageBase) + "mill-2.jpg", "", 500);
    BuildOptions o;
    o.created_t = 1;
    auto doc = json::parse(fixture("montefegatesi.geojson"));
    doc["features"][0]["properties"]["description"] = testing::words(120);
    bundle_ = build_bundle(doc.dump(), "https://tours.example.org/t.geojson", fetcher_, dir_ / "b", o);
  }
  testing::StubFetcher fetcher_;
  testing::TempDir dir_;
  Bundle bundle_;
};

TEST_F(RenderTest, ScreenForCachedImage) {
  const auto& poi = *bundle_.collection.find_poi("mill-3");
  const GpsFix fix{0, offset_m(poi.location, 0, 40), 5, FixSource::Manual};
  const auto s = render_screen_state(bundle_, fix, {"mill-3", 0});
  EXPECT_EQ(s.highlight, "mill-3");
  EXPECT_EQ(s.image_ref, "assets/mill-3.jpg");
  EXPECT_EQ(s.distance_text, "40 m");
  EXPECT_EQ(s.description_preview, poi.description());
  EXPECT_FALSE(s.truncated);
  EXPECT_EQ(s.visible_pois.size(), 8u);
  EXPECT_EQ(s.map_center, fix.location);
}

TEST_F(RenderTest, FailedImageDegradesToText) {
  const GpsFix fix{0, bundle_.collection.find_poi("mill-2")->location, 5, FixSource::Gps};
  const auto s = render_screen_state(bundle_, fix, {"mill-2", 0});
  EXPECT_FALSE(s.image_ref);
  EXPECT_FALSE(s.description_preview.empty());
  EXPECT_EQ(s.distance_text, "0 m");
  EXPECT_TRUE(to_json(s)["image_ref"].is_null());
}

TEST_F(RenderTest, LongDescriptionTruncated) {
  const GpsFix fix{0, bundle_.collection.find_poi("mill-1")->location, 5, FixSource::Gps};
  const auto s = render_screen_state(bundle_, fix, {"mill-1", 0}, 100);
  EXPECT_TRUE(s.truncated);
  EXPECT_LE(text::length(s.description_preview), 100u);
  const auto full = bundle_.collection.find_poi("mill-1")->description();
  EXPECT_EQ(text::word_count(full), 120u);
}

TEST_F(RenderTest, Errors) {
  const GpsFix fix{0, {10.6, 44.05}, 5, FixSource::Gps};
  EXPECT_THROW(render_screen_state(bundle_, fix, {}), std::invalid_argument);
  EXPECT_EQ(error_of([&] { render_screen_state(bundle_, fix, {"mill-99", 0}); }).first, ErrorCode::StalePoi);
}

TEST(Summarize, Empty) {
  const auto s = summarize(std::vector<GuidanceEvent>{});
  EXPECT_TRUE(s.pois_visited.empty());
  EXPECT_EQ(s.path_length_m, 0.0);
  EXPECT_EQ(s.duration_s, 0.0);
}

TEST(Summarize, StraightEquatorSegment) {
  const GeoPoint a{0, 0};
  const GeoPoint b{100.0 / kEarthRadiusM * 180.0 / std::numbers::pi, 0};
  const auto c = [&] {
    TourCollection t;
    t.meta = make_meta("t", "1", "en");
    t.pois.push_back(make_poi("far", "Far", "", "https://e.org/x.jpg", {1, 1}));
    return t;
  }();
  const auto events = simulate(c, std::vector<TracePoint>{{0, a, 3}, {60, b, 3}});
  const auto s = summarize(events);
  EXPECT_NEAR(s.path_length_m, 100.0, 0.1);
  EXPECT_EQ(s.duration_s, 60.0);
  EXPECT_TRUE(s.pois_visited.empty());
}

TEST(Summarize, ThreeOfEightVisited) {
  const auto c = reference();
  // Pass close to mill-2, mill-5 and mill-7 and stay far from the others.
  std::vector<TracePoint> trace;
  double t = 0;
  for (const char* id : {"mill-2", "mill-5", "mill-7"}) {
    const GeoPoint p = c.find_poi(id)->location;
    trace.push_back({t += 10, offset_m(p, 6, 0), 3});
    trace.push_back({t += 10, offset_m(p, 60, 60), 3});
  }
  std::set<std::string> oracle;
  for (const auto& tp : trace) {
    for (const auto& poi : c.pois) {
      if (testing::law_of_cosines_distance(tp.location, poi.location) <= kDefaultArrivalM) oracle.insert(poi.id());
    }
  }
  const auto s = summarize(simulate(c, trace, {0.0, kDefaultArrivalM}), kDefaultArrivalM, c.pois.size());
  EXPECT_EQ(s.pois_visited.size(), 3u);
  EXPECT_EQ(std::set<std::string>(s.pois_visited.begin(), s.pois_visited.end()), oracle);
  EXPECT_EQ(s.pois_total, 8u);
  const auto j = to_json(s);
  EXPECT_EQ(j["pois_total"], 8);
}

TEST(Summarize, PathLengthIsSumOfHops) {
  const auto c = reference();
  const auto trace = parse_trace(fixture("walk.csv"));
  const auto s = summarize(simulate(c, trace));
  double sum = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) sum += testing::chord_distance(trace[i - 1].location, trace[i].location);
  EXPECT_NEAR(s.path_length_m, sum, 1e-3);
  EXPECT_EQ(s.duration_s, trace.back().t - trace.front().t);
  std::set<std::string> ids;
  for (const auto& p : c.pois) ids.insert(p.id());
  for (const auto& v : s.pois_visited) EXPECT_TRUE(ids.contains(v));
}

}  // namespace
}  // namespace trailpack
