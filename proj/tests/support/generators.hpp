#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "trailpack/config_model.hpp"
#include "trailpack/guidance_sim.hpp"

namespace trailpack::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::string random_word(Rng& rng, int min_len = 1, int max_len = 12) {
  static const std::vector<std::string> kLetters = {"a", "b", "c", "d", "e", "f", "g", "i", "l", "m",
                                                    "n", "o", "p", "r", "s", "t", "u", "v", "z", "\xC3\xA0",
                                                    "\xC3\xA8", "\xC3\xB9", "\xC3\xBC", "\xE2\x82\xAC"};
  std::string w;
  const int len = uniform_int(rng, min_len, max_len);
  for (int i = 0; i < len; ++i) w += kLetters[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(kLetters.size()) - 1))];
  return w;
}

/// Words separated by runs of mixed whitespace.
inline std::string random_text(Rng& rng, int words) {
  static const std::vector<std::string> kSpaces = {" ", " ", " ", "  ", "\n", "\t", " \n "};
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i > 0) s += kSpaces[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(kSpaces.size()) - 1))];
    s += random_word(rng);
  }
  return s;
}

inline std::string words(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
  return s;
}

inline nlohmann::json random_json_value(Rng& rng, int depth = 0) {
  switch (uniform_int(rng, 0, depth > 1 ? 4 : 6)) {
    case 0: return uniform_int(rng, -1000000, 1000000);
    case 1: return uniform(rng, -1e6, 1e6);
    case 2: return random_word(rng);
    case 3: return uniform_int(rng, 0, 1) == 1;
    case 4: return nullptr;
    case 5: {
      nlohmann::json arr = nlohmann::json::array();
      for (int i = uniform_int(rng, 0, 3); i > 0; --i) arr.push_back(random_json_value(rng, depth + 1));
      return arr;
    }
    default: {
      nlohmann::json obj = nlohmann::json::object();
      for (int i = uniform_int(rng, 0, 3); i > 0; --i) obj["k" + random_word(rng, 1, 4)] = random_json_value(rng, depth + 1);
      return obj;
    }
  }
}

inline GeoPoint random_point(Rng& rng) {
  switch (uniform_int(rng, 0, 9)) {
    case 0: return {180.0, uniform(rng, -90, 90)};
    case 1: return {uniform(rng, -180, 180), -90.0};
    default: return {uniform(rng, -180, 180), uniform(rng, -90, 90)};
  }
}

/// A collection satisfying every type invariant, with unknown properties and
/// foreign members sprinkled in.
inline TourCollection random_collection(Rng& rng) {
  TourCollection c;
  c.meta = make_meta("Tour " + random_word(rng), std::to_string(uniform_int(rng, 1, 9)) + ".0", "it",
                     uniform_int(rng, 0, 1) ? std::optional<std::string>(random_text(rng, 12)) : std::nullopt);
  if (uniform_int(rng, 0, 2) == 0) c.meta.properties["x-" + random_word(rng, 2, 5)] = random_json_value(rng);
  if (uniform_int(rng, 0, 3) == 0) c.foreign["bbox"] = {-1.5, 2.25, 3, 4};

  std::set<std::string> ids;
  const int n = uniform_int(rng, 1, 12);
  while (static_cast<int>(ids.size()) < n) ids.insert("p" + std::to_string(uniform_int(rng, 0, 999)) + "-" + std::to_string(ids.size()));
  for (const auto& id : ids) {
    auto poi = make_poi(id, random_text(rng, uniform_int(rng, 1, 5)), random_text(rng, uniform_int(rng, 0, 60)),
                        "https://example.org/img/" + id + ".png", random_point(rng));
    if (uniform_int(rng, 0, 2) == 0) poi.properties["audio_" + random_word(rng, 1, 3)] = random_json_value(rng);
    if (uniform_int(rng, 0, 4) == 0) poi.foreign["id"] = id;
    c.pois.push_back(std::move(poi));
  }
  for (int t = uniform_int(rng, 0, 3); t > 0; --t) {
    std::vector<GeoPoint> pts;
    for (int k = uniform_int(rng, 2, 10); k > 0; --k) pts.push_back(random_point(rng));
    auto track = make_track(pts, uniform_int(rng, 0, 1) ? std::optional<std::string>(random_word(rng)) : std::nullopt);
    if (track.points.size() < 2) continue;
    c.tracks.push_back(std::move(track));
  }
  return c;
}

/// Two POIs 200 m apart on an east-west line; the fixes sit 100 m north of
/// their midpoint on the perpendicular bisector and alternate 3 m east and
/// 3 m west of it. Fix accuracy 1 m.
struct BisectorScenario {
  TourCollection collection;
  std::vector<TracePoint> trace;
};

inline BisectorScenario bisector_jitter(int fixes = 20) {
  const GeoPoint mid{10.6, 44.05};
  BisectorScenario s;
  s.collection.meta = make_meta("Bisector", "1", "en");
  s.collection.pois.push_back(make_poi("west", "West", "", "https://example.org/w.jpg", offset_m(mid, -100, 0)));
  s.collection.pois.push_back(make_poi("east", "East", "", "https://example.org/e.jpg", offset_m(mid, 100, 0)));
  const GeoPoint standing = offset_m(mid, 0, 100);
  for (int i = 0; i < fixes; ++i) {
    s.trace.push_back({static_cast<double>(i), offset_m(standing, i % 2 == 0 ? 3.0 : -3.0, 0), 1.0});
  }
  return s;
}

}  // namespace trailpack::testing
