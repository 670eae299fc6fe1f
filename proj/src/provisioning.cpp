#include "trailpack/provisioning.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <system_error>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "trailpack/url.hpp"

namespace trailpack {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kCollectionFile = "collection.geojson";
constexpr std::string_view kManifestFile = "manifest.json";
constexpr std::string_view kAssetsDir = "assets";
constexpr std::string_view kBundleFormat = "trailpack-bundle/1";

bool is_decimal(std::string_view s) {
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  const auto dot = s.find('.');
  const auto int_part = s.substr(0, dot);
  auto digits = [](std::string_view d) {
    return !d.empty() && std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (!digits(int_part)) return false;
  return dot == std::string_view::npos || digits(s.substr(dot + 1));
}

double parse_decimal(std::string_view s, std::string_view name) {
  double v = 0.0;
  if (is_decimal(s)) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  }
  throw Error(ErrorCode::InvalidCoordinate, std::string(name),
              fmt::format("'{}' is not a decimal {}", s, name));
}

// Plain decimal (no exponent) that parses back to exactly `v`.
std::string format_decimal(double v) {
  std::string s = fmt::format("{}", v);
  const auto e = s.find_first_of("eE");
  if (e == std::string::npos) return s;

  const bool negative = s.front() == '-';
  std::string mantissa = s.substr(negative ? 1 : 0, e - (negative ? 1 : 0));
  int exponent = std::stoi(s.substr(e + 1));
  std::string digits;
  int point = static_cast<int>(mantissa.find('.'));
  if (point < 0) point = static_cast<int>(mantissa.size());
  for (char c : mantissa) {
    if (c != '.') digits.push_back(c);
  }
  point += exponent;
  std::string out;
  if (point <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
  } else if (point >= static_cast<int>(digits.size())) {
    out = digits + std::string(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    out = digits.substr(0, static_cast<std::size_t>(point)) + "." +
          digits.substr(static_cast<std::size_t>(point));
  }
  return negative ? "-" + out : out;
}

bool is_marker_param(std::string_view key) { return key == "poi" || key == "lat" || key == "lon"; }

std::string read_file(const fs::path& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, path.string(), fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(code, path.string(), fmt::format("cannot read {}", path.string()));
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), fmt::format("cannot write {}", path.string()));
}

std::string image_extension(const std::string& image_url, const std::string& content_type) {
  static const std::set<std::string, std::less<>> kKnown = {"jpg",  "jpeg", "png", "gif", "webp",
                                                            "svg",  "bmp",  "tif", "tiff", "avif"};
  if (auto parsed = url::parse_absolute_http(image_url)) {
    auto ext = url::path_extension(*parsed);
    if (kKnown.contains(ext)) return ext;
  }
  const std::string_view type = std::string_view(content_type).substr(0, content_type.find(';'));
  if (type == "image/jpeg") return "jpg";
  if (type == "image/png") return "png";
  if (type == "image/gif") return "gif";
  if (type == "image/webp") return "webp";
  if (type == "image/svg+xml") return "svg";
  return "bin";
}

// Bundle-relative paths must stay inside the bundle.
bool safe_relative(std::string_view p) {
  if (p.empty() || p.front() == '/' || p.find('\\') != std::string_view::npos) return false;
  for (const auto& part : fs::path(p)) {
    if (part == ".." || part == ".") return false;
  }
  return true;
}

struct ImageJob {
  std::string poi_id;
  std::string url;
};

struct ImageResult {
  std::string bytes;
  std::string extension;
  std::optional<std::string> failure;
};

ImageResult fetch_image(const ImageJob& job, Fetcher& fetcher, std::size_t max_bytes) {
  ImageResult r;
  if (!url::is_absolute_http(job.url)) {
    r.failure = "not an absolute http(s) URL";
    return r;
  }
  try {
    HttpResponse resp = fetcher.get(job.url);
    if (resp.status != 200) {
      r.failure = fmt::format("HTTP {}", resp.status);
    } else if (resp.body.size() > max_bytes) {
      r.failure = fmt::format("image larger than {} bytes", max_bytes);
    } else {
      r.extension = image_extension(job.url, resp.content_type);
      r.bytes = std::move(resp.body);
    }
  } catch (const std::exception& e) {
    r.failure = e.what();
  }
  return r;
}

std::vector<ImageResult> fetch_images(const std::vector<ImageJob>& jobs, Fetcher& fetcher,
                                      const BuildOptions& options) {
  std::vector<ImageResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      results[i] = fetch_image(jobs[i], fetcher, options.max_image_bytes);
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(options.parallelism, 1), jobs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  return results;
}

[[noreturn]] void not_a_bundle(const fs::path& dir, std::string message) {
  throw Error(ErrorCode::NotABundle, dir.string(), std::move(message));
}

}  // namespace

// --- QR ---------------------------------------------------------------------

QrPayload decode_qr_payload(std::string_view text) {
  auto parsed = url::parse_absolute_http(text);
  if (!parsed) {
    throw Error(ErrorCode::NotAUrl, std::string(text), "payload is not an absolute http(s) URL");
  }
  if (!parsed->query) return BootstrapPayload{std::string(text)};

  auto params = url::query_params(*parsed->query);
  if (!params) throw Error(ErrorCode::NotAUrl, std::string(text), "broken percent escape in query");

  std::map<std::string, std::vector<std::string>> marker;
  for (auto& [key, value] : *params) {
    if (is_marker_param(key)) marker[key].push_back(value);
  }
  if (marker.empty()) return BootstrapPayload{std::string(text)};

  for (const auto& [key, values] : marker) {
    if (values.size() > 1) {
      throw Error(ErrorCode::IncompleteMarker, key,
                  fmt::format("marker parameter '{}' appears {} times", key, values.size()));
    }
  }
  for (const char* key : {"poi", "lat", "lon"}) {
    if (!marker.contains(key)) {
      throw Error(ErrorCode::IncompleteMarker, key,
                  fmt::format("location marker lacks the '{}' parameter", key));
    }
  }
  const std::string& poi = marker["poi"].front();
  if (!is_valid_poi_id(poi)) {
    throw Error(ErrorCode::IncompleteMarker, "poi", fmt::format("'{}' is not a valid POI id", poi));
  }
  GeoPoint location{parse_decimal(marker["lon"].front(), "lon"),
                    parse_decimal(marker["lat"].front(), "lat")};
  if (!location.valid()) {
    throw Error(ErrorCode::InvalidCoordinate, "lat/lon",
                fmt::format("marker position ({}, {}) is out of range", location.lat, location.lon));
  }
  return LocationMarker{std::string(text), poi, location};
}

std::string encode_bootstrap(std::string_view u) {
  auto parsed = url::parse_absolute_http(u);
  if (!parsed) throw Error(ErrorCode::NotAUrl, std::string(u), "not an absolute http(s) URL");
  if (parsed->query) {
    auto params = url::query_params(*parsed->query);
    if (!params) throw Error(ErrorCode::NotAUrl, std::string(u), "broken percent escape in query");
    for (const auto& [key, value] : *params) {
      if (is_marker_param(key)) {
        throw Error(ErrorCode::NotAUrl, std::string(u),
                    fmt::format("bootstrap URL must not carry the marker parameter '{}'", key));
      }
    }
  }
  return std::string(u);
}

std::string encode_location_marker(std::string_view base_url, std::string_view poi_id,
                                   const GeoPoint& location) {
  std::string base = encode_bootstrap(base_url);
  if (!is_valid_poi_id(poi_id)) {
    throw Error(ErrorCode::IncompleteMarker, "poi", fmt::format("'{}' is not a valid POI id", poi_id));
  }
  if (!location.valid()) {
    throw Error(ErrorCode::InvalidCoordinate, "lat/lon", "marker position is out of range");
  }
  std::string fragment;
  if (auto hash = base.find('#'); hash != std::string::npos) {
    fragment = base.substr(hash);
    base.resize(hash);
  }
  const char sep = base.find('?') == std::string::npos ? '?' : (base.back() == '?' ? '\0' : '&');
  std::string out = base;
  if (sep != '\0') out.push_back(sep);
  out += fmt::format("poi={}&lat={}&lon={}", url::percent_encode(poi_id), format_decimal(location.lat),
                     format_decimal(location.lon));
  return out + fragment;
}

GpsFix fix_from_marker(const LocationMarker& marker, double t) {
  return GpsFix{t, marker.location, kMarkerAccuracyM, FixSource::QrMarker};
}

// --- fetching ---------------------------------------------------------------

HttpResponse OfflineFetcher::get(const std::string& u) {
  throw Error(ErrorCode::NetworkUnavailable, u, "network access is disabled (offline mode)");
}

std::string fetch_collection(std::string_view u, Fetcher& fetcher, std::size_t max_bytes) {
  if (!url::is_absolute_http(u)) {
    throw Error(ErrorCode::NotAUrl, std::string(u), "not an absolute http(s) URL");
  }
  HttpResponse resp;
  try {
    resp = fetcher.get(std::string(u));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::NetworkUnavailable, std::string(u), e.what());
  }
  if (resp.status != 200) {
    throw Error(ErrorCode::HttpStatus, std::string(u), fmt::format("HTTP status {}", resp.status),
                resp.status);
  }
  if (resp.body.size() > max_bytes) {
    throw Error(ErrorCode::TooLarge, std::string(u),
                fmt::format("response of {} bytes exceeds the {} byte cap", resp.body.size(), max_bytes),
                static_cast<std::int64_t>(resp.body.size()));
  }
  return std::move(resp.body);
}

// --- bundles ----------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::optional<std::string> Bundle::asset_for(std::string_view poi_id) const {
  auto it = assets.find(std::string(poi_id));
  if (it == assets.end()) return std::nullopt;
  return it->second;
}

ValidationFailedError::ValidationFailedError(ValidationReport report)
    : Error(ErrorCode::ValidationFailed, report.errors.empty() ? "" : report.errors.front().path,
            fmt::format("document failed validation with {} error(s)", report.errors.size())),
      report_(std::move(report)) {}

Bundle build_bundle(std::string_view doc, std::string_view origin_url, Fetcher& fetcher,
                    const fs::path& dest, const BuildOptions& options) {
  std::error_code ec;
  if (fs::exists(dest, ec)) {
    if (!fs::is_directory(dest, ec) || !fs::is_empty(dest, ec)) {
      throw Error(ErrorCode::DestinationNotEmpty, dest.string(),
                  "bundle destination exists and is not empty; delete it to re-provision");
    }
  }

  const SchemaDescriptor& descriptor = options.descriptor ? *options.descriptor : default_descriptor();
  ValidationReport report = validate_document(doc, descriptor);
  if (!report.valid()) throw ValidationFailedError(std::move(report));

  ParseOptions parse_options;
  parse_options.known_properties = descriptor.known_properties();
  TourCollection collection = parse_collection(doc, parse_options).collection;
  std::string canonical;
  try {
    canonical = serialize_collection(collection);
  } catch (const Error& e) {
    ValidationReport r;
    r.errors.push_back({e.subject(), std::string(to_string(e.code())), e.what()});
    throw ValidationFailedError(std::move(r));
  }

  std::vector<ImageJob> jobs;
  for (const auto& poi : collection.pois) {
    if (auto img = poi.image_url()) jobs.push_back({poi.id(), *img});
  }
  if (!jobs.empty() && !fetcher.online()) {
    throw Error(ErrorCode::NetworkUnavailable, std::string(origin_url),
                fmt::format("{} image(s) need fetching but network access is disabled", jobs.size()));
  }
  std::vector<ImageResult> images = fetch_images(jobs, fetcher, options);

  Bundle bundle;
  bundle.root = dest;
  bundle.origin_url = std::string(origin_url);
  bundle.created_t = options.created_t.value_or(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());

  fs::create_directories(dest / kAssetsDir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, (dest / kAssetsDir).string(), ec.message());

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (images[i].failure) {
      bundle.failures[jobs[i].poi_id] = {jobs[i].url, *images[i].failure};
      continue;
    }
    const std::string rel = fmt::format("{}/{}.{}", kAssetsDir, jobs[i].poi_id, images[i].extension);
    write_file(dest / rel, images[i].bytes);
    bundle.assets[jobs[i].poi_id] = rel;
    bundle.manifest[rel] = sha256_hex(images[i].bytes);
  }
  write_file(dest / kCollectionFile, canonical);
  bundle.manifest[std::string(kCollectionFile)] = sha256_hex(canonical);
  bundle.collection = parse_collection(canonical, parse_options).collection;

  json manifest;
  manifest["format"] = kBundleFormat;
  manifest["origin_url"] = bundle.origin_url;
  manifest["created_t"] = bundle.created_t;
  manifest["files"] = bundle.manifest;
  manifest["assets"] = bundle.assets;
  manifest["failures"] = json::object();
  for (const auto& [id, failure] : bundle.failures) {
    manifest["failures"][id] = {{"url", failure.url}, {"reason", failure.reason}};
  }
  write_file(dest / kManifestFile, manifest.dump(2) + "\n");
  return bundle;
}

Bundle open_bundle(const fs::path& dir, const OpenOptions& options) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) not_a_bundle(dir, "not a directory");
  if (!fs::is_regular_file(dir / kManifestFile, ec)) not_a_bundle(dir, "manifest.json is missing");
  if (!fs::is_regular_file(dir / kCollectionFile, ec)) not_a_bundle(dir, "collection.geojson is missing");

  json manifest;
  try {
    manifest = json::parse(read_file(dir / kManifestFile, ErrorCode::NotABundle));
  } catch (const json::exception& e) {
    not_a_bundle(dir, fmt::format("manifest.json is malformed: {}", e.what()));
  }

  Bundle bundle;
  bundle.root = dir;
  try {
    if (manifest.at("format") != kBundleFormat) not_a_bundle(dir, "unknown bundle format");
    bundle.origin_url = manifest.at("origin_url").get<std::string>();
    bundle.created_t = manifest.at("created_t").get<std::int64_t>();
    bundle.manifest = manifest.at("files").get<std::map<std::string, std::string>>();
    bundle.assets = manifest.at("assets").get<std::map<std::string, std::string>>();
    for (auto& [id, f] : manifest.at("failures").items()) {
      bundle.failures[id] = {f.at("url").get<std::string>(), f.at("reason").get<std::string>()};
    }
  } catch (const json::exception& e) {
    not_a_bundle(dir, fmt::format("manifest.json is malformed: {}", e.what()));
  }
  for (const auto& [path, digest] : bundle.manifest) {
    if (!safe_relative(path)) not_a_bundle(dir, fmt::format("manifest path '{}' escapes the bundle", path));
  }
  for (const auto& [id, path] : bundle.assets) {
    if (!bundle.manifest.contains(path)) {
      not_a_bundle(dir, fmt::format("asset '{}' is not listed in the manifest", path));
    }
  }

  try {
    bundle.collection = parse_collection(read_file(dir / kCollectionFile, ErrorCode::NotABundle)).collection;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotABundle) throw;
    not_a_bundle(dir, fmt::format("collection.geojson does not parse: {}", e.what()));
  }

  if (options.verify) {
    auto report = verify_bundle(bundle);
    if (!report.valid()) {
      const auto& first = report.errors.front();
      throw Error(ErrorCode::ManifestMismatch, first.path, first.message);
    }
  }
  return bundle;
}

ValidationReport verify_bundle(const Bundle& bundle) {
  ValidationReport report;
  for (const auto& [path, digest] : bundle.manifest) {
    const fs::path file = bundle.root / path;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) {
      report.errors.push_back({path, "MissingFile", "file listed in the manifest is missing"});
      continue;
    }
    std::string actual;
    try {
      actual = sha256_hex(read_file(file, ErrorCode::IoFailure));
    } catch (const Error& e) {
      report.errors.push_back({path, "MissingFile", e.what()});
      continue;
    }
    if (actual != digest) {
      report.errors.push_back(
          {path, "ManifestMismatch", fmt::format("SHA-256 is {}, manifest says {}", actual, digest)});
    }
  }
  return report;
}

}  // namespace trailpack
