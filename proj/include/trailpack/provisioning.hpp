#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "trailpack/config_model.hpp"
#include "trailpack/error.hpp"
#include "trailpack/geo_engine.hpp"
#include "trailpack/report.hpp"
#include "trailpack/schema_registry.hpp"

namespace trailpack {

// ---------------------------------------------------------------------------
// QR payloads
//
//   <abs-url>                                   bootstrap
//   <abs-url>?poi=<id>&lat=<decimal>&lon=<decimal>  location marker
//
// Parameter order is free and other parameters may appear alongside. A
// marker needs all three of poi/lat/lon exactly once.
// ---------------------------------------------------------------------------

struct BootstrapPayload {
  std::string url;
  bool operator==(const BootstrapPayload&) const = default;
};

struct LocationMarker {
  /// The full scanned string; it still bootstraps the tour it points at.
  std::string url;
  std::string poi_id;
  GeoPoint location;
  bool operator==(const LocationMarker&) const = default;
};

using QrPayload = std::variant<BootstrapPayload, LocationMarker>;

/// Accuracy assigned to fixes taken from a scanned location marker.
inline constexpr double kMarkerAccuracyM = 2.0;

/// Throws Error with NotAUrl, IncompleteMarker or InvalidCoordinate.
QrPayload decode_qr_payload(std::string_view text);

/// Returns the string to print or type in. Throws Error{NotAUrl} for
/// anything but an absolute http(s) URL, including URLs that carry any of
/// the marker parameters (they would not decode back to a bootstrap).
std::string encode_bootstrap(std::string_view url);

/// Appends poi/lat/lon to `base_url`. Throws NotAUrl, IncompleteMarker (bad
/// id) or InvalidCoordinate.
std::string encode_location_marker(std::string_view base_url, std::string_view poi_id,
                                   const GeoPoint& location);

GpsFix fix_from_marker(const LocationMarker& marker, double t);

// ---------------------------------------------------------------------------
// Network access is an injected capability.
// ---------------------------------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string content_type;
};

/// Retrieves URLs. Implementations throw Error{NetworkUnavailable} when the
/// transport fails and must tolerate concurrent get() calls (build_bundle
/// fetches images in parallel).
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual HttpResponse get(const std::string& url) = 0;
  /// False for fetchers that refuse every request; lets callers fail fast.
  virtual bool online() const { return true; }
};

/// Refuses every request with NetworkUnavailable.
class OfflineFetcher final : public Fetcher {
 public:
  HttpResponse get(const std::string& url) override;
  bool online() const override { return false; }
};

inline constexpr std::size_t kDefaultMaxBytes = std::size_t{10} * 1024 * 1024;

/// Body of `url` on status 200. Throws Error with NotAUrl,
/// NetworkUnavailable, HttpStatus(code) or TooLarge.
std::string fetch_collection(std::string_view url, Fetcher& fetcher,
                             std::size_t max_bytes = kDefaultMaxBytes);

// ---------------------------------------------------------------------------
// Bundles
//
//   <dir>/collection.geojson     canonical serialization of the tour
//   <dir>/assets/<poi_id>.<ext>  cached POI images
//   <dir>/manifest.json          digests, asset map, fetch failures
// ---------------------------------------------------------------------------

struct FetchFailure {
  std::string url;
  std::string reason;
  bool operator==(const FetchFailure&) const = default;
};

/// An offline tour. Never modified after build_bundle; replacing the content
/// means deleting the directory and provisioning again.
struct Bundle {
  std::filesystem::path root;
  TourCollection collection;
  /// poi_id -> bundle-relative asset path.
  std::map<std::string, std::string> assets;
  /// bundle-relative path -> lowercase hex SHA-256.
  std::map<std::string, std::string> manifest;
  /// poi_id -> why its image is not cached.
  std::map<std::string, FetchFailure> failures;
  std::int64_t created_t = 0;
  std::string origin_url;

  /// Bundle-relative asset path of a POI's image, if cached.
  std::optional<std::string> asset_for(std::string_view poi_id) const;
};

struct BuildOptions {
  /// Descriptor the document must satisfy; the built-in one when null.
  const SchemaDescriptor* descriptor = nullptr;
  std::size_t parallelism = 4;
  std::size_t max_image_bytes = kDefaultMaxBytes;
  /// Creation timestamp (seconds since epoch); the current time when unset.
  std::optional<std::int64_t> created_t;
};

/// Validates `doc`, caches every POI image through `fetcher` and writes the
/// bundle into `dest` (absent or empty). Image failures are recorded, not
/// fatal. Throws ValidationFailedError, Error{DestinationNotEmpty},
/// Error{IoFailure} or, for a fetcher that is not online() while images are
/// pending, Error{NetworkUnavailable}.
Bundle build_bundle(std::string_view doc, std::string_view origin_url, Fetcher& fetcher,
                    const std::filesystem::path& dest, const BuildOptions& options = {});

struct OpenOptions {
  /// Re-hash every manifest entry and throw ManifestMismatch on the first
  /// finding.
  bool verify = false;
};

/// Loads a bundle without any network access. Throws Error{NotABundle} or,
/// when verifying, Error{ManifestMismatch}.
Bundle open_bundle(const std::filesystem::path& dir, const OpenOptions& options = {});

/// Re-hashes every manifest entry; reports ManifestMismatch and MissingFile
/// errors keyed by bundle-relative path.
ValidationReport verify_bundle(const Bundle& bundle);

std::string sha256_hex(std::string_view bytes);

/// Carries the findings that stopped build_bundle.
class ValidationFailedError : public Error {
 public:
  explicit ValidationFailedError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

}  // namespace trailpack
