#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trailpack {

enum class ErrorCode {
  // config_model
  NotUtf8,
  MalformedJson,
  NotFeatureCollection,
  NoPoiFeatures,
  DuplicatePoiId,
  InvalidCoordinate,
  InvariantViolation,
  // schema_registry
  MalformedDescriptor,
  DuplicateRule,
  UnknownKind,
  // geo_engine
  UndefinedBearing,
  StalePoi,
  // provisioning
  NotAUrl,
  IncompleteMarker,
  NetworkUnavailable,
  HttpStatus,
  TooLarge,
  ValidationFailed,
  DestinationNotEmpty,
  IoFailure,
  NotABundle,
  ManifestMismatch,
  // guidance_sim
  MalformedLine,
  NonMonotonicTime,
  EmptyCollection,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Failure raised by every trailpack operation that cannot produce a result.
///
/// `subject()` names what the failure is about: a document path such as
/// `features[3].geometry`, a POI id, a URL or a file path. `number()` carries
/// the numeric detail of codes that have one (1-based byte position for MalformedJson,
/// HTTP status for HttpStatus, 1-based line for trace errors).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, std::string message,
        std::optional<std::int64_t> number = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::int64_t> number() const noexcept { return number_; }

 private:
  ErrorCode code_;
  std::string subject_;
  std::optional<std::int64_t> number_;
};

}  // namespace trailpack
