#include "trailpack/error.hpp"

#include <utility>

#include "trailpack/report.hpp"

namespace trailpack {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotUtf8: return "NotUtf8";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::NotFeatureCollection: return "NotFeatureCollection";
    case ErrorCode::NoPoiFeatures: return "NoPoiFeatures";
    case ErrorCode::DuplicatePoiId: return "DuplicatePoiId";
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::MalformedDescriptor: return "MalformedDescriptor";
    case ErrorCode::DuplicateRule: return "DuplicateRule";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::UndefinedBearing: return "UndefinedBearing";
    case ErrorCode::StalePoi: return "StalePoi";
    case ErrorCode::NotAUrl: return "NotAUrl";
    case ErrorCode::IncompleteMarker: return "IncompleteMarker";
    case ErrorCode::NetworkUnavailable: return "NetworkUnavailable";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::DestinationNotEmpty: return "DestinationNotEmpty";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NotABundle: return "NotABundle";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::EmptyCollection: return "EmptyCollection";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string subject, std::string message,
             std::optional<std::int64_t> number)
    : std::runtime_error(std::move(message)),
      code_(code),
      subject_(std::move(subject)),
      number_(number) {}

nlohmann::ordered_json to_json(const Finding& f) {
  nlohmann::ordered_json j;
  j["path"] = f.path;
  j["code"] = f.code;
  j["message"] = f.message;
  return j;
}

nlohmann::ordered_json to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["valid"] = r.valid();
  j["errors"] = nlohmann::ordered_json::array();
  for (const auto& f : r.errors) j["errors"].push_back(to_json(f));
  j["warnings"] = nlohmann::ordered_json::array();
  for (const auto& f : r.warnings) j["warnings"].push_back(to_json(f));
  return j;
}

}  // namespace trailpack
