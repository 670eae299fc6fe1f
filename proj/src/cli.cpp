#include "trailpack/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "trailpack/config_model.hpp"
#include "trailpack/error.hpp"
#include "trailpack/guidance_sim.hpp"
#include "trailpack/http_fetcher.hpp"
#include "trailpack/provisioning.hpp"
#include "trailpack/schema_registry.hpp"
#include "trailpack/url.hpp"

namespace trailpack::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSynopsis =
    "usage: trailpack [--offline] [--json] <command> ...\n"
    "  validate <file> [--schema <file>]\n"
    "  schema export [--schema <file>]\n"
    "  fetch <url> -o <file>\n"
    "  bundle build <file|url> -d <dir> [--schema <file>]\n"
    "  bundle verify <dir>\n"
    "  qr encode <url> [--poi <id> --lat <v> --lon <v>]\n"
    "  qr decode <text>\n"
    "  simulate --bundle <dir> --trace <csv> [--margin m] [--arrival m] [-o <file>]\n"
    "  locate --bundle <dir> --lat <v> --lon <v> [--accuracy m] [--preview-cap n]\n"
    "  summary --events <ndjson> [--bundle <dir>] [--arrival m]\n";

bool truthy(std::string value) {
  std::transform(value.begin(), value.end(), value.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return value == "1" || value == "true" || value == "yes" || value == "on";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, path, fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_text(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, path, fmt::format("cannot write {}", path));
}

ExitStatus status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NetworkUnavailable:
    case ErrorCode::HttpStatus:
    case ErrorCode::TooLarge:
    case ErrorCode::IoFailure:
    case ErrorCode::NotABundle:
    case ErrorCode::DestinationNotEmpty:
      return ExitStatus::Failure;
    default:
      return ExitStatus::Findings;
  }
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err, const Environment& env, bool json)
      : out_(out), err_(err), env_(env), json_(json) {}

  void print(const ValidationReport& report, std::string_view subject) {
    if (json_) {
      out_ << to_json(report).dump() << '\n';
      return;
    }
    auto line = [&](std::string_view severity, const Finding& f) {
      err_ << severity << ": ";
      if (!f.path.empty()) err_ << f.path << ": ";
      err_ << f.code << ": " << f.message << '\n';
    };
    for (const auto& f : report.errors) line("error", f);
    for (const auto& f : report.warnings) line("warning", f);
    err_ << fmt::format("{}: {} error(s), {} warning(s)\n", subject, report.errors.size(),
                        report.warnings.size());
  }

  ExitStatus fail(const Error& e) {
    if (json_ && status_for(e.code()) == ExitStatus::Findings) {
      ValidationReport r;
      r.errors.push_back({e.subject(), std::string(to_string(e.code())), e.what()});
      print(r, "");
    } else {
      err_ << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    }
    return status_for(e.code());
  }

  SchemaDescriptor descriptor(const std::string& flag) {
    std::string path = flag;
    if (path.empty()) {
      if (auto env = env_.getenv("TRAILPACK_SCHEMA")) path = *env;
    }
    if (path.empty()) return default_descriptor();
    return load_descriptor(read_text(path));
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  const Environment& env_;
  bool json_;
};

}  // namespace

Environment process_environment() {
  Environment env;
  env.getenv = [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
  env.make_fetcher = [](bool offline) -> std::unique_ptr<Fetcher> {
    if (offline) return std::make_unique<OfflineFetcher>();
    return std::make_unique<HttpFetcher>();
  };
  return env;
}

ExitStatus run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const Environment& env) {
  CLI::App app{"Offline geotour configuration toolchain", "trailpack"};
  app.require_subcommand(1);
  bool offline_flag = false;
  bool json = false;
  app.add_flag("--offline", offline_flag, "Refuse all network access");
  app.add_flag("--json", json, "Structured findings on standard output");

  std::string schema_path;

  auto* validate_cmd = app.add_subcommand("validate", "Validate a tour document");
  std::string validate_file;
  validate_cmd->add_option("file", validate_file)->required();
  validate_cmd->add_option("--schema", schema_path, "Descriptor file");

  auto* schema_cmd = app.add_subcommand("schema", "Descriptor utilities");
  schema_cmd->require_subcommand(1);
  auto* schema_export = schema_cmd->add_subcommand("export", "Print the active descriptor");
  schema_export->add_option("--schema", schema_path, "Descriptor file");

  auto* fetch_cmd = app.add_subcommand("fetch", "Download a tour document");
  std::string fetch_url;
  std::string fetch_out;
  fetch_cmd->add_option("url", fetch_url)->required();
  fetch_cmd->add_option("-o,--output", fetch_out)->required();

  auto* bundle_cmd = app.add_subcommand("bundle", "Offline bundles");
  bundle_cmd->require_subcommand(1);
  auto* bundle_build = bundle_cmd->add_subcommand("build", "Provision a bundle");
  std::string build_source;
  std::string build_dest;
  bundle_build->add_option("source", build_source, "Tour file or URL")->required();
  bundle_build->add_option("-d,--dest", build_dest, "Destination directory")->required();
  bundle_build->add_option("--schema", schema_path, "Descriptor file");
  auto* bundle_verify = bundle_cmd->add_subcommand("verify", "Re-check bundle digests");
  std::string verify_dir;
  bundle_verify->add_option("dir", verify_dir)->required();

  auto* qr_cmd = app.add_subcommand("qr", "QR payload strings");
  qr_cmd->require_subcommand(1);
  auto* qr_encode = qr_cmd->add_subcommand("encode", "Bootstrap or location-marker payload");
  std::string qr_url;
  std::optional<std::string> qr_poi;
  std::optional<double> qr_lat;
  std::optional<double> qr_lon;
  qr_encode->add_option("url", qr_url)->required();
  qr_encode->add_option("--poi", qr_poi);
  qr_encode->add_option("--lat", qr_lat);
  qr_encode->add_option("--lon", qr_lon);
  auto* qr_decode = qr_cmd->add_subcommand("decode", "Decode a scanned payload");
  std::string qr_text;
  qr_decode->add_option("text", qr_text)->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Replay a trace against a bundle");
  std::string sim_bundle;
  std::string sim_trace;
  std::string sim_output;
  double margin = kDefaultMarginM;
  double arrival = kDefaultArrivalM;
  sim_cmd->add_option("--bundle", sim_bundle)->required();
  sim_cmd->add_option("--trace", sim_trace)->required();
  sim_cmd->add_option("--margin", margin)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--arrival", arrival)->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("-o,--output", sim_output);

  auto* locate_cmd = app.add_subcommand("locate", "Screen for a manually entered position");
  std::string locate_bundle;
  double locate_lat = 0.0;
  double locate_lon = 0.0;
  double locate_accuracy = 10.0;
  std::size_t preview_cap = kDefaultPreviewCap;
  locate_cmd->add_option("--bundle", locate_bundle)->required();
  locate_cmd->add_option("--lat", locate_lat)->required()->check(CLI::Range(-90.0, 90.0));
  locate_cmd->add_option("--lon", locate_lon)->required()->check(CLI::Range(-180.0, 180.0));
  locate_cmd->add_option("--accuracy", locate_accuracy)->check(CLI::PositiveNumber);
  locate_cmd->add_option("--preview-cap", preview_cap)->check(CLI::Range(std::size_t{8}, std::size_t{100000}));

  auto* summary_cmd = app.add_subcommand("summary", "Summarize a simulation");
  std::string summary_events;
  std::string summary_bundle;
  double summary_arrival = kDefaultArrivalM;
  summary_cmd->add_option("--events", summary_events)->required();
  summary_cmd->add_option("--bundle", summary_bundle);
  summary_cmd->add_option("--arrival", summary_arrival)->check(CLI::NonNegativeNumber);

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();
  for (auto* sub : {schema_export, bundle_build, bundle_verify, qr_encode, qr_decode}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitStatus::Success;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitStatus::Success;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << kSynopsis;
    return ExitStatus::Usage;
  }

  bool offline = offline_flag;
  if (!offline) {
    if (auto v = env.getenv("TRAILPACK_OFFLINE")) offline = truthy(*v);
  }

  Runner runner(out, err, env, json);
  try {
    if (*validate_cmd) {
      const auto descriptor = runner.descriptor(schema_path);
      const auto report = validate_document(read_text(validate_file), descriptor);
      runner.print(report, validate_file);
      return report.valid() ? ExitStatus::Success : ExitStatus::Findings;
    }

    if (*schema_export) {
      out << serialize_descriptor(runner.descriptor(schema_path));
      return ExitStatus::Success;
    }

    if (*fetch_cmd) {
      if (!url::is_absolute_http(fetch_url)) {
        err << "error: NotAUrl: '" << fetch_url << "' is not an absolute http(s) URL\n" << kSynopsis;
        return ExitStatus::Usage;
      }
      auto fetcher = env.make_fetcher(offline);
      const auto body = fetch_collection(fetch_url, *fetcher);
      write_text(fetch_out, body);
      err << fmt::format("fetched {} bytes into {}\n", body.size(), fetch_out);
      return ExitStatus::Success;
    }

    if (*bundle_build) {
      const auto descriptor = runner.descriptor(schema_path);
      auto fetcher = env.make_fetcher(offline);
      std::string doc;
      std::string origin;
      if (url::is_absolute_http(build_source)) {
        doc = fetch_collection(build_source, *fetcher);
        origin = build_source;
      } else {
        doc = read_text(build_source);
        origin = "file://" + fs::absolute(build_source).lexically_normal().string();
      }
      BuildOptions options;
      options.descriptor = &descriptor;
      Bundle bundle;
      try {
        bundle = build_bundle(doc, origin, *fetcher, build_dest, options);
      } catch (const ValidationFailedError& e) {
        runner.print(e.report(), build_source);
        return ExitStatus::Findings;
      }
      nlohmann::ordered_json summary;
      summary["bundle"] = build_dest;
      summary["pois"] = bundle.collection.pois.size();
      summary["assets"] = bundle.assets.size();
      summary["failures"] = nlohmann::ordered_json::object();
      for (const auto& [id, failure] : bundle.failures) {
        summary["failures"][id] = failure.reason;
        err << fmt::format("warning: image for '{}' not cached ({}); the POI will show text only\n",
                           id, failure.reason);
      }
      out << summary.dump() << '\n';
      return ExitStatus::Success;
    }

    if (*bundle_verify) {
      const auto bundle = open_bundle(verify_dir);
      const auto report = verify_bundle(bundle);
      runner.print(report, verify_dir);
      return report.valid() ? ExitStatus::Success : ExitStatus::Findings;
    }

    if (*qr_encode) {
      const int marker_args = qr_poi.has_value() + qr_lat.has_value() + qr_lon.has_value();
      if (marker_args == 0) {
        out << encode_bootstrap(qr_url) << '\n';
      } else if (marker_args == 3) {
        out << encode_location_marker(qr_url, *qr_poi, GeoPoint{*qr_lon, *qr_lat}) << '\n';
      } else {
        err << "error: --poi, --lat and --lon must be given together\n" << kSynopsis;
        return ExitStatus::Usage;
      }
      return ExitStatus::Success;
    }

    if (*qr_decode) {
      const auto payload = decode_qr_payload(qr_text);
      nlohmann::ordered_json j;
      if (const auto* b = std::get_if<BootstrapPayload>(&payload)) {
        j["kind"] = "bootstrap";
        j["url"] = b->url;
      } else {
        const auto& m = std::get<LocationMarker>(payload);
        j["kind"] = "location_marker";
        j["url"] = m.url;
        j["poi"] = m.poi_id;
        j["lat"] = m.location.lat;
        j["lon"] = m.location.lon;
        j["accuracy_m"] = kMarkerAccuracyM;
      }
      out << j.dump() << '\n';
      return ExitStatus::Success;
    }

    if (*sim_cmd) {
      const auto bundle = open_bundle(sim_bundle);
      const auto trace = parse_trace(read_text(sim_trace));
      const auto events = simulate(bundle, trace, SimParams{margin, arrival});
      const auto ndjson = write_events(events);
      if (sim_output.empty()) {
        out << ndjson;
      } else {
        write_text(sim_output, ndjson);
      }
      return ExitStatus::Success;
    }

    if (*locate_cmd) {
      const auto bundle = open_bundle(locate_bundle);
      const GpsFix fix{0.0, GeoPoint{locate_lon, locate_lat}, locate_accuracy, FixSource::Manual};
      const auto state = select_highlight(HighlightState{}, fix, bundle.collection);
      out << to_json(render_screen_state(bundle, fix, state, preview_cap)).dump() << '\n';
      return ExitStatus::Success;
    }

    if (*summary_cmd) {
      const auto events = parse_events(read_text(summary_events));
      std::optional<std::size_t> total;
      if (!summary_bundle.empty()) total = open_bundle(summary_bundle).collection.pois.size();
      out << to_json(summarize(events, summary_arrival, total)).dump() << '\n';
      return ExitStatus::Success;
    }
  } catch (const Error& e) {
    return runner.fail(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitStatus::Failure;
  }

  err << kSynopsis;
  return ExitStatus::Usage;
}

}  // namespace trailpack::cli
