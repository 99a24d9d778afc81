#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mindless/analytics/intervals.hpp"
#include "mindless/control/router.hpp"
#include "mindless/sensor/calibration.hpp"
#include "mindless/sensor/head_pose.hpp"

namespace mindless::cli {

using Path = std::filesystem::path;

/// Bad flag value; exit code 1 like a parse failure.
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Entry point shared by the `mindless` binary and in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// ---- perturb ---------------------------------------------------------------

struct PerturbOptions {
  Path in;
  Path out;
  std::string pattern = "volume_halve";
  double toggle = 3.0;
  std::string active;
};

/// "a-b,c-d" in seconds; sorted, non-overlapping (touching is allowed).
std::vector<std::pair<double, double>> parse_windows(const std::string& spec);
void perturb(const PerturbOptions& o);

// ---- serve -----------------------------------------------------------------

struct ServeOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
  std::string mode = "auto";
  std::vector<std::string> parts = {"mindless", "alerting", "control"};
  double part_duration = 600.0;
  std::uint64_t seed = 1;
  bool blinded = false;
  bool shuffle = false;
  double time_scale = 1.0;
  std::string session_id;
  std::optional<Path> profile;
  std::optional<Path> log_dir;
  /// Called with the bound port before serving starts.
  std::function<void(unsigned short)> on_listening;
};

std::vector<sched::Mode> parse_modes(const std::vector<std::string>& names);
/// Parts in run order: part ids follow position, modes follow the seeded
/// shuffle when requested.
std::vector<control::PartSpec> build_parts(const std::vector<sched::Mode>& modes, double duration,
                                           bool shuffle, std::uint64_t seed);
control::RouterConfig router_config(const ServeOptions& o);
/// --log-dir, then $MINDLESS_LOG_DIR, then the working directory.
Path resolve_log_dir(const std::optional<Path>& flag);
int serve(const ServeOptions& o, std::ostream& out);

// ---- sense / calibrate -----------------------------------------------------

struct SenseOptions {
  Path landmarks;
  Path profile;
  double fps = 15.0;
  int debounce = 3;
  Path out;
};

/// Head pose per frame; frames the solver rejects come back empty.
std::vector<std::optional<sensor::HeadPose>> solve_frames(
    const std::vector<sensor::LandmarkFrame>& frames);
analytics::IntervalTrack sense_track(const std::vector<sensor::LandmarkFrame>& frames,
                                     const sensor::CalibrationProfile& profile, double fps,
                                     int debounce);
void sense(const SenseOptions& o);

struct CalibrateOptions {
  Path landmarks;
  Path out;
};
sensor::CalibrationProfile calibrate(const CalibrateOptions& o);

// ---- analyze ---------------------------------------------------------------

struct AnalyzeOptions {
  std::vector<Path> events;
  std::vector<Path> detections;
  Path report;
  std::optional<Path> scores;
  std::optional<Path> text;
  std::optional<Path> svg;
};
void analyze(const AnalyzeOptions& o);

// ---- agents ----------------------------------------------------------------

struct AgentOptions {
  std::string role;
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
  double time_scale = 1.0;
  std::optional<Path> landmarks;              // sensor: session stream
  std::optional<Path> calibration_landmarks;  // sensor: edge sweep
  std::optional<Path> annotations;            // console: scripted marks
  std::optional<Path> transcript;             // every received frame
  bool calibrate = false;                     // console requests a calibration
  int debounce = 3;
  double timeout = 600.0;                     // wall seconds
};
int agent(const AgentOptions& o, std::ostream& out);

struct ClientOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
};
/// Live audio client: 16 kHz PCM16 mono on stdin, perturbed PCM16 on stdout.
int client(const ClientOptions& o, std::istream& in, std::ostream& out);

} // namespace mindless::cli
