#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "mindless/error.hpp"
#include "mindless/sensor/head_pose.hpp"
#include "mindless/sensor/landmark_io.hpp"
#include "mindless/control/message.hpp"

namespace mindless::cli {

namespace {

using nlohmann::json;

struct Span {
  double start = 0.0;
  double end = 0.0;
};

enum class Gaze { Left, Right, Down };

struct OffScreen {
  Span span;
  Gaze gaze = Gaze::Left;
  double depth = 15.0;  // degrees beyond the on-screen edge
};

double quantize_up(double t, double fps) { return std::ceil(t * fps - 1e-9) / fps; }
double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

std::size_t mode_slot(sched::Mode m) { return static_cast<std::size_t>(m); }

class Generator {
public:
  Generator(const SimulationParams& p) : p_(p), rng_(p.seed) {}

  std::vector<control::PartSpec> parts() {
    std::vector<std::size_t> order(p_.modes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (p_.shuffle) order = control::part_order(p_.seed, p_.modes.size());
    std::vector<control::PartSpec> out;
    for (std::size_t i = 0; i < order.size(); ++i)
      out.push_back({"part" + std::to_string(i + 1), p_.modes[order[i]], p_.part_duration});
    return out;
  }

  // Renewal process of true distractions, never crossing a part boundary.
  std::vector<Span> distractions(const std::vector<control::PartSpec>& parts) {
    std::exponential_distribution<double> gap(1.0 / std::max(1e-9, p_.mean_attentive_gap - p_.min_attentive_gap));
    std::gamma_distribution<double> length(2.0, p_.mean_distraction / 2.0);
    std::vector<Span> out;
    double part_start = 0.0;
    for (const auto& part : parts) {
      const double part_end = part_start + part.duration;
      const double scale = p_.distraction_scale[mode_slot(part.mode)];
      double t = part_start;
      while (true) {
        const double start = t + p_.min_attentive_gap + gap(rng_);
        const double len = std::max(p_.min_distraction, length(rng_) * scale);
        if (start + len > part_end - p_.min_attentive_gap) break;
        out.push_back({round_ms(start), round_ms(start + len)});
        t = start + len;
      }
      part_start = part_end;
    }
    return out;
  }

  // Off-screen head poses: detected distractions plus false alarms sized so
  // that detected-distracted time has the requested precision.
  std::vector<OffScreen> off_screen(const std::vector<Span>& truth, double total) {
    std::bernoulli_distribution detect(p_.recall);
    std::uniform_int_distribution<int> gaze(0, 2);
    std::uniform_real_distribution<double> depth(10.0, 25.0);
    std::vector<OffScreen> out;
    double true_positive = 0.0;
    for (const auto& s : truth) {
      if (!detect(rng_)) continue;
      out.push_back({s, static_cast<Gaze>(gaze(rng_)), depth(rng_)});
      true_positive += s.end - s.start;
    }

    // Attentive gaps with a one-second margin on either side.
    std::vector<Span> gaps;
    double cursor = 0.0;
    for (const auto& s : truth) {
      if (s.start - cursor > 2.5) gaps.push_back({cursor + 1.0, s.start - 1.0});
      cursor = s.end;
    }
    if (total - cursor > 2.5) gaps.push_back({cursor + 1.0, total - 1.0});

    double budget = p_.precision > 0.0 ? true_positive * (1.0 - p_.precision) / p_.precision : 0.0;
    std::uniform_real_distribution<double> weight(0.5, 1.5), unit(0.0, 1.0);
    std::vector<double> w(gaps.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) wsum += w[i] = (gaps[i].end - gaps[i].start) * weight(rng_);
    std::vector<double> alloc(gaps.size(), 0.0);
    // Proportional allocation, re-spreading whatever a full gap cannot take.
    for (int pass = 0; pass < 8 && budget > 1e-9 && wsum > 0.0; ++pass) {
      double spill = 0.0, next_wsum = 0.0;
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double cap = gaps[i].end - gaps[i].start - alloc[i];
        const double want = budget * w[i] / wsum;
        const double take = std::min(cap, want);
        alloc[i] += take;
        spill += want - take;
        if (cap - take <= 1e-9) w[i] = 0.0;
        next_wsum += w[i];
      }
      budget = spill;
      wsum = next_wsum;
    }
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      const double len = alloc[i];
      if (len < 0.2) continue;
      const double room = gaps[i].end - gaps[i].start - len;
      const double start = round_ms(gaps[i].start + room * unit(rng_));
      out.push_back({{start, round_ms(start + len)}, static_cast<Gaze>(gaze(rng_)), depth(rng_)});
    }
    std::sort(out.begin(), out.end(),
              [](const OffScreen& a, const OffScreen& b) { return a.span.start < b.span.start; });
    return out;
  }

  sensor::LandmarkFrame frame(double t, double yaw, double pitch, double roll) {
    sensor::HeadPose pose;
    pose.yaw = yaw;
    pose.pitch = pitch;
    pose.roll = roll;
    pose.translation = sensor::Vec3(0.0, 0.0, 600.0);
    const auto camera = sensor::CameraModel::for_image(p_.width, p_.height);
    auto points = sensor::project(model_, pose, camera);
    std::normal_distribution<double> noise(0.0, p_.landmark_noise);
    for (auto& pt : points) {
      pt.x() = std::clamp(pt.x() + noise(rng_), 0.0, static_cast<double>(p_.width - 1));
      pt.y() = std::clamp(pt.y() + noise(rng_), 0.0, static_cast<double>(p_.height - 1));
    }
    return {round_ms(t), std::move(points), p_.width, p_.height};
  }

  // Clockwise traversal of the on-screen rectangle starting top-left.
  std::vector<sensor::LandmarkFrame> calibration() {
    const double y = p_.yaw_range, q = p_.pitch_range;
    const std::array<std::array<double, 2>, 5> corners = {{{-y, q}, {y, q}, {y, -q}, {-y, -q}, {-y, q}}};
    std::array<double, 4> side{};
    double perimeter = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      perimeter += side[i] = std::hypot(corners[i + 1][0] - corners[i][0], corners[i + 1][1] - corners[i][1]);
    const auto n = static_cast<std::size_t>(std::round(p_.calibration_duration * p_.fps));
    std::vector<sensor::LandmarkFrame> frames;
    for (std::size_t k = 0; k <= n; ++k) {
      double d = perimeter * static_cast<double>(k) / static_cast<double>(n);
      std::size_t s = 0;
      while (s < 3 && d > side[s]) d -= side[s++];
      const double f = std::clamp(d / side[s], 0.0, 1.0);
      const double yaw = corners[s][0] + f * (corners[s + 1][0] - corners[s][0]);
      const double pitch = corners[s][1] + f * (corners[s + 1][1] - corners[s][1]);
      frames.push_back(frame(static_cast<double>(k) / p_.fps, yaw, pitch, 0.0));
    }
    return frames;
  }

  std::vector<sensor::LandmarkFrame> session(const std::vector<OffScreen>& off, double total) {
    const auto n = static_cast<std::size_t>(std::llround(total * p_.fps));
    std::vector<sensor::LandmarkFrame> frames;
    frames.reserve(n);
    std::normal_distribution<double> drift(0.0, 0.6), wobble(0.0, 1.0);
    const double yaw_lim = std::max(1.0, p_.yaw_range - 6.0), pitch_lim = std::max(1.0, p_.pitch_range - 5.0);
    double yaw = 0.0, pitch = 0.0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / p_.fps;
      while (next < off.size() && off[next].span.end <= t) ++next;
      // On-screen gaze wanders as a bounded random walk.
      yaw = std::clamp(0.97 * yaw + drift(rng_), -yaw_lim, yaw_lim);
      pitch = std::clamp(0.97 * pitch + drift(rng_), -pitch_lim, pitch_lim);
      double fy = yaw, fp = pitch;
      if (next < off.size() && off[next].span.start <= t) {
        const auto& o = off[next];
        switch (o.gaze) {
          case Gaze::Left: fy = -(p_.yaw_range + o.depth) + wobble(rng_); break;
          case Gaze::Right: fy = p_.yaw_range + o.depth + wobble(rng_); break;
          case Gaze::Down: fp = -(p_.pitch_range + o.depth) + wobble(rng_); break;
        }
      }
      frames.push_back(frame(t, fy, fp, wobble(rng_)));
    }
    return frames;
  }

private:
  const SimulationParams& p_;
  std::mt19937_64 rng_;
  sensor::FaceModel3D model_ = sensor::FaceModel3D::generic();
};

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

} // namespace

void SimulationParams::validate() const {
  if (!(part_duration > 0.0)) throw InvalidArgument("part duration must be positive");
  if (modes.empty()) throw InvalidArgument("at least one part is needed");
  if (!(precision > 0.0 && precision <= 1.0)) throw InvalidArgument("precision must be in (0, 1]");
  if (!(recall >= 0.0 && recall <= 1.0)) throw InvalidArgument("recall must be in [0, 1]");
  if (!(fps > 0.0)) throw InvalidArgument("fps must be positive");
  if (debounce < 1) throw InvalidArgument("debounce must be at least 1");
  if (!(mean_attentive_gap > min_attentive_gap)) throw InvalidArgument("mean gap must exceed the minimum");
  if (!(mean_distraction > 0.0)) throw InvalidArgument("mean distraction must be positive");
  if (!(yaw_range > 0.0 && pitch_range > 0.0)) throw InvalidArgument("angular ranges must be positive");
}

SimulationParams SimulationParams::from_json(const json& j, SimulationParams p) {
  p.part_duration = j.value("part_duration", p.part_duration);
  p.shuffle = j.value("shuffle", p.shuffle);
  p.mean_attentive_gap = j.value("mean_attentive_gap", p.mean_attentive_gap);
  p.min_attentive_gap = j.value("min_attentive_gap", p.min_attentive_gap);
  p.mean_distraction = j.value("mean_distraction", p.mean_distraction);
  p.min_distraction = j.value("min_distraction", p.min_distraction);
  if (j.contains("distraction_scale")) {
    const auto& s = j.at("distraction_scale");
    for (auto m : {sched::Mode::Mindless, sched::Mode::Alerting, sched::Mode::Control})
      p.distraction_scale[mode_slot(m)] =
          s.value(std::string(sched::to_string(m)), p.distraction_scale[mode_slot(m)]);
  }
  p.precision = j.value("precision", p.precision);
  p.recall = j.value("recall", p.recall);
  p.yaw_range = j.value("yaw_range", p.yaw_range);
  p.pitch_range = j.value("pitch_range", p.pitch_range);
  p.fps = j.value("fps", p.fps);
  p.debounce = j.value("debounce", p.debounce);
  p.landmark_noise = j.value("landmark_noise", p.landmark_noise);
  p.width = j.value("width", p.width);
  p.height = j.value("height", p.height);
  p.calibration_duration = j.value("calibration_duration", p.calibration_duration);
  return p;
}

json SimulationParams::to_json() const {
  json scale = json::object();
  for (auto m : {sched::Mode::Mindless, sched::Mode::Alerting, sched::Mode::Control})
    scale[std::string(sched::to_string(m))] = distraction_scale[mode_slot(m)];
  return {{"seed", seed},
          {"part_duration", part_duration},
          {"shuffle", shuffle},
          {"mean_attentive_gap", mean_attentive_gap},
          {"min_attentive_gap", min_attentive_gap},
          {"mean_distraction", mean_distraction},
          {"min_distraction", min_distraction},
          {"distraction_scale", scale},
          {"precision", precision},
          {"recall", recall},
          {"yaw_range", yaw_range},
          {"pitch_range", pitch_range},
          {"fps", fps},
          {"debounce", debounce},
          {"landmark_noise", landmark_noise},
          {"width", width},
          {"height", height},
          {"calibration_duration", calibration_duration}};
}

SimulationOutput simulate(const SimulationParams& p, const std::filesystem::path& dir) {
  p.validate();
  std::filesystem::create_directories(dir);
  Generator gen(p);
  SimulationOutput out;
  out.parts = gen.parts();
  double total = 0.0;
  for (const auto& part : out.parts) total += part.duration;

  const auto truth = gen.distractions(out.parts);
  const auto off = gen.off_screen(truth, total);

  out.calibration_landmarks = dir / "calibration.landmarks.jsonl";
  sensor::write_landmarks(out.calibration_landmarks, gen.calibration());
  out.landmarks = dir / "session.landmarks.jsonl";
  sensor::write_landmarks(out.landmarks, gen.session(off, total));

  std::vector<std::string> marks;
  for (const auto& s : truth) {
    marks.push_back(json{{"mark", "distraction_start"}, {"t", s.start}}.dump());
    marks.push_back(json{{"mark", "refocus"}, {"t", s.end}}.dump());
  }
  out.annotations = dir / "annotations.jsonl";
  write_lines(out.annotations, marks);

  // Offline run of the same session through the router, so the log has the
  // live schema: the sensor reports each change once the debounce confirms it.
  control::SessionDescriptor descriptor{"sim" + std::to_string(p.seed), out.parts, false};
  control::RouterConfig cfg;
  cfg.descriptor = descriptor;
  cfg.trigger = control::TriggerMode::Auto;
  cfg.scheduler.rng_seed = p.seed;
  cfg.profile = sensor::CalibrationProfile{-p.yaw_range, p.yaw_range, -p.pitch_range, p.pitch_range, 0.0};
  control::Router router(cfg);

  constexpr control::ConnectionId kClient = 1, kSensor = 2, kConsole = 3;
  std::array<std::int64_t, 4> seq{};
  auto say = [&](control::ConnectionId from, control::MessageType type, json payload, double t) {
    router.handle(from, control::encode(control::Message{type, t, ++seq[from], std::move(payload)}), t);
  };
  say(kClient, control::MessageType::Hello, {{"role", "client"}}, 0.0);
  say(kSensor, control::MessageType::Hello, {{"role", "sensor"}}, 0.0);
  say(kConsole, control::MessageType::Hello, {{"role", "console"}}, 0.0);

  struct Cue {
    double t;
    control::ConnectionId from;
    control::MessageType type;
    json payload;
  };
  std::vector<Cue> cues;
  for (const auto& s : truth) {
    cues.push_back({s.start, kConsole, control::MessageType::Annotation, {{"mark", "distraction_start"}}});
    cues.push_back({s.end, kConsole, control::MessageType::Annotation, {{"mark", "refocus"}}});
  }
  const double latency = (p.debounce - 1) / p.fps;
  for (const auto& o : off) {
    cues.push_back({quantize_up(o.span.start, p.fps) + latency, kSensor, control::MessageType::AttentionState,
                    {{"state", "distracted"}}});
    cues.push_back({quantize_up(o.span.end, p.fps) + latency, kSensor, control::MessageType::AttentionState,
                    {{"state", "attentive"}}});
  }
  std::stable_sort(cues.begin(), cues.end(), [](const Cue& a, const Cue& b) {
    return a.t != b.t ? a.t < b.t : a.from > b.from;
  });
  for (auto& c : cues) {
    const double t = round_ms(c.t);
    if (t >= total) break;
    router.tick(t);
    say(c.from, c.type, std::move(c.payload), t);
  }
  router.tick(total);
  out.events = dir / ("session-" + descriptor.session_id + ".events.jsonl");
  router.log().write(out.events);

  json plan = {{"params", p.to_json()}, {"session", descriptor.to_json()}};
  out.plan = dir / "plan.json";
  write_lines(out.plan, {plan.dump(2)});
  return out;
}

std::vector<ScriptedMark> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<ScriptedMark> marks;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const auto here = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      marks.push_back({j.at("t").get<double>(), j.at("mark").get<std::string>()});
    } catch (const json::exception& e) {
      throw DecodeError(here, e.what());
    }
  }
  return marks;
}

} // namespace mindless::cli
