#include <chrono>
#include <fstream>
#include <ostream>
#include <thread>

#include "commands.hpp"
#include "mindless/control/client_plan.hpp"
#include "mindless/control/ws_client.hpp"
#include "mindless/error.hpp"
#include "mindless/sensor/debounce.hpp"
#include "mindless/sensor/landmark_io.hpp"
#include "simulate.hpp"

namespace mindless::cli {

namespace {

using control::Message;
using control::MessageType;
using Clock = std::chrono::steady_clock;
using nlohmann::json;

std::unique_ptr<control::WsClient> connect(const std::string& host, unsigned short port) {
  const auto deadline = Clock::now() + std::chrono::seconds(10);
  while (true) {
    try {
      return std::make_unique<control::WsClient>(host, port);
    } catch (const std::exception& e) {
      if (Clock::now() > deadline)
        throw DataError("cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }
}

std::optional<sensor::CalibrationProfile> profile_from(const json& p) {
  if (!p.contains("yaw_min")) return std::nullopt;
  sensor::CalibrationProfile c;
  c.yaw_min = p.at("yaw_min").get<double>();
  c.yaw_max = p.at("yaw_max").get<double>();
  c.pitch_min = p.at("pitch_min").get<double>();
  c.pitch_max = p.at("pitch_max").get<double>();
  c.captured_at = p.value("captured_at", 0.0);
  return c;
}

// Scripted participant process: one role, paced against the session start.
class Agent {
public:
  Agent(const AgentOptions& o, control::Role role, std::ostream& out)
      : o_(o), role_(role), out_(out), ws_(connect(o.host, o.port)), t0_(Clock::now()) {
    if (o.transcript) {
      transcript_.open(*o.transcript, std::ios::binary | std::ios::trunc);
      if (!transcript_) throw DataError("cannot write " + o.transcript->string());
    }
  }

  int run() {
    prepare();
    send(MessageType::Hello, {{"role", control::to_string(role_)}});
    const auto deadline = t0_ + wall(o_.timeout);
    while (!start_ && !ended_) {
      if (Clock::now() > deadline) throw DataError("session did not start before the timeout");
      if (!pump(Clock::now() + std::chrono::milliseconds(50))) break;
      retry_calibration();
    }
    if (start_) script(deadline);
    // Drain until the server closes, so the transcript holds the reveal.
    while (!closed_ && Clock::now() < deadline) pump(Clock::now() + std::chrono::milliseconds(200));
    out_ << control::to_string(role_) << ": received " << received_ << " frames, sent " << seq_
         << (ended_ ? ", session ended" : ", session did not end") << std::endl;
    return ended_ ? 0 : 2;
  }

private:
  static Clock::duration wall(double seconds) {
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
  }

  double clock() const {
    return std::chrono::duration<double>(Clock::now() - t0_).count() * o_.time_scale;
  }

  Clock::time_point at(double session_t) const { return *start_ + wall(session_t / o_.time_scale); }

  void send(MessageType type, json payload) {
    ws_->send(Message{type, clock(), ++seq_, std::move(payload)});
  }

  void prepare() {
    if (role_ == control::Role::Sensor) {
      if (!o_.landmarks) throw UsageError("the sensor agent needs --landmarks");
      frames_ = sensor::read_landmarks(*o_.landmarks);
      poses_ = solve_frames(frames_);
    }
    if (role_ == control::Role::Console && o_.annotations) marks_ = read_annotations(*o_.annotations);
    want_calibration_ = role_ == control::Role::Console && o_.calibrate;
  }

  // Receives until `until`; false once the connection is gone.
  bool pump(Clock::time_point until) {
    while (true) {
      const auto now = Clock::now();
      const auto left = until > now ? std::chrono::duration_cast<std::chrono::milliseconds>(until - now)
                                    : std::chrono::milliseconds(0);
      auto frame = ws_->receive(left);
      if (!frame) {
        if (ws_->closed()) closed_ = true;
        return !closed_;
      }
      ++received_;
      if (transcript_.is_open()) transcript_ << *frame << '\n' << std::flush;
      on(control::decode(*frame));
      if (Clock::now() >= until) return true;
    }
  }

  void on(const Message& m) {
    switch (m.type) {
      case MessageType::ModeSet:
        if (!start_ && m.payload.value("part", -1) == 0) start_ = Clock::now();
        break;
      case MessageType::SessionEnd:
        ended_ = true;
        break;
      case MessageType::CalibrationStart:
        if (role_ == control::Role::Sensor) run_calibration();
        break;
      case MessageType::CalibrationDone:
        calibrating_ = false;
        if (role_ == control::Role::Console && !m.payload.value("aborted", false)) want_calibration_ = false;
        if (auto p = profile_from(m.payload)) profile_ = p;
        break;
      case MessageType::Error:
        // The console may ask before the sensor has joined; try again shortly.
        if (calibrating_) {
          calibrating_ = false;
          next_calibration_ = Clock::now() + std::chrono::milliseconds(200);
        }
        break;
      default:
        break;
    }
    if (role_ == control::Role::Client) plan_.apply(m, clock());
  }

  void retry_calibration() {
    if (!want_calibration_ || calibrating_ || Clock::now() < next_calibration_) return;
    calibrating_ = true;
    send(MessageType::CalibrationStart, json::object());
  }

  void run_calibration() {
    if (!o_.calibration_landmarks) {
      send(MessageType::CalibrationDone, {{"abort", true}});
      return;
    }
    const auto frames = sensor::read_landmarks(*o_.calibration_landmarks);
    for (const auto& p : solve_frames(frames))
      if (p) send(MessageType::CalibrationPoint, {{"pitch", p->pitch}, {"yaw", p->yaw}});
    send(MessageType::CalibrationDone, json::object());
  }

  void script(Clock::time_point deadline) {
    if (role_ == control::Role::Console) {
      for (const auto& m : marks_) {
        if (!pump(std::min(at(m.t), deadline)) || ended_) return;
        send(MessageType::Annotation, {{"mark", m.mark}});
      }
    } else if (role_ == control::Role::Sensor) {
      if (!profile_) throw DataError("sensor has no calibration profile; run calibrate first");
      sensor::Debouncer d(o_.debounce);
      for (std::size_t i = 0; i < frames_.size(); ++i) {
        if (!pump(std::min(at(frames_[i].timestamp), deadline)) || ended_) return;
        const auto state = poses_[i] ? sensor::judge(*poses_[i], *profile_) : sensor::AttentionState::Distracted;
        if (const auto c = d.push({frames_[i].timestamp, state}))
          send(MessageType::AttentionState, {{"state", sensor::to_string(c->state)}});
      }
    }
    while (!ended_ && Clock::now() < deadline)
      if (!pump(std::min(Clock::now() + std::chrono::milliseconds(100), deadline))) return;
  }

  const AgentOptions& o_;
  control::Role role_;
  std::ostream& out_;
  std::unique_ptr<control::WsClient> ws_;
  Clock::time_point t0_;
  std::ofstream transcript_;
  std::int64_t seq_ = 0;
  std::size_t received_ = 0;
  std::optional<Clock::time_point> start_;
  bool ended_ = false;
  bool closed_ = false;

  std::vector<sensor::LandmarkFrame> frames_;
  std::vector<std::optional<sensor::HeadPose>> poses_;
  std::vector<ScriptedMark> marks_;
  std::optional<sensor::CalibrationProfile> profile_;
  bool want_calibration_ = false;
  bool calibrating_ = false;
  Clock::time_point next_calibration_{};
  control::ClientPlan plan_;
};

} // namespace

int agent(const AgentOptions& o, std::ostream& out) {
  const auto role = control::role_from_string(o.role);
  if (!role) throw UsageError("--role must be client, sensor or console");
  if (!(o.time_scale > 0.0)) throw UsageError("--time-scale must be positive");
  for (const auto* p : {&o.landmarks, &o.calibration_landmarks, &o.annotations})
    if (*p && !std::filesystem::exists(**p)) throw DataError("no such file: " + (*p)->string());
  Agent a(o, *role, out);
  return a.run();
}

} // namespace mindless::cli
