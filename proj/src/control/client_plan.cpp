#include "mindless/control/client_plan.hpp"

#include "mindless/error.hpp"

namespace mindless::control {

void ClientPlan::apply(const Message& m, double now) {
  switch (m.type) {
    case MessageType::Activate: {
      Active a;
      a.episode = m.payload.at("episode").get<int>();
      const auto mode = sched::mode_from_string(m.payload.value("mode", std::string("mindless")));
      if (!mode) throw DataError("activate carries an unknown mode");
      a.mode = *mode;
      a.toggle_period = m.payload.value("toggle_period", 3.0);
      if (m.payload.contains("pattern")) {
        a.pattern = audio::pattern_from_string(m.payload.at("pattern").get<std::string>());
        if (!a.pattern) throw DataError("activate carries an unknown pattern");
      }
      if (m.payload.contains("cycle_seed"))
        a.cycle_seed = m.payload.at("cycle_seed").get<std::uint64_t>();
      a.started_at = now;
      active_ = a;
      break;
    }
    case MessageType::Deactivate:
      if (active_ && m.payload.value("episode", active_->episode) == active_->episode)
        active_.reset();
      break;
    case MessageType::SessionEnd:
      active_.reset();
      break;
    default:
      break;
  }
}

audio::Effect ClientPlan::effect_at(double now) const {
  if (!active_) return audio::Effect::none();
  switch (active_->mode) {
    case sched::Mode::Control: return audio::Effect::none();
    case sched::Mode::Alerting: return audio::Effect::alert();
    case sched::Mode::Mindless: break;
  }
  const auto cycle = sched::cycle_index(active_->started_at, active_->toggle_period, now);
  if (!cycle || *cycle % 2 != 0 || !active_->pattern) return audio::Effect::none();
  if (*cycle > 0 && active_->cycle_seed)
    return audio::Effect::mindless(sched::pattern_draw(*active_->cycle_seed, active_->episode,
                                                       static_cast<std::uint64_t>(*cycle)));
  return audio::Effect::mindless(*active_->pattern);
}

std::optional<int> ClientPlan::episode() const {
  if (!active_) return std::nullopt;
  return active_->episode;
}

} // namespace mindless::control
