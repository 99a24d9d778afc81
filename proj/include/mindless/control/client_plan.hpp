#pragma once

#include <cstdint>
#include <optional>

#include "mindless/audio/effect.hpp"
#include "mindless/control/message.hpp"
#include "mindless/scheduler/scheduler.hpp"

namespace mindless::control {

/// The audio client's view of the intervention, rebuilt from activate and
/// deactivate messages. Toggle timing runs on the client's own clock from
/// the moment the activation arrives.
class ClientPlan {
public:
  /// Consumes activate, deactivate and session_end; other types are ignored.
  void apply(const Message& m, double now);

  audio::Effect effect_at(double now) const;
  bool active() const noexcept { return active_.has_value(); }
  std::optional<int> episode() const;

private:
  struct Active {
    int episode = 0;
    sched::Mode mode = sched::Mode::Mindless;
    double toggle_period = 3.0;
    std::optional<audio::PerturbationPattern> pattern;
    std::optional<std::uint64_t> cycle_seed;
    double started_at = 0.0;
  };
  std::optional<Active> active_;
};

} // namespace mindless::control
