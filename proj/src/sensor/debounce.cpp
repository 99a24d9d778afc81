#include "mindless/sensor/debounce.hpp"

#include "mindless/error.hpp"

namespace mindless::sensor {

Debouncer::Debouncer(int k) : k_(k) {
  if (k < 1) throw InvalidArgument("debounce window must be at least 1 frame");
}

std::optional<StateChange> Debouncer::push(const RawJudgment& raw) {
  if (raw.state == state_) {
    run_ = 0;
    return std::nullopt;
  }
  if (run_ == 0) run_start_ = raw.t;
  if (++run_ < k_) return std::nullopt;
  state_ = raw.state;
  run_ = 0;
  return StateChange{run_start_, state_};
}

std::vector<StateChange> debounce(std::span<const RawJudgment> raw, int k) {
  Debouncer d(k);
  std::vector<StateChange> out;
  for (const auto& r : raw)
    if (auto change = d.push(r)) out.push_back(*change);
  return out;
}

} // namespace mindless::sensor
