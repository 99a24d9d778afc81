#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mindless/sensor/calibration.hpp"

namespace mindless::sensor {

struct RawJudgment {
  double t = 0.0;
  AttentionState state = AttentionState::Attentive;
};

struct StateChange {
  double t = 0.0;
  AttentionState state = AttentionState::Attentive;
  friend bool operator==(const StateChange&, const StateChange&) = default;
};

/// Emits a change only after `k` consecutive raw frames disagree with the
/// current state; the change is stamped with the first frame of that run.
/// The stream starts out attentive.
class Debouncer {
public:
  explicit Debouncer(int k = 3);

  std::optional<StateChange> push(const RawJudgment& raw);

  AttentionState state() const noexcept { return state_; }
  int window() const noexcept { return k_; }

private:
  int k_;
  AttentionState state_ = AttentionState::Attentive;
  int run_ = 0;
  double run_start_ = 0.0;
};

std::vector<StateChange> debounce(std::span<const RawJudgment> raw, int k);

} // namespace mindless::sensor
