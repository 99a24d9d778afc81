#pragma once

#include <chrono>
#include <cstdint>
#include <optional>

#include "mindless/audio/audio_chunk.hpp"
#include "mindless/audio/beep.hpp"
#include "mindless/audio/effect.hpp"
#include "mindless/audio/pitch_shifter.hpp"

namespace mindless::audio {

struct EngineConfig {
  int sample_rate = kDefaultSampleRate;
  PitchShifterConfig pitch{};
  BeepSpec beep{};
};

/// Per-chunk effect dispatcher. Lives entirely in the processing context.
///
/// Both pitch shifters are fed every chunk, whatever the effect, so that
/// switching a pitch pattern on mid-stream never starts from an empty vocoder.
class AudioEngine {
public:
  explicit AudioEngine(EngineConfig config = {});

  AudioChunk process_chunk(const AudioChunk& chunk, Effect effect);

  void reset();

  const EngineConfig& config() const noexcept { return config_; }
  std::chrono::nanoseconds worst_chunk_time() const noexcept { return worst_; }

private:
  EngineConfig config_;
  PitchShifter shift_down_;
  PitchShifter shift_up_;
  std::optional<std::int64_t> alert_started_at_;  // sample index
  std::chrono::nanoseconds worst_{0};
};

} // namespace mindless::audio
