#include "mindless/audio/engine.hpp"

#include <algorithm>

#include "mindless/audio/gain.hpp"

namespace mindless::audio {

AudioEngine::AudioEngine(EngineConfig config)
    : config_(config),
      shift_down_(PitchShifterConfig{config.sample_rate, config.pitch.window, config.pitch.hop}),
      shift_up_(PitchShifterConfig{config.sample_rate, config.pitch.window, config.pitch.hop}) {
  config_.pitch.sample_rate = config_.sample_rate;
  config_.beep.validate();
}

void AudioEngine::reset() {
  shift_down_.reset();
  shift_up_.reset();
  alert_started_at_.reset();
  worst_ = {};
}

AudioChunk AudioEngine::process_chunk(const AudioChunk& chunk, Effect effect) {
  const auto started = std::chrono::steady_clock::now();
  validate(chunk);

  // Keep both vocoders warm whatever is being applied.
  AudioChunk down = shift_down_.process(chunk, kToneDownRatio);
  AudioChunk up = shift_up_.process(chunk, kToneUpRatio);

  if (effect.kind() != Effect::Kind::Alert) alert_started_at_.reset();

  AudioChunk out;
  switch (effect.kind()) {
    case Effect::Kind::None:
      out = chunk;
      break;
    case Effect::Kind::Mindless:
      switch (effect.pattern()) {
        case PerturbationPattern::VolumeHalve:
        case PerturbationPattern::VolumeDouble:
          out = apply_gain(chunk, gain_of(effect.pattern()));
          break;
        case PerturbationPattern::PitchDownOneTone:
          out = std::move(down);
          break;
        case PerturbationPattern::PitchUpOneTone:
          out = std::move(up);
          break;
      }
      break;
    case Effect::Kind::Alert: {
      if (!alert_started_at_) alert_started_at_ = chunk.start_index;
      const double since =
          static_cast<double>(chunk.start_index - *alert_started_at_) / chunk.sample_rate;
      const auto overlay = synthesize_beep(
          config_.beep, since, ChunkGeometry{chunk.start_index, chunk.size(), chunk.sample_rate});
      out = chunk;
      for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = std::clamp(out.samples[i] + overlay[i], -1.0f, 1.0f);
      break;
    }
  }

  worst_ = std::max(worst_, std::chrono::duration_cast<std::chrono::nanoseconds>(
                                std::chrono::steady_clock::now() - started));
  return out;
}

} // namespace mindless::audio
