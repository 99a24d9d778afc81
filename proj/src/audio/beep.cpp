#include "mindless/audio/beep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mindless/error.hpp"

namespace mindless::audio {

void BeepSpec::validate() const {
  if (!(duration > 0.0 && duration < period))
    throw InvalidArgument("beep duration must be in (0, period)");
  if (!(ramp >= 0.0 && 2.0 * ramp < duration))
    throw InvalidArgument("beep ramps must fit inside the burst");
  if (!(frequency > 0.0) || !(amplitude >= 0.0 && amplitude <= 1.0))
    throw InvalidArgument("beep frequency must be positive and amplitude in [0, 1]");
}

std::vector<float> synthesize_beep(const BeepSpec& spec, double time_since_activation,
                                   const ChunkGeometry& geometry) {
  std::vector<float> overlay(geometry.length, 0.0f);
  const double dt = 1.0 / geometry.sample_rate;
  for (std::size_t i = 0; i < geometry.length; ++i) {
    const double t = time_since_activation + static_cast<double>(i) * dt;
    if (t < 0.0) continue;
    const double in_period = std::fmod(t, spec.period);
    if (in_period >= spec.duration) continue;
    double envelope = 1.0;
    if (spec.ramp > 0.0) {
      envelope = std::min({1.0, in_period / spec.ramp, (spec.duration - in_period) / spec.ramp});
    }
    overlay[i] = static_cast<float>(spec.amplitude * envelope *
                                    std::sin(2.0 * std::numbers::pi * spec.frequency * in_period));
  }
  return overlay;
}

} // namespace mindless::audio
