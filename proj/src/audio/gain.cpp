#include "mindless/audio/gain.hpp"

#include <algorithm>
#include <cmath>

#include "mindless/error.hpp"

namespace mindless::audio {

AudioChunk apply_gain(const AudioChunk& chunk, double factor) {
  if (!std::isfinite(factor) || factor <= 0.0)
    throw InvalidArgument("gain factor must be positive and finite");
  AudioChunk out = chunk;
  const auto f = static_cast<float>(factor);
  for (auto& s : out.samples) s = std::clamp(s * f, -1.0f, 1.0f);
  return out;
}

} // namespace mindless::audio
