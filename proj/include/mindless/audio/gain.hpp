#pragma once

#include "mindless/audio/audio_chunk.hpp"

namespace mindless::audio {

/// Multiplies every sample by `factor` and hard-clamps to [-1, 1].
/// Throws InvalidArgument for a non-positive or non-finite factor.
AudioChunk apply_gain(const AudioChunk& chunk, double factor);

} // namespace mindless::audio
