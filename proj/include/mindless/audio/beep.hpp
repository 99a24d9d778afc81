#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mindless::audio {

/// Alert tone: a short ramped sine burst repeated every `period` seconds.
struct BeepSpec {
  double duration = 0.1;
  double period = 3.0;
  double frequency = 1000.0;
  double amplitude = 0.5;
  double ramp = 0.005;

  /// Throws InvalidArgument unless 0 < duration < period and 2*ramp < duration.
  void validate() const;
};

struct ChunkGeometry {
  std::int64_t start_index = 0;
  std::size_t length = 0;
  int sample_rate = 16000;
};

/// Additive overlay for one chunk. `time_since_activation` is the time of the
/// chunk's first sample measured from the moment the alert was switched on.
std::vector<float> synthesize_beep(const BeepSpec& spec, double time_since_activation,
                                   const ChunkGeometry& geometry);

} // namespace mindless::audio
