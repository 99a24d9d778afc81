#include "mindless/audio/effect.hpp"

#include "mindless/error.hpp"

namespace mindless::audio {

double gain_of(PerturbationPattern p) {
  switch (p) {
    case PerturbationPattern::VolumeHalve: return kHalveGain;
    case PerturbationPattern::VolumeDouble: return kDoubleGain;
    default: throw InvalidArgument("pattern has no gain: " + std::string(to_string(p)));
  }
}

double ratio_of(PerturbationPattern p) {
  switch (p) {
    case PerturbationPattern::PitchDownOneTone: return kToneDownRatio;
    case PerturbationPattern::PitchUpOneTone: return kToneUpRatio;
    default: throw InvalidArgument("pattern has no pitch ratio: " + std::string(to_string(p)));
  }
}

std::string_view to_string(PerturbationPattern p) {
  switch (p) {
    case PerturbationPattern::VolumeHalve: return "volume_halve";
    case PerturbationPattern::VolumeDouble: return "volume_double";
    case PerturbationPattern::PitchDownOneTone: return "pitch_down";
    case PerturbationPattern::PitchUpOneTone: return "pitch_up";
  }
  return "?";
}

std::optional<PerturbationPattern> pattern_from_string(std::string_view name) {
  for (auto p : kAllPatterns)
    if (to_string(p) == name) return p;
  // Accept the dashed spellings used on the command line too.
  if (name == "volume-halve") return PerturbationPattern::VolumeHalve;
  if (name == "volume-double") return PerturbationPattern::VolumeDouble;
  if (name == "pitch-down") return PerturbationPattern::PitchDownOneTone;
  if (name == "pitch-up") return PerturbationPattern::PitchUpOneTone;
  return std::nullopt;
}

std::string Effect::describe() const {
  switch (kind_) {
    case Kind::None: return "none";
    case Kind::Alert: return "alert";
    case Kind::Mindless: return "mindless:" + std::string(to_string(pattern_));
  }
  return "?";
}

} // namespace mindless::audio
