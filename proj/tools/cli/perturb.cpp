#include <algorithm>
#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "mindless/audio/engine.hpp"
#include "mindless/audio/wav_io.hpp"
#include "mindless/error.hpp"
#include "mindless/scheduler/scheduler.hpp"

namespace mindless::cli {

std::vector<std::pair<double, double>> parse_windows(const std::string& spec) {
  std::vector<std::pair<double, double>> windows;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) throw UsageError("active window '" + item + "' is not a-b");
    double a = 0.0, b = 0.0;
    try {
      std::size_t used = 0;
      a = std::stod(item.substr(0, dash), &used);
      if (used != dash) throw std::invalid_argument(item);
      const auto rest = item.substr(dash + 1);
      b = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("active window '" + item + "' is not a-b");
    }
    if (!(a >= 0.0) || !(b > a)) throw UsageError("active window '" + item + "' is empty or negative");
    windows.emplace_back(a, b);
  }
  std::sort(windows.begin(), windows.end());
  for (std::size_t i = 1; i < windows.size(); ++i)
    if (windows[i].first < windows[i - 1].second)
      throw UsageError("active windows overlap near " + std::to_string(windows[i].first) + " s");
  return windows;
}

void perturb(const PerturbOptions& o) {
  const auto pattern = audio::pattern_from_string(o.pattern);
  if (!pattern) throw UsageError("unknown pattern '" + o.pattern + "'");
  if (!(o.toggle > 0.0)) throw UsageError("--toggle must be positive");
  const auto windows = parse_windows(o.active);
  if (!std::filesystem::exists(o.in)) throw DataError("no such file: " + o.in.string());

  const auto pcm = audio::read_wav(o.in);
  if (pcm.sample_rate != audio::kDefaultSampleRate)
    throw UnsupportedFormat("expected 16000 Hz input, got " + std::to_string(pcm.sample_rate));
  if (windows.empty()) {
    std::filesystem::copy_file(o.in, o.out, std::filesystem::copy_options::overwrite_existing);
    return;
  }

  audio::AudioEngine engine;
  auto chunks = audio::chunk_stream(pcm.samples, pcm.sample_rate);
  std::vector<audio::AudioChunk> out;
  out.reserve(chunks.size());
  for (const auto& chunk : chunks) {
    const double t = chunk.start_time();
    audio::Effect effect;
    for (const auto& [a, b] : windows) {
      if (t < a || t >= b) continue;
      const auto cycle = sched::cycle_index(a, o.toggle, t);
      if (cycle && *cycle % 2 == 0) effect = audio::Effect::mindless(*pattern);
    }
    out.push_back(engine.process_chunk(chunk, effect));
  }
  audio::write_pcm(o.out, out);
}

} // namespace mindless::cli
