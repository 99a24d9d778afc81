#include <istream>
#include <ostream>

#include "commands.hpp"
#include "mindless/audio/engine.hpp"
#include "mindless/audio/wav_io.hpp"
#include "mindless/control/client_plan.hpp"
#include "mindless/control/ws_client.hpp"

namespace mindless::cli {

int client(const ClientOptions& o, std::istream& in, std::ostream& out) {
  control::WsClient ws(o.host, o.port);
  std::int64_t seq = 0;
  ws.send(control::Message{control::MessageType::Hello, 0.0, ++seq, {{"role", "client"}}});

  const auto n = audio::chunk_length(audio::kDefaultSampleRate);
  audio::AudioEngine engine;
  control::ClientPlan plan;
  std::vector<char> bytes(n * 2);
  std::int64_t index = 0;
  while (in.read(bytes.data(), static_cast<std::streamsize>(bytes.size())) || in.gcount() > 0) {
    const auto got = static_cast<std::size_t>(in.gcount()) / 2;
    // The sample clock is the client's time base.
    const double now = static_cast<double>(index) / audio::kDefaultSampleRate;
    while (auto frame = ws.receive(std::chrono::milliseconds(0))) plan.apply(control::decode(*frame), now);

    std::vector<float> samples(n, 0.0f);
    for (std::size_t i = 0; i < got; ++i) {
      const auto lo = static_cast<unsigned char>(bytes[2 * i]);
      const auto hi = static_cast<unsigned char>(bytes[2 * i + 1]);
      samples[i] = audio::from_pcm16(static_cast<std::int16_t>(lo | (hi << 8)));
    }
    auto input = audio::AudioChunk::from_samples(samples, index);
    input.valid = got;
    const auto chunk = engine.process_chunk(input, plan.effect_at(now));
    for (std::size_t i = 0; i < got; ++i) {
      const auto v = static_cast<std::uint16_t>(audio::to_pcm16(chunk.samples[i]));
      out.put(static_cast<char>(v & 0xff));
      out.put(static_cast<char>(v >> 8));
    }
    out.flush();
    index += static_cast<std::int64_t>(n);
    if (got < n) break;
  }
  ws.close();
  return 0;
}

} // namespace mindless::cli
