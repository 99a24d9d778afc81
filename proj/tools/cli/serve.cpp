#include <cstdlib>
#include <fstream>
#include <ostream>

#include "commands.hpp"
#include "mindless/control/ws_server.hpp"
#include "mindless/error.hpp"

namespace mindless::cli {

std::vector<sched::Mode> parse_modes(const std::vector<std::string>& names) {
  std::vector<sched::Mode> modes;
  for (const auto& n : names) {
    const auto m = sched::mode_from_string(n);
    if (!m) throw UsageError("unknown mode '" + n + "' (mindless, alerting, control)");
    modes.push_back(*m);
  }
  if (modes.empty()) throw UsageError("--parts needs at least one mode");
  return modes;
}

std::vector<control::PartSpec> build_parts(const std::vector<sched::Mode>& modes, double duration,
                                           bool shuffle, std::uint64_t seed) {
  if (!(duration > 0.0)) throw UsageError("part duration must be positive");
  std::vector<std::size_t> order(modes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (shuffle) order = control::part_order(seed, modes.size());
  std::vector<control::PartSpec> parts;
  for (std::size_t i = 0; i < order.size(); ++i)
    parts.push_back({"part" + std::to_string(i + 1), modes[order[i]], duration});
  return parts;
}

control::RouterConfig router_config(const ServeOptions& o) {
  const auto trigger = control::trigger_mode_from_string(o.mode);
  if (!trigger) throw UsageError("--mode must be auto or manual");
  if (!(o.time_scale > 0.0)) throw UsageError("--time-scale must be positive");
  control::RouterConfig cfg;
  cfg.trigger = *trigger;
  cfg.descriptor.session_id = o.session_id.empty() ? "s" + std::to_string(o.seed) : o.session_id;
  cfg.descriptor.parts = build_parts(parse_modes(o.parts), o.part_duration, o.shuffle, o.seed);
  cfg.descriptor.blinded = o.blinded;
  cfg.scheduler.rng_seed = o.seed;
  if (o.profile) {
    if (!std::filesystem::exists(*o.profile))
      throw DataError("no such profile: " + o.profile->string() +
                      "; run `mindless calibrate` first or calibrate from the console");
    cfg.profile = sensor::read_profile(*o.profile);
  }
  cfg.descriptor.validate();
  return cfg;
}

Path resolve_log_dir(const std::optional<Path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MINDLESS_LOG_DIR"); env && *env) return env;
  return ".";
}

int serve(const ServeOptions& o, std::ostream& out) {
  auto cfg = router_config(o);
  const auto dir = resolve_log_dir(o.log_dir);
  std::filesystem::create_directories(dir);
  const auto log_path = dir / ("session-" + cfg.descriptor.session_id + ".events.jsonl");
  std::ofstream log_file(log_path, std::ios::binary | std::ios::trunc);
  if (!log_file) throw DataError("cannot write " + log_path.string());

  control::Router router(std::move(cfg));
  router.log().set_sink([&](const sched::SessionEvent& e) {
    log_file << sched::encode_event(e) << '\n';
    log_file.flush();
  });

  control::ServerOptions so;
  so.host = o.host;
  so.port = o.port;
  so.time_scale = o.time_scale;
  std::unique_ptr<control::WsServer> server;
  try {
    server = std::make_unique<control::WsServer>(router, so);
  } catch (const std::exception& e) {
    throw DataError("cannot listen on " + o.host + ":" + std::to_string(o.port) + ": " + e.what());
  }
  out << "listening " << o.host << ':' << server->port() << '\n'
      << "log " << log_path.string() << std::endl;
  if (o.on_listening) o.on_listening(server->port());
  server->run();
  out << "session " << (router.finished() ? "complete" : "stopped") << ", " << router.log().size()
      << " events" << std::endl;
  return 0;
}

} // namespace mindless::cli
