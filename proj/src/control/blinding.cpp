#include "mindless/control/blinding.hpp"

#include <algorithm>

namespace mindless::control {

namespace {

bool concealed(std::string_view key) {
  return std::find(kConcealedKeys.begin(), kConcealedKeys.end(), key) != kConcealedKeys.end();
}

void strip(Json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end();) {
      if (concealed(it.key())) {
        it = j.erase(it);
      } else {
        strip(it.value());
        ++it;
      }
    }
  } else if (j.is_array()) {
    for (auto& v : j) strip(v);
  }
}

} // namespace

std::optional<Message> blind_for_console(Message m, bool blinded) {
  if (!blinded) return m;
  if (m.type == MessageType::Activate || m.type == MessageType::Deactivate) return std::nullopt;
  strip(m.payload);
  return m;
}

bool carries_assignment(const Json& j) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      if (concealed(it.key()) || carries_assignment(it.value())) return true;
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (carries_assignment(v)) return true;
  }
  return false;
}

} // namespace mindless::control
