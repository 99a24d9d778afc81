#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "mindless/control/message.hpp"

namespace mindless::control {

/// Payload keys that would tell the experimenter what the participant hears.
inline constexpr std::array<std::string_view, 5> kConcealedKeys = {
    "condition", "mode", "pattern", "cycle_seed", "toggle_period"};

/// Console view of a message before the reveal. Activate/deactivate are
/// withheld entirely; every other type has concealed keys removed at any
/// depth. Returns the message unchanged when the session is not blinded.
std::optional<Message> blind_for_console(Message m, bool blinded);

/// True if any concealed key appears anywhere in `j`.
bool carries_assignment(const Json& j);

} // namespace mindless::control
