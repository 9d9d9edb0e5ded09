#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace realcred {

using Timestamp = std::chrono::sys_seconds;

Timestamp now_utc();

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_rfc3339(Timestamp t);
/// Accepts only the form produced by `format_rfc3339`.
std::optional<Timestamp> parse_rfc3339(std::string_view s);

}  // namespace realcred
