#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace exacb {

// Wall-clock instants are carried everywhere as UTC epoch seconds and
// serialized as YYYY-MM-DDTHH:MM:SSZ.
using UtcSeconds = std::int64_t;

std::string format_utc(UtcSeconds t);

// Strict parse of YYYY-MM-DDTHH:MM:SSZ. Rejects anything that does not
// round-trip through format_utc (e.g. Feb 30).
std::optional<UtcSeconds> parse_utc(const std::string& text);

// Accepts either a full timestamp or a bare date (YYYY-MM-DD, meaning
// midnight UTC). Used for time_span filters in configs.
std::optional<UtcSeconds> parse_utc_or_date(const std::string& text);

UtcSeconds now_utc();

}  // namespace exacb
