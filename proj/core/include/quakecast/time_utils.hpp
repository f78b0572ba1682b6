#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace quakecast {

/// Days since 1970-01-01 (UTC civil calendar, proleptic Gregorian).
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// Seconds since the UTC epoch -> day number (floor, so negatives work).
std::int64_t day_of_epoch_seconds(std::int64_t seconds);

/// Parses "YYYY-MM-DD" or "YYYY-MM-DDThh:mm:ss[.frac][Z]" as UTC.
/// Throws ValidationError on anything else.
std::int64_t parse_iso8601_utc(std::string_view text);

/// Day number -> "YYYY-MM-DDT00:00:00Z".
std::string format_day_iso(std::int64_t day);

}  // namespace quakecast
