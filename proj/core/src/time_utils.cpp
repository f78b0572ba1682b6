#include "quakecast/time_utils.hpp"

#include <cstdio>

#include "quakecast/errors.hpp"
#include "quakecast/text.hpp"

namespace quakecast {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    year = static_cast<int>(y + (month <= 2));
}

std::int64_t day_of_epoch_seconds(std::int64_t seconds) {
    std::int64_t d = seconds / 86400;
    if (seconds % 86400 < 0) --d;
    return d;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

int take_digits(std::string_view s, std::size_t pos, int count) {
    int v = 0;
    for (int i = 0; i < count; ++i) {
        if (pos + i >= s.size() || !is_digit(s[pos + i])) return -1;
        v = v * 10 + (s[pos + i] - '0');
    }
    return v;
}

[[noreturn]] void bad_time(std::string_view text) {
    throw ValidationError("invalid ISO-8601 UTC timestamp: '" + std::string(text) + "'");
}

}  // namespace

std::int64_t parse_iso8601_utc(std::string_view text) {
    std::string_view s = trim(text);
    const int year = take_digits(s, 0, 4);
    if (year < 0 || s.size() < 10 || s[4] != '-' || s[7] != '-') bad_time(text);
    const int month = take_digits(s, 5, 2);
    const int day = take_digits(s, 8, 2);
    if (month < 1 || month > 12 || day < 1 || day > 31) bad_time(text);

    int hh = 0, mm = 0, ss = 0;
    if (s.size() > 10) {
        if (s[10] != 'T' && s[10] != ' ') bad_time(text);
        if (s.size() < 19 || s[13] != ':' || s[16] != ':') bad_time(text);
        hh = take_digits(s, 11, 2);
        mm = take_digits(s, 14, 2);
        ss = take_digits(s, 17, 2);
        if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60) bad_time(text);
        std::size_t pos = 19;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && is_digit(s[pos])) ++pos;
            if (pos == start) bad_time(text);  // fractional seconds truncated
        }
        if (pos < s.size()) {
            if (s.substr(pos) != "Z" && s.substr(pos) != "+00:00") bad_time(text);
        }
    }
    return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_day_iso(std::int64_t day) {
    int y, m, d;
    civil_from_days(day, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT00:00:00Z", y, m, d);
    return buf;
}

}  // namespace quakecast
