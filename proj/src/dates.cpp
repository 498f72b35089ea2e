#include "icd/dates.hpp"

#include <charconv>
#include <cstdio>

namespace icd {

// Civil-calendar conversions after Howard Hinnant's chrono-compatible
// algorithms (public domain).
int64_t days_from_civil(const Date& d) {
    int64_t y = d.year;
    const int64_t m = d.month;
    const int64_t dd = d.day;
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int64_t yoe = y - era * 400;
    const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
    const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int64_t doe = z - era * 146097;
    const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = yoe + era * 400;
    const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int64_t mp = (5 * doy + 2) / 153;
    const int64_t dd = doy - (153 * mp + 2) / 5 + 1;
    const int64_t m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int16_t>(y + (m <= 2)), static_cast<uint8_t>(m),
                static_cast<uint8_t>(dd)};
}

Date advance(const Date& d, int64_t days) { return civil_from_days(days_from_civil(d) + days); }

bool valid_date(const Date& d) {
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    static constexpr int lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int len = lengths[d.month - 1];
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) len = 29;
    return d.day <= len;
}

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto num = [&](size_t pos, size_t n, int& out) {
        auto res = std::from_chars(text.data() + pos, text.data() + pos + n, out);
        return res.ec == std::errc{} && res.ptr == text.data() + pos + n;
    };
    int y = 0, m = 0, d = 0;
    if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
    Date date{static_cast<int16_t>(y), static_cast<uint8_t>(m), static_cast<uint8_t>(d)};
    if (!valid_date(date)) return std::nullopt;
    return date;
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, static_cast<unsigned>(d.month),
                  static_cast<unsigned>(d.day));
    return buf;
}

}  // namespace icd
