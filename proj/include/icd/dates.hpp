#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace icd {

// Proleptic Gregorian calendar date. Ordering is chronological.
struct Date {
    int16_t year = 1970;
    uint8_t month = 1;
    uint8_t day = 1;

    auto operator<=>(const Date&) const = default;
};

// Days since 1970-01-01 (may be negative).
int64_t days_from_civil(const Date& d);
Date civil_from_days(int64_t z);
Date advance(const Date& d, int64_t days);

bool valid_date(const Date& d);

// Strict ISO-8601 "yyyy-mm-dd".
std::optional<Date> parse_date(std::string_view text);
std::string to_string(const Date& d);

}  // namespace icd
