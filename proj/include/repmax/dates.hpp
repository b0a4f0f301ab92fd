#pragma once

// Timezone-free calendar dates. All pipeline logic operates on workout days;
// time of day is never modeled.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace repmax {

struct Date {
  int year = 1970;
  int month = 1;  // 1-12
  int day = 1;    // 1-31

  auto operator<=>(const Date&) const = default;
};

// Days since 1970-01-01 (proleptic Gregorian). Negative before the epoch.
std::int64_t days_from_civil(const Date& d);

Date civil_from_days(std::int64_t days);

bool is_valid_date(const Date& d);

// Strict ISO-8601 "YYYY-MM-DD". Returns nullopt on any malformation.
std::optional<Date> parse_date(const std::string& text);

std::string format_date(const Date& d);

}  // namespace repmax
