#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace how {

using Date = std::chrono::year_month_day;

// Parses "YYYY-MM-DD"; throws std::runtime_error on malformed or
// non-existent dates (1998-13-01, 1999-02-29, ...).
Date parse_date(std::string_view s);

std::string format_date(const Date& d);

// Absolute difference in calendar days.
long days_between(const Date& a, const Date& b);

// Closed interval of calendar dates.
struct DateRange {
  Date first;
  Date last;

  bool contains(const Date& d) const;
  bool overlaps(const DateRange& other) const;
};

}  // namespace how
