#include "how/dates.hpp"

#include <charconv>
#include <cstdlib>
#include <stdexcept>

namespace how {

namespace {

int parse_int_field(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::runtime_error("invalid date component '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
    throw std::runtime_error("invalid date '" + std::string(s) +
                             "', expected YYYY-MM-DD");
  }
  int y = parse_int_field(s.substr(0, 4));
  int m = parse_int_field(s.substr(5, 2));
  int d = parse_int_field(s.substr(8, 2));
  Date date{std::chrono::year{y}, std::chrono::month{unsigned(m)},
            std::chrono::day{unsigned(d)}};
  if (!date.ok()) {
    throw std::runtime_error("invalid date '" + std::string(s) + "'");
  }
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(d.year()),
                unsigned(d.month()), unsigned(d.day()));
  return buf;
}

long days_between(const Date& a, const Date& b) {
  auto diff = std::chrono::sys_days(a) - std::chrono::sys_days(b);
  long n = diff.count();
  return n < 0 ? -n : n;
}

bool DateRange::contains(const Date& d) const {
  auto x = std::chrono::sys_days(d);
  return x >= std::chrono::sys_days(first) && x <= std::chrono::sys_days(last);
}

bool DateRange::overlaps(const DateRange& other) const {
  return std::chrono::sys_days(first) <= std::chrono::sys_days(other.last) &&
         std::chrono::sys_days(other.first) <= std::chrono::sys_days(last);
}

}  // namespace how
