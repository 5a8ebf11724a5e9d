#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace tvgnn {

using Date = std::chrono::sys_days;

/// Parses "YYYY-MM-DD"; throws ParseError on anything else.
Date parse_date(std::string_view text);
std::string format_date(Date d);
int year_of(Date d);
/// Calendar-day difference a - b.
long days_between(Date a, Date b);
bool is_weekday(Date d);

/// Calendar quarter, e.g. 2017Q1.
struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  static Quarter of(Date d);
  /// Parses "2017Q1"; throws ParseError.
  static Quarter parse(std::string_view text);

  std::string str() const;
  Date first_day() const;
  Date last_day() const;
  bool contains(Date d) const { return d >= first_day() && d <= last_day(); }
  Quarter next() const { return q == 4 ? Quarter{year + 1, 1} : Quarter{year, q + 1}; }

  friend auto operator<=>(const Quarter&, const Quarter&) = default;
};

}  // namespace tvgnn
