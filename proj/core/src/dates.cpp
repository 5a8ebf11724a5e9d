#include "tvgnn/dates.hpp"

#include <charconv>
#include <cstdio>

#include "tvgnn/errors.hpp"

namespace tvgnn {

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const int y = parse_int(text.substr(0, 4), "year");
  const int m = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int year_of(Date d) { return static_cast<int>(std::chrono::year_month_day{d}.year()); }

long days_between(Date a, Date b) { return static_cast<long>((a - b).count()); }

bool is_weekday(Date d) {
  const std::chrono::weekday wd{d};
  return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

Quarter Quarter::of(Date d) {
  const std::chrono::year_month_day ymd{d};
  const auto m = static_cast<unsigned>(ymd.month());
  return {static_cast<int>(ymd.year()), static_cast<int>((m - 1) / 3 + 1)};
}

Quarter Quarter::parse(std::string_view text) {
  if (text.size() != 6 || (text[4] != 'Q' && text[4] != 'q')) {
    throw ParseError("invalid quarter '" + std::string(text) + "', expected e.g. 2017Q1");
  }
  const int y = parse_int(text.substr(0, 4), "quarter year");
  const int q = parse_int(text.substr(5, 1), "quarter number");
  if (q < 1 || q > 4) throw ParseError("quarter number must be 1..4 in '" + std::string(text) + "'");
  return {y, q};
}

std::string Quarter::str() const { return std::to_string(year) + "Q" + std::to_string(q); }

Date Quarter::first_day() const {
  return Date{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(3 * q - 2)} /
              std::chrono::day{1}};
}

Date Quarter::last_day() const { return next().first_day() - std::chrono::days{1}; }

}  // namespace tvgnn
