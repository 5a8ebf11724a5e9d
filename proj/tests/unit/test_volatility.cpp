#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "series.hpp"
#include "tvgnn/errors.hpp"
#include "tvgnn/rng.hpp"
#include "tvgnn/volatility.hpp"

using namespace tvgnn;
using namespace tvgnn::data;

TEST(Returns, HandArithmetic) {
  const auto s = fixture::weekday_series({100, 101, 99.98});
  EXPECT_NEAR(adjusted_return(s, 1), 0.01, 1e-15);
  EXPECT_NEAR(adjusted_return(s, 2), 99.98 / 101.0 - 1.0, 1e-15);
  EXPECT_NEAR(adjusted_return(s, 2), -0.0100990099, 1e-10);
  EXPECT_THROW(adjusted_return(s, 0), DataError);
  EXPECT_THROW(adjusted_return(s, 3), DataError);
}

TEST(Returns, ConstantAndDoubling) {
  const auto s = fixture::weekday_series({5, 5, 10});
  EXPECT_EQ(adjusted_return(s, 1), 0.0);
  EXPECT_EQ(adjusted_return(s, 2), 1.0);
}

TEST(Volatility, AlternatingReturns) {
  const auto s = fixture::series_from_returns({0.01, -0.01, 0.01, -0.01});
  EXPECT_NEAR(volatility(s, 1, 3), std::sqrt(4e-4 / 3.0), 1e-15);
  const std::vector<double> r = {0.01, -0.01, 0.01, -0.01};
  EXPECT_NEAR(volatility_of(r), std::sqrt(4e-4 / 3.0), 1e-15);
}

TEST(Volatility, MatchesIndependentOracle) {
  Rng rng(4);
  std::vector<double> prices = {50.0};
  for (int i = 0; i < 40; ++i) prices.push_back(prices.back() * std::exp(rng.normal(0.0, 0.02)));
  const auto s = fixture::weekday_series(prices);
  for (std::size_t t = 1; t + 15 < prices.size(); t += 3)
    for (std::size_t tau : {1u, 3u, 7u, 15u})
      EXPECT_NEAR(volatility(s, t, tau), oracle::volatility(prices, t, tau), 1e-14);
}

TEST(Volatility, ZeroForIdenticalReturnsAndShiftInvariant) {
  EXPECT_EQ(volatility_of(std::vector<double>{0.02, 0.02, 0.02}), 0.0);
  const std::vector<double> r = {0.01, -0.03, 0.02, 0.005};
  std::vector<double> shifted = r;
  for (auto& x : shifted) x += 0.7;
  EXPECT_NEAR(volatility_of(r), volatility_of(shifted), 1e-14);
  EXPECT_GT(volatility_of(r), 0.0);
}

TEST(Volatility, WindowOutOfRangeThrows) {
  const auto s = fixture::weekday_series({1, 2, 3, 4});
  EXPECT_THROW(volatility(s, 2, 2), DataError);
  EXPECT_THROW(volatility(s, 1, 0), DataError);
}

TEST(Volatility, PriceScalingLeavesEverythingUnchanged) {
  Rng rng(9);
  std::vector<double> p = {20.0};
  for (int i = 0; i < 60; ++i) p.push_back(p.back() * (1.0 + rng.normal(0.0, 0.02)));
  std::vector<double> q = p;
  for (auto& x : q) x *= 37.5;
  const auto a = fixture::weekday_series(p), b = fixture::weekday_series(q);
  const Date call = a.dates[30];
  for (int tau : kHorizons) {
    EXPECT_NEAR(label(a, call, tau), label(b, call, tau), 1e-12);
    EXPECT_NEAR(v_past(a, call, tau), v_past(b, call, tau), 1e-12);
  }
}

TEST(Label, LogTransformAndFloor) {
  EXPECT_EQ(log_volatility(1.0), 0.0);
  EXPECT_NEAR(log_volatility(0.0), std::log(1e-8), 1e-15);
  EXPECT_NEAR(log_volatility(0.0), -18.42, 0.005);
}

TEST(Label, WindowIsTheTauReturnsAfterTheCall) {
  // Returns after the call day are the only ones that matter.
  std::vector<double> r(30, 0.0);
  const std::size_t call_idx = 10;  // price index of the call day
  for (std::size_t k = 1; k <= 3; ++k) r[call_idx + k - 1] = (k % 2 ? 0.02 : -0.01);
  const auto s = fixture::series_from_returns(r);
  const std::vector<double> window = {0.02, -0.01, 0.02};
  EXPECT_NEAR(label(s, s.dates[call_idx], 3), std::log(oracle::volatility({1.0, 1.02, 1.02 * 0.99, 1.02 * 0.99 * 1.02}, 1, 2)),
              1e-12);
  EXPECT_NEAR(label(s, s.dates[call_idx], 3), std::log(volatility_of(window)), 1e-12);
}

TEST(Label, WeekendCallMapsToNextTradingDay) {
  Rng rng(2);
  std::vector<double> p = {10.0};
  for (int i = 0; i < 40; ++i) p.push_back(p.back() * (1.0 + rng.normal(0.0, 0.02)));
  const auto s = fixture::weekday_series(p, parse_date("2017-01-02"));
  // 2017-01-07 is a Saturday; the next trading day is Monday 2017-01-09.
  EXPECT_EQ(label(s, parse_date("2017-01-07"), 7), label(s, parse_date("2017-01-09"), 7));
}

TEST(Label, InsufficientFutureThrows) {
  const auto s = fixture::weekday_series({1, 2, 3, 4, 5});
  EXPECT_THROW(label(s, s.dates[2], 3), DataError);
  EXPECT_NO_THROW(label(s, s.dates[1], 3));
}

TEST(Label, RealisticScale) {
  Rng rng(6);
  std::vector<double> p = {100.0};
  for (int i = 0; i < 300; ++i) p.push_back(p.back() * (1.0 + rng.normal(0.0, 0.015)));
  const auto s = fixture::weekday_series(p);
  for (std::size_t t = 20; t + 20 < p.size(); t += 10)
    for (int tau : kHorizons) {
      const double y = label(s, s.dates[t], tau);
      EXPECT_GT(y, -7.0);
      EXPECT_LT(y, -2.0);
    }
}

TEST(VPast, ExcludesTheCallDay) {
  std::vector<double> r(30, 0.0);
  const std::size_t call_idx = 12;
  r[call_idx - 1] = 0.5;  // return realized on the call day
  auto s = fixture::series_from_returns(r);
  EXPECT_NEAR(v_past(s, s.dates[call_idx], 3), std::log(1e-8), 1e-12);
  // The day before the call is inside the window.
  std::vector<double> r2(30, 0.0);
  r2[call_idx - 2] = 0.5;
  s = fixture::series_from_returns(r2);
  EXPECT_GT(v_past(s, s.dates[call_idx], 3), -5.0);
}

TEST(VPast, IdenticalWindowsGiveTheLabel) {
  // The same three returns before and after the call day.
  std::vector<double> r = {0.0, 0.0, 0.0, 0.01, -0.02, 0.015, 0.3, 0.01, -0.02, 0.015, 0.0, 0.0};
  const auto s = fixture::series_from_returns(r);
  const Date call = s.dates[7];  // r[6] is realized on the call day
  EXPECT_NEAR(v_past(s, call, 3), label(s, call, 3), 1e-12);
}

TEST(VPast, InsufficientHistoryThrows) {
  const auto s = fixture::weekday_series({1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_THROW(v_past(s, s.dates[2], 3), DataError);
  EXPECT_NO_THROW(v_past(s, s.dates[4], 3));
}

TEST(VPast, TracksLabelOnStationarySeries) {
  Rng rng(8);
  std::vector<double> p = {100.0};
  for (int i = 0; i < 12000; ++i) p.push_back(p.back() * (1.0 + rng.normal(0.0, 0.02)));
  const auto s = fixture::weekday_series(p);
  for (int tau : kHorizons) {
    double diff = 0.0;
    int n = 0;
    for (std::size_t t = 40; t + 40 < p.size(); t += 40, ++n) diff += label(s, s.dates[t], tau) - v_past(s, s.dates[t], tau);
    EXPECT_LT(std::abs(diff / n), 0.06) << "tau " << tau;
  }
}

TEST(Label, CalendarWindowCountsCalendarDays) {
  Rng rng(3);
  std::vector<double> p = {100.0};
  for (int i = 0; i < 40; ++i) p.push_back(p.back() * (1.0 + rng.normal(0.0, 0.02)));
  const auto s = fixture::weekday_series(p, parse_date("2017-01-02"));  // Monday
  // A Monday call with a 7 calendar-day window sees Tue..Fri plus next Mon.
  const Date call = parse_date("2017-01-09");
  std::vector<double> r;
  for (std::size_t t = 0; t < s.size(); ++t) {
    const long gap = days_between(s.dates[t], call);
    if (gap >= 1 && gap <= 7) r.push_back(adjusted_return(s, t));
  }
  ASSERT_EQ(r.size(), 5u);
  EXPECT_NEAR(label(s, call, 7, WindowMode::CalendarDays), std::log(volatility_of(r)), 1e-12);
}
