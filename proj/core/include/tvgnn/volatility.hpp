#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "tvgnn/dates.hpp"
#include "tvgnn/records.hpp"

namespace tvgnn::data {

/// Prediction horizons in trading days.
inline constexpr std::array<int, 3> kHorizons = {3, 7, 15};
/// Floor applied before taking the log of a volatility.
inline constexpr double kVolFloor = 1e-8;

/// How label and baseline windows are counted.
enum class WindowMode {
  TradingDays,   // the window holds exactly tau trading-day returns
  CalendarDays,  // the window holds every trading-day return within tau calendar days
};

/// r_t = p_t / p_{t-1} - 1. Throws DataError unless 1 <= t < size.
double adjusted_return(const PriceSeries& series, std::size_t t);

/// Dispersion of returns r_t .. r_{t+tau} (tau + 1 terms) around their mean,
/// divided by tau:
///   sqrt( sum_{i=0}^{tau} (r_{t+i} - mean)^2 / tau )
/// Throws DataError when the window leaves the series or tau < 1.
double volatility(const PriceSeries& series, std::size_t t, std::size_t tau);

/// Same estimator on an explicit return list (n >= 2 terms, divisor n - 1).
double volatility_of(std::span<const double> returns);

/// ln(max(v, kVolFloor)).
double log_volatility(double v);

/// Index of the first trading day on or after `d`.
std::optional<std::size_t> trading_index_on_or_after(const PriceSeries& series, Date d);

/// ln volatility of returns on trading days t+1 .. t+tau, t being the first
/// trading day on or after the call. Throws DataError when the future is too short.
double label(const PriceSeries& series, Date call_date, int tau,
             WindowMode mode = WindowMode::TradingDays);

/// ln volatility of returns on trading days t-tau .. t-1, i.e. the trailing
/// window that ends the day before the call. Throws DataError when history is too short.
double v_past(const PriceSeries& series, Date call_date, int tau,
              WindowMode mode = WindowMode::TradingDays);

}  // namespace tvgnn::data
