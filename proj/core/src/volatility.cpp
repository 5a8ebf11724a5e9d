#include "tvgnn/volatility.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tvgnn/errors.hpp"

namespace tvgnn::data {

double adjusted_return(const PriceSeries& series, std::size_t t) {
  if (t < 1 || t >= series.size()) {
    throw DataError("adjusted_return: index " + std::to_string(t) + " out of range for '" +
                    series.company_id + "' with " + std::to_string(series.size()) + " prices");
  }
  return series.adjusted_close[t] / series.adjusted_close[t - 1] - 1.0;
}

double volatility_of(std::span<const double> returns) {
  if (returns.size() < 2) throw DataError("volatility: need at least two returns");
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(returns.size() - 1));
}

double volatility(const PriceSeries& series, std::size_t t, std::size_t tau) {
  if (tau < 1) throw DataError("volatility: tau must be at least 1");
  if (t < 1 || t + tau >= series.size()) {
    throw DataError("volatility: window [" + std::to_string(t) + ", " + std::to_string(t + tau) +
                    "] exceeds the data for '" + series.company_id + "'");
  }
  std::vector<double> r(tau + 1);
  for (std::size_t i = 0; i <= tau; ++i) r[i] = adjusted_return(series, t + i);
  return volatility_of(r);
}

double log_volatility(double v) { return std::log(std::max(v, kVolFloor)); }

std::optional<std::size_t> trading_index_on_or_after(const PriceSeries& series, Date d) {
  auto it = std::lower_bound(series.dates.begin(), series.dates.end(), d);
  if (it == series.dates.end()) return std::nullopt;
  return static_cast<std::size_t>(it - series.dates.begin());
}

namespace {

std::vector<double> calendar_window(const PriceSeries& series, Date from, Date to) {
  std::vector<double> r;
  auto it = std::lower_bound(series.dates.begin(), series.dates.end(), from);
  for (; it != series.dates.end() && *it <= to; ++it) {
    const auto idx = static_cast<std::size_t>(it - series.dates.begin());
    if (idx >= 1) r.push_back(adjusted_return(series, idx));
  }
  return r;
}

void require_tau(int tau) {
  if (tau < 2) throw DataError("tau must be at least 2, got " + std::to_string(tau));
}

}  // namespace

double label(const PriceSeries& series, Date call_date, int tau, WindowMode mode) {
  require_tau(tau);
  if (mode == WindowMode::CalendarDays) {
    const auto r = calendar_window(series, call_date + std::chrono::days{1},
                                   call_date + std::chrono::days{tau});
    if (r.size() < 2) throw DataError("label: fewer than two returns in the calendar window");
    return log_volatility(volatility_of(r));
  }
  const auto t = trading_index_on_or_after(series, call_date);
  const auto span = static_cast<std::size_t>(tau);
  if (!t || *t + span >= series.size()) {
    throw DataError("label: insufficient future prices for '" + series.company_id + "' after " +
                    format_date(call_date));
  }
  return log_volatility(volatility(series, *t + 1, span - 1));
}

double v_past(const PriceSeries& series, Date call_date, int tau, WindowMode mode) {
  require_tau(tau);
  if (mode == WindowMode::CalendarDays) {
    const auto r = calendar_window(series, call_date - std::chrono::days{tau},
                                   call_date - std::chrono::days{1});
    if (r.size() < 2) throw DataError("v_past: fewer than two returns in the calendar window");
    return log_volatility(volatility_of(r));
  }
  const auto t = trading_index_on_or_after(series, call_date);
  const auto span = static_cast<std::size_t>(tau);
  // When the call falls after the last trading day, t is one past the end.
  const std::size_t anchor = t ? *t : series.size();
  if (anchor < span + 1) {
    throw DataError("v_past: insufficient history for '" + series.company_id + "' before " +
                    format_date(call_date));
  }
  return log_volatility(volatility(series, anchor - span, span - 1));
}

}  // namespace tvgnn::data
