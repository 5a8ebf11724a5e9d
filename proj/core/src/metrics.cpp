#include "tvgnn/metrics.hpp"

#include <cstdio>

#include "tvgnn/errors.hpp"
#include "tvgnn/volatility.hpp"

namespace tvgnn::pipeline {

double mse(std::span<const double> preds, std::span<const double> labels) {
  if (preds.size() != labels.size()) throw DataError("mse: predictions and labels differ in length");
  if (preds.empty()) throw DataError("mse: no labeled samples");
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) acc += (preds[i] - labels[i]) * (preds[i] - labels[i]);
  return acc / static_cast<double>(preds.size());
}

double r_squared(double mse_model, double mse_vpast) {
  if (!(mse_vpast > 0.0)) throw DataError("r_squared: baseline MSE must be positive");
  return 1.0 - mse_model / mse_vpast;
}

double mean_mse(double mse3, double mse7, double mse15) { return (mse3 + mse7 + mse15) / 3.0; }

double mean_mse(const MetricsReport& report) {
  double acc = 0.0;
  for (int tau : data::kHorizons) {
    auto it = report.horizons.find(tau);
    if (it == report.horizons.end()) throw DataError("mean_mse: horizon " + std::to_string(tau) + " missing");
    acc += it->second.mse;
  }
  return acc / 3.0;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["samples"] = samples;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& [tau, m] : horizons) {
    cols.push_back({{"tau", tau}, {"mse", m.mse}, {"vpast_mse", m.vpast_mse}, {"r2", m.r2}});
  }
  j["horizons"] = cols;
  if (horizons.size() == data::kHorizons.size()) {
    j["mean_mse"] = mean_mse(*this);
    double v = 0.0;
    for (const auto& [tau, m] : horizons) v += m.vpast_mse;
    j["vpast_mean_mse"] = v / 3.0;
  }
  return j;
}

std::string MetricsReport::table_row(const std::string& label) const {
  auto cell = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8.4f", v);
    return std::string(buf);
  };
  std::string row = label;
  row += " " + (horizons.size() == 3 ? cell(mean_mse(*this)) : std::string(8, '-'));
  for (int tau : data::kHorizons) row += " " + (horizons.count(tau) ? cell(horizons.at(tau).mse) : std::string(8, '-'));
  for (int tau : data::kHorizons) row += " " + (horizons.count(tau) ? cell(horizons.at(tau).r2) : std::string(8, '-'));
  return row;
}

bool Sample::uses(std::size_t node) const {
  if (!quarter->labeled[node]) return false;
  return mask.empty() || mask[node];
}

std::size_t Sample::count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < quarter->num_nodes(); ++i) n += uses(i) ? 1 : 0;
  return n;
}

std::vector<Sample> whole_quarters(std::span<const QuarterData* const> quarters) {
  std::vector<Sample> out;
  for (const auto* q : quarters) out.push_back({q, {}});
  return out;
}

namespace {

MetricsReport report_from(std::span<const Sample> samples, const std::vector<Tensor>& preds,
                          std::span<const int> horizons) {
  MetricsReport rep;
  for (const auto& s : samples) rep.samples += s.count();
  for (int tau : horizons) {
    const std::size_t col = horizon_column(tau);
    std::vector<double> p, y, b;
    for (std::size_t si = 0; si < samples.size(); ++si) {
      const auto& q = *samples[si].quarter;
      for (std::size_t i = 0; i < q.num_nodes(); ++i) {
        if (!samples[si].uses(i)) continue;
        p.push_back(preds[si](i, col));
        y.push_back(q.labels(i, col));
        b.push_back(q.v_past(i, col));
      }
    }
    HorizonMetrics m;
    m.mse = mse(p, y);
    m.vpast_mse = mse(b, y);
    m.r2 = r_squared(m.mse, m.vpast_mse);
    rep.horizons[tau] = m;
  }
  return rep;
}

}  // namespace

MetricsReport evaluate(const ModelBundle& bundle, std::span<const Sample> samples) {
  std::vector<Tensor> preds;
  for (const auto& s : samples) preds.push_back(bundle.predict(*s.quarter));
  return report_from(samples, preds, bundle.config.horizons);
}

MetricsReport vpast_report(std::span<const Sample> samples) {
  std::vector<Tensor> preds;
  for (const auto& s : samples) preds.push_back(s.quarter->v_past);
  return report_from(samples, preds, data::kHorizons);
}

}  // namespace tvgnn::pipeline
