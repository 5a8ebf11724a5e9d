#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/dataset.hpp"
#include "tvgnn/model.hpp"

namespace tvgnn::pipeline {

inline constexpr int kReportSchemaVersion = 1;

/// sum (pred - label)^2 / M. Throws DataError for M = 0 or a length mismatch.
double mse(std::span<const double> preds, std::span<const double> labels);

/// 1 - mse_model / mse_vpast. Throws DataError unless mse_vpast > 0.
double r_squared(double mse_model, double mse_vpast);

struct HorizonMetrics {
  double mse = 0.0;
  double vpast_mse = 0.0;
  double r2 = 0.0;
};

struct MetricsReport {
  std::map<int, HorizonMetrics> horizons;
  std::size_t samples = 0;  // M

  /// Table order: mean MSE3 MSE7 MSE15 R2_3 R2_7 R2_15.
  nlohmann::json to_json() const;
  std::string table_row(const std::string& label) const;
};

/// (MSE3 + MSE7 + MSE15) / 3. Throws DataError when a horizon is missing.
double mean_mse(const MetricsReport& report);
double mean_mse(double mse3, double mse7, double mse15);

/// A quarter plus the nodes whose labels may be used. An empty mask means
/// every labeled node.
struct Sample {
  const QuarterData* quarter = nullptr;
  std::vector<char> mask;

  bool uses(std::size_t node) const;
  std::size_t count() const;
};

std::vector<Sample> whole_quarters(std::span<const QuarterData* const> quarters);

/// Per-horizon MSE of `predict` against labels and of v_past against the
/// same labels, over the same sample set.
MetricsReport evaluate(const ModelBundle& bundle, std::span<const Sample> samples);

/// Report whose "model" is v_past itself (R2 = 0 for every horizon).
MetricsReport vpast_report(std::span<const Sample> samples);

}  // namespace tvgnn::pipeline
