#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tvgnn/config.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/model.hpp"
#include "tvgnn/optim.hpp"

namespace tvgnn::pipeline {

/// Patience counter over a validation trace. Only a strict decrease counts as
/// an improvement.
struct EarlyStopping {
  std::size_t patience = 10;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t since_improvement = 0;

  explicit EarlyStopping(std::size_t patience) : patience(patience) {}
  /// Returns true when `value` improves on the best so far.
  bool observe(std::size_t epoch, double value);
  bool should_stop() const { return since_improvement >= patience; }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean step loss; NaN for epoch 0
  double val_mse = 0.0;
  bool improved = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  bool stopped_early = false;
};

struct TrainOptions {
  AdamConfig adam;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  /// Set each head's b2 to the mean training label before the first step.
  bool init_output_bias = true;
  std::function<void(const TvgnnModel&, const EpochRecord&)> on_epoch;

  static TrainOptions from(const ModelConfig& cfg);
};

/// Mean over the model's horizons of the pooled validation MSE.
double validation_mse(const TvgnnModel& model, std::span<const Sample> samples);

/// Epoch 0 scores the initial parameters. Every later epoch takes one Adam
/// step per training sample (full-graph masked loss), then scores the
/// validation set. Training stops after `patience` epochs without a strict
/// improvement and the best parameters are restored. Throws NumericError
/// naming the epoch if the loss stops being finite.
TrainHistory train_model(TvgnnModel& model, std::span<const Sample> train, std::span<const Sample> val,
                         const TrainOptions& opts, AdamState* state = nullptr);

struct BundleTraining {
  ModelBundle bundle;
  std::vector<TrainHistory> histories;  // one per model
};

BundleTraining train(const ModelConfig& cfg, std::span<const Sample> train, std::span<const Sample> val,
                     const TrainOptions& opts);
BundleTraining train(const ModelConfig& cfg, std::span<const Sample> train, std::span<const Sample> val);

struct TransductiveMasks {
  std::vector<char> train, val, test;
};

/// Orders nodes by (call_date, node_id) and cuts them by the given ratios,
/// rounding the train and validation counts. Throws DataError below 10 nodes.
TransductiveMasks transductive_split(const graph::QuarterGraph& graph, std::array<double, 3> ratios = {7, 1, 2});

/// Continues training a copy of `pretrained` on one quarter's masked nodes
/// with fresh Adam state. Output biases are left as they are.
BundleTraining fine_tune(const ModelBundle& pretrained, const Sample& train, const Sample& val,
                         const TrainOptions& opts);

}  // namespace tvgnn::pipeline
