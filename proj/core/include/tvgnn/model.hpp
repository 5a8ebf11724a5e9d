#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "tvgnn/config.hpp"
#include "tvgnn/dataset.hpp"
#include "tvgnn/dialogue.hpp"
#include "tvgnn/gnn.hpp"
#include "tvgnn/params.hpp"

namespace tvgnn::pipeline {

struct ForwardResult {
  ag::Var initial;      // dialogue embeddings, n x d
  gnn::EncoderOutput encoder;
  ag::Var predictions;  // n x horizons().size()
};

/// Dialogue encoder, company network encoder and one output MLP per horizon,
/// all parameters in one store:
///   y = relu(v W1^T + b1) w2^T + b2
class TvgnnModel {
 public:
  /// w2 starts at zero and b2 at zero, so every head initially predicts b2.
  static TvgnnModel create(const ModelConfig& cfg, std::vector<int> horizons, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const std::vector<int>& horizons() const { return horizons_; }
  std::uint64_t seed() const { return seed_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  TvgnnModel clone() const;

  ag::Var embed_calls(std::span<const dialogue::EncodedCall> calls) const;
  ForwardResult forward(const QuarterData& q) const;
  /// Skips the dialogue encoder and starts from the given embeddings.
  ForwardResult forward_from_embeddings(const QuarterData& q, const ag::Var& initial) const;

  /// Sets b2 of the head for `tau`.
  void set_output_bias(int tau, double value);

 private:
  ModelConfig cfg_;
  std::vector<int> horizons_;
  std::uint64_t seed_ = 0;
  ParamStore params_;
};

/// Models covering horizons 3, 7 and 15: three single-horizon models by
/// default, or one joint model.
struct ModelBundle {
  ModelConfig config;
  std::vector<TvgnnModel> models;

  static ModelBundle create(const ModelConfig& cfg);
  ModelBundle clone() const;

  /// Model responsible for `tau`; throws ConfigError when none is.
  const TvgnnModel& model_for(int tau) const;
  /// n x 3 predictions in horizon order (3, 7, 15); columns for horizons the
  /// bundle does not cover are NaN.
  Tensor predict(const QuarterData& q) const;
};

/// Self-describing binary: magic, version, seed, config text, then each
/// model's horizons and parameters (name, shape, values), then a fingerprint.
void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::filesystem::path& path);

}  // namespace tvgnn::pipeline
