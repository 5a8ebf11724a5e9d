#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/params.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::nn {

/// y = x W^T + b with W (out x in).
struct Linear {
  ag::Var weight;
  ag::Var bias;  // undefined when the layer has no bias

  static Linear init(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                     Rng& rng, bool with_bias = true);
  static Linear bind(const ParamStore& store, const std::string& prefix, bool with_bias = true);

  ag::Var operator()(const ag::Var& x) const;
};

struct LayerNorm {
  ag::Var gain;
  ag::Var bias;

  static LayerNorm init(ParamStore& store, const std::string& prefix, std::size_t width);
  static LayerNorm bind(const ParamStore& store, const std::string& prefix);

  ag::Var operator()(const ag::Var& x) const { return ag::layer_norm_rows(x, gain, bias); }
};

struct TransformerConfig {
  std::size_t d_model = 64;
  std::size_t heads = 8;
  std::size_t ffn_mult = 4;

  /// Throws ConfigError when d_model is not divisible by heads.
  void validate() const;
};

/// Post-norm encoder layer:
///   h   = LN(x + MHA(x))
///   out = LN(h + W2 relu(W1 h + b1) + b2)
/// No positional signal is added here; order must already be in the input.
struct TransformerEncoderLayer {
  TransformerConfig cfg;
  Linear q, k, v, o;
  Linear ff1, ff2;
  LayerNorm ln1, ln2;

  static TransformerEncoderLayer init(ParamStore& store, const std::string& prefix,
                                      const TransformerConfig& cfg, Rng& rng);
  static TransformerEncoderLayer bind(const ParamStore& store, const std::string& prefix,
                                      const TransformerConfig& cfg);

  /// `attention`, when non-null, receives one (n x n) weight matrix per head.
  ag::Var operator()(const ag::Var& seq, std::vector<Tensor>* attention = nullptr) const;
};

}  // namespace tvgnn::nn
