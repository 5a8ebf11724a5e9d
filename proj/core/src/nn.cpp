#include "tvgnn/nn.hpp"

#include <cmath>

#include "tvgnn/errors.hpp"

namespace tvgnn::nn {

Linear Linear::init(ParamStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                    Rng& rng, bool with_bias) {
  Linear l;
  l.weight = store.add_uniform(prefix + ".w", {out, in}, in, rng);
  if (with_bias) l.bias = store.add_uniform(prefix + ".b", {1, out}, in, rng);
  return l;
}

Linear Linear::bind(const ParamStore& store, const std::string& prefix, bool with_bias) {
  Linear l;
  l.weight = store.get(prefix + ".w");
  if (with_bias) l.bias = store.get(prefix + ".b");
  return l;
}

ag::Var Linear::operator()(const ag::Var& x) const {
  ag::Var y = ag::matmul_nt(x, weight);
  return bias.defined() ? ag::add_row(y, bias) : y;
}

LayerNorm LayerNorm::init(ParamStore& store, const std::string& prefix, std::size_t width) {
  return {store.add(prefix + ".gain", Tensor({1, width}, 1.0)),
          store.add(prefix + ".bias", Tensor({1, width}, 0.0))};
}

LayerNorm LayerNorm::bind(const ParamStore& store, const std::string& prefix) {
  return {store.get(prefix + ".gain"), store.get(prefix + ".bias")};
}

void TransformerConfig::validate() const {
  if (heads == 0 || d_model == 0 || d_model % heads != 0) {
    throw ConfigError("transformer: d_model " + std::to_string(d_model) +
                      " is not divisible by heads " + std::to_string(heads));
  }
  if (ffn_mult == 0) throw ConfigError("transformer: ffn_mult must be positive");
}

TransformerEncoderLayer TransformerEncoderLayer::init(ParamStore& store, const std::string& prefix,
                                                      const TransformerConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = cfg.d_model, f = cfg.d_model * cfg.ffn_mult;
  TransformerEncoderLayer t;
  t.cfg = cfg;
  t.q = Linear::init(store, prefix + ".q", d, d, rng);
  t.k = Linear::init(store, prefix + ".k", d, d, rng);
  t.v = Linear::init(store, prefix + ".v", d, d, rng);
  t.o = Linear::init(store, prefix + ".o", d, d, rng);
  t.ff1 = Linear::init(store, prefix + ".ff1", d, f, rng);
  t.ff2 = Linear::init(store, prefix + ".ff2", f, d, rng);
  t.ln1 = LayerNorm::init(store, prefix + ".ln1", d);
  t.ln2 = LayerNorm::init(store, prefix + ".ln2", d);
  return t;
}

TransformerEncoderLayer TransformerEncoderLayer::bind(const ParamStore& store,
                                                      const std::string& prefix,
                                                      const TransformerConfig& cfg) {
  cfg.validate();
  TransformerEncoderLayer t;
  t.cfg = cfg;
  t.q = Linear::bind(store, prefix + ".q");
  t.k = Linear::bind(store, prefix + ".k");
  t.v = Linear::bind(store, prefix + ".v");
  t.o = Linear::bind(store, prefix + ".o");
  t.ff1 = Linear::bind(store, prefix + ".ff1");
  t.ff2 = Linear::bind(store, prefix + ".ff2");
  t.ln1 = LayerNorm::bind(store, prefix + ".ln1");
  t.ln2 = LayerNorm::bind(store, prefix + ".ln2");
  return t;
}

ag::Var TransformerEncoderLayer::operator()(const ag::Var& seq,
                                            std::vector<Tensor>* attention) const {
  if (seq.cols() != cfg.d_model) {
    throw DimensionError("transformer: input width " + std::to_string(seq.cols()) +
                         " != d_model " + std::to_string(cfg.d_model));
  }
  const std::size_t dk = cfg.d_model / cfg.heads;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  const ag::Var Q = q(seq), K = k(seq), V = v(seq);
  std::vector<ag::Var> heads;
  heads.reserve(cfg.heads);
  if (attention) attention->clear();
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    const ag::Var qh = ag::slice_cols(Q, h * dk, dk);
    const ag::Var kh = ag::slice_cols(K, h * dk, dk);
    const ag::Var vh = ag::slice_cols(V, h * dk, dk);
    const ag::Var weights = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), inv_sqrt_dk));
    if (attention) attention->push_back(weights.value());
    heads.push_back(ag::matmul(weights, vh));
  }
  const ag::Var attended = o(ag::concat_cols(heads));
  const ag::Var h1 = ln1(ag::add(seq, attended));
  const ag::Var ff = ff2(ag::relu(ff1(h1)));
  return ln2(ag::add(h1, ff));
}

}  // namespace tvgnn::nn
