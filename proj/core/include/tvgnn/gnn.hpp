#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/market.hpp"
#include "tvgnn/nn.hpp"
#include "tvgnn/params.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::gnn {

inline constexpr std::size_t kEdgeFeatures = 2;  // temporal weight, similarity
inline constexpr double kLeakySlope = 0.01;

/// Per-edge D~_ij = sqrt(indeg(i) * indeg(j)), in-degrees counted over the
/// edge list and therefore including the self-loop. An isolated node has
/// D~_ii = 1.
struct NormalizationTable {
  std::vector<std::size_t> in_degree;  // per node
  std::vector<double> d_tilde;         // per edge, aligned with graph.edges

  static NormalizationTable build(const graph::QuarterGraph& graph);
};

/// Edge arrays in the layout the layer kernels consume.
struct EdgeIndex {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
  Tensor features;    // E x 2
  Tensor inv_d_tilde;  // E x 1
  NormalizationTable norm;

  static EdgeIndex build(const graph::QuarterGraph& graph);
  std::size_t num_edges() const { return src.size(); }
};

struct GatParams {
  nn::Linear w0;         // message weight, d -> d
  nn::Linear w1;         // self weight, d -> d
  nn::Linear attn_pair;  // 2d -> d
  nn::Linear attn_edge;  // 2 -> d

  static GatParams init(ParamStore& store, const std::string& prefix, std::size_t d, Rng& rng);
  static GatParams bind(const ParamStore& store, const std::string& prefix);
};

/// score_e = LeakyReLU( ((v_dst | v_src) W_pair^T) . (e W_edge^T) ), then
/// gamma = softmax of the scores over each destination's in-edges. Returns E x 1.
ag::Var edge_attention(const ag::Var& embeddings, const EdgeIndex& edges, const GatParams& p);

struct GatOutput {
  ag::Var embeddings;  // n x d
  ag::Var gamma;       // E x 1
};

/// g_i = v_i + m'_i, then
/// v_i' = act( sum_{j in N(i)} (gamma_ij / D~_ij) g_j W0^T + g_i W1^T ),
/// with act = ReLU unless `final_layer`, where it is the identity.
/// `node_market` holds the market state of each node's date (n x d).
GatOutput gat_layer(const EdgeIndex& edges, const ag::Var& embeddings, const ag::Var& node_market,
                    const GatParams& p, bool final_layer);

struct EncoderLayerParams {
  market::MarketParams market;
  GatParams gat;
};

struct EncoderParams {
  std::vector<EncoderLayerParams> layers;

  static EncoderParams init(ParamStore& store, const std::string& prefix, std::size_t d, std::size_t num_layers,
                            Rng& rng);
  static EncoderParams bind(const ParamStore& store, const std::string& prefix, std::size_t num_layers);
};

struct EncoderOutput {
  ag::Var embeddings;  // final layer, n x d
  std::vector<Tensor> gamma;  // per layer, E x 1
  std::vector<market::MarketTimeline> timelines;
};

/// For each layer: market encoder over the previous embeddings grouped by
/// date, then a GAT layer fed with those market states.
EncoderOutput company_network_encoder(const graph::QuarterGraph& graph, const EdgeIndex& edges,
                                      const ag::Var& initial, const EncoderParams& params,
                                      market::PoolNorm norm = market::PoolNorm::Softmax);

/// Columns: layer (1-based), src, dst, gamma, gamma_over_d. One row per edge per layer.
void write_attention_csv(const std::filesystem::path& path, const EdgeIndex& edges,
                         const std::vector<Tensor>& gamma);

}  // namespace tvgnn::gnn
