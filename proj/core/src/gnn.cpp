#include "tvgnn/gnn.hpp"

#include <array>
#include <cmath>

#include "tvgnn/errors.hpp"
#include "tvgnn/records.hpp"
#include "text_util.hpp"

namespace tvgnn::gnn {

NormalizationTable NormalizationTable::build(const graph::QuarterGraph& graph) {
  NormalizationTable t;
  t.in_degree.assign(graph.num_nodes(), 0);
  for (const auto& e : graph.edges) {
    if (e.dst >= graph.num_nodes() || e.src >= graph.num_nodes()) throw DataError("edge endpoint out of range");
    ++t.in_degree[e.dst];
  }
  t.d_tilde.reserve(graph.edges.size());
  for (const auto& e : graph.edges) {
    t.d_tilde.push_back(std::sqrt(static_cast<double>(t.in_degree[e.dst]) * static_cast<double>(t.in_degree[e.src])));
  }
  return t;
}

EdgeIndex EdgeIndex::build(const graph::QuarterGraph& graph) {
  EdgeIndex idx;
  idx.num_nodes = graph.num_nodes();
  idx.norm = NormalizationTable::build(graph);
  const std::size_t E = graph.edges.size();
  idx.features = Tensor::matrix(E, kEdgeFeatures);
  idx.inv_d_tilde = Tensor::matrix(E, 1);
  std::vector<char> has_self(idx.num_nodes, 0);
  for (std::size_t e = 0; e < E; ++e) {
    const auto& edge = graph.edges[e];
    idx.src.push_back(edge.src);
    idx.dst.push_back(edge.dst);
    idx.features(e, 0) = edge.temporal_weight;
    idx.features(e, 1) = edge.similarity;
    idx.inv_d_tilde(e, 0) = 1.0 / idx.norm.d_tilde[e];
    if (edge.self_loop()) has_self[edge.src] = 1;
  }
  for (std::size_t i = 0; i < idx.num_nodes; ++i) {
    if (!has_self[i]) throw DataError("node " + std::to_string(i) + " has no self-loop");
  }
  return idx;
}

GatParams GatParams::init(ParamStore& store, const std::string& prefix, std::size_t d, Rng& rng) {
  return {nn::Linear::init(store, prefix + ".w0", d, d, rng, false),
          nn::Linear::init(store, prefix + ".w1", d, d, rng, false),
          nn::Linear::init(store, prefix + ".attn_pair", 2 * d, d, rng, false),
          nn::Linear::init(store, prefix + ".attn_edge", kEdgeFeatures, d, rng, false)};
}

GatParams GatParams::bind(const ParamStore& store, const std::string& prefix) {
  return {nn::Linear::bind(store, prefix + ".w0", false), nn::Linear::bind(store, prefix + ".w1", false),
          nn::Linear::bind(store, prefix + ".attn_pair", false), nn::Linear::bind(store, prefix + ".attn_edge", false)};
}

ag::Var edge_attention(const ag::Var& embeddings, const EdgeIndex& edges, const GatParams& p) {
  if (embeddings.rows() != edges.num_nodes) throw DimensionError("edge_attention: embedding rows != node count");
  const std::array<ag::Var, 2> pair = {ag::gather_rows(embeddings, edges.dst), ag::gather_rows(embeddings, edges.src)};
  const ag::Var lhs = p.attn_pair(ag::concat_cols(pair));
  const ag::Var rhs = p.attn_edge(ag::constant(edges.features));
  const ag::Var scores = ag::leaky_relu(ag::row_sum(ag::mul(lhs, rhs)), kLeakySlope);
  return ag::segment_softmax(scores, edges.dst, edges.num_nodes);
}

GatOutput gat_layer(const EdgeIndex& edges, const ag::Var& embeddings, const ag::Var& node_market,
                    const GatParams& p, bool final_layer) {
  if (node_market.rows() != embeddings.rows() || node_market.cols() != embeddings.cols()) {
    throw DimensionError("gat_layer: market states " + shape_str(node_market.shape()) + " do not match embeddings " +
                         shape_str(embeddings.shape()));
  }
  const ag::Var gamma = edge_attention(embeddings, edges, p);
  const ag::Var g = ag::add(embeddings, node_market);
  const ag::Var coef = ag::mul(gamma, ag::constant(edges.inv_d_tilde));
  const ag::Var messages = ag::mul_rows(ag::gather_rows(p.w0(g), edges.src), coef);
  const ag::Var pre = ag::add(ag::scatter_add_rows(messages, edges.dst, edges.num_nodes), p.w1(g));
  return {final_layer ? pre : ag::relu(pre), gamma};
}

EncoderParams EncoderParams::init(ParamStore& store, const std::string& prefix, std::size_t d,
                                  std::size_t num_layers, Rng& rng) {
  EncoderParams ep;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    auto m = market::MarketParams::init(store, base + ".market", d, rng);
    auto g = GatParams::init(store, base + ".gat", d, rng);
    ep.layers.push_back({std::move(m), std::move(g)});
  }
  return ep;
}

EncoderParams EncoderParams::bind(const ParamStore& store, const std::string& prefix, std::size_t num_layers) {
  EncoderParams ep;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::string base = prefix + ".layer" + std::to_string(l);
    ep.layers.push_back({market::MarketParams::bind(store, base + ".market"), GatParams::bind(store, base + ".gat")});
  }
  return ep;
}

EncoderOutput company_network_encoder(const graph::QuarterGraph& graph, const EdgeIndex& edges,
                                      const ag::Var& initial, const EncoderParams& params, market::PoolNorm norm) {
  if (params.layers.empty()) throw ConfigError("company_network_encoder: need at least one layer");
  if (initial.rows() != graph.num_nodes()) throw DimensionError("company_network_encoder: embedding rows != nodes");
  if (graph.node_group.size() != graph.num_nodes()) throw DataError("company_network_encoder: date groups not built");
  EncoderOutput out;
  ag::Var v = initial;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& lp = params.layers[l];
    auto timeline = market::run_market_timeline(graph.date_groups, v, lp.market, norm);
    const ag::Var node_market = ag::gather_rows(timeline.output_matrix(), graph.node_group);
    auto res = gat_layer(edges, v, node_market, lp.gat, l + 1 == params.layers.size());
    v = res.embeddings;
    out.gamma.push_back(res.gamma.value());
    out.timelines.push_back(std::move(timeline));
  }
  out.embeddings = v;
  return out;
}

void write_attention_csv(const std::filesystem::path& path, const EdgeIndex& edges, const std::vector<Tensor>& gamma) {
  auto out = detail::open_out(path);
  out << "layer,src,dst,gamma,gamma_over_d\n";
  for (std::size_t l = 0; l < gamma.size(); ++l) {
    if (gamma[l].size() != edges.num_edges()) throw DimensionError("write_attention_csv: gamma length != edges");
    for (std::size_t e = 0; e < edges.num_edges(); ++e) {
      out << l + 1 << ',' << edges.src[e] << ',' << edges.dst[e] << ',' << data::format_real(gamma[l][e]) << ','
          << data::format_real(gamma[l][e] * edges.inv_d_tilde[e]) << '\n';
    }
  }
}

}  // namespace tvgnn::gnn
