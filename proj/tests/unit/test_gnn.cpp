#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tvgnn/errors.hpp"
#include "tvgnn/gnn.hpp"
#include "tvgnn/gradcheck.hpp"
#include "weights.hpp"

using namespace tvgnn;
using namespace tvgnn::gnn;

namespace {

const Quarter kQ{2017, 1};

data::CallRecord call(const std::string& company, const std::string& date) {
  data::CallRecord c;
  c.company_id = company;
  c.call_id = company + "@" + date;
  c.call_date = parse_date(date);
  return c;
}

graph::QuarterGraph make_graph(const std::vector<std::pair<std::string, std::string>>& calls,
                               const std::vector<data::RelationRecord>& rels) {
  std::vector<data::CallRecord> cs;
  for (const auto& [c, d] : calls) cs.push_back(call(c, d));
  return graph::build_quarter_graph(cs, rels, kQ);
}

// Five companies on two dates with a mix of forward and same-day edges.
graph::QuarterGraph five_node_graph() {
  return make_graph({{"A", "2017-02-01"}, {"B", "2017-02-01"}, {"C", "2017-02-04"}, {"D", "2017-02-04"},
                     {"E", "2017-02-04"}},
                    {{"A", "B", 2016, 0.6},
                     {"A", "C", 2016, 0.3},
                     {"B", "D", 2016, 0.9},
                     {"C", "D", 2016, 0.5},
                     {"A", "E", 2016, 0.2},
                     {"B", "C", 2016, 0.7}});
}

graph::QuarterGraph random_graph(std::size_t n, std::size_t dates, std::uint64_t seed, double density = 0.4) {
  Rng rng(seed);
  std::vector<std::pair<std::string, std::string>> calls;
  for (std::size_t i = 0; i < n; ++i)
    calls.push_back({fixture::company(i), format_date(kQ.first_day() + std::chrono::days{static_cast<long>(3 * rng.below(dates))})});
  std::vector<data::RelationRecord> rels;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(density)) rels.push_back({fixture::company(i), fixture::company(j), 2016, rng.uniform(0.2, 1.0)});
  return make_graph(calls, rels);
}

// Market oracle over the graph's date groups, expanded to one row per node.
oracle::Mat oracle_node_market(const graph::QuarterGraph& g, const oracle::Mat& v, const oracle::GruWeights& w) {
  const std::size_t d = v[0].size();
  std::vector<double> a(d, 0.0);
  oracle::Mat per_node(g.num_nodes());
  for (std::size_t k = 0; k < g.date_groups.size(); ++k) {
    oracle::Mat group;
    for (auto id : g.date_groups[k].nodes) group.push_back(v[id]);
    const long gap = k == 0 ? 0 : days_between(g.date_groups[k].date, g.date_groups[k - 1].date);
    const auto s = oracle::market_step(group, a, gap, w);
    a = s.a;
    for (auto id : g.date_groups[k].nodes) per_node[id] = s.m_prime;
  }
  return per_node;
}

oracle::Mat oracle_encoder(const graph::QuarterGraph& g, oracle::Mat v, const EncoderParams& p) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto market = oracle_node_market(g, v, fixture::gru_weights(p.layers[l].market));
    v = oracle::gat_layer(v, market, fixture::oracle_edges(g), fixture::gat_weights(p.layers[l].gat),
                          l + 1 == p.layers.size());
  }
  return v;
}

}  // namespace

TEST(Normalization, SelfLoopInclusiveInDegrees) {
  const auto g = five_node_graph();
  const auto t = NormalizationTable::build(g);
  // In-degree counts the self-loop: A <- {A, B}, D <- {B, C, D, E?}.
  std::map<std::string, std::size_t> deg;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) deg[g.nodes[i].company_id] = t.in_degree[i];
  EXPECT_EQ(deg["A"], 2u);
  EXPECT_EQ(deg["B"], 2u);
  EXPECT_EQ(deg["C"], 4u);  // self, A, B, D (same day)
  EXPECT_EQ(deg["D"], 3u);  // self, B, C
  EXPECT_EQ(deg["E"], 2u);  // self, A
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    EXPECT_DOUBLE_EQ(t.d_tilde[e], std::sqrt(double(t.in_degree[edge.src]) * double(t.in_degree[edge.dst])));
    EXPECT_GE(t.d_tilde[e], 1.0);
  }
}

TEST(Normalization, IsolatedNodeHasUnitNorm) {
  const auto g = make_graph({{"A", "2017-02-01"}}, {});
  EXPECT_EQ(NormalizationTable::build(g).d_tilde, std::vector<double>{1.0});
}

TEST(EdgeIndexBuild, RequiresSelfLoops) {
  auto g = five_node_graph();
  std::erase_if(g.edges, [](const auto& e) { return e.self_loop() && e.src == 2; });
  EXPECT_THROW(EdgeIndex::build(g), DataError);
}

TEST(EdgeAttention, OnlySelfLoopGivesFullWeight) {
  const auto g = make_graph({{"A", "2017-02-01"}, {"B", "2017-02-03"}}, {});
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(1);
  const auto p = GatParams::init(store, "g", 4, rng);
  const Tensor gamma = edge_attention(ag::constant(fixture::random_tensor(2, 4, rng)), edges, p).value();
  EXPECT_EQ(gamma, Tensor::column({1.0, 1.0}));
}

TEST(EdgeAttention, SymmetricNeighborsSplitEvenly) {
  // C hears from A and B, which share an embedding and identical edge features.
  const auto g = make_graph({{"A", "2017-02-01"}, {"B", "2017-02-01"}, {"C", "2017-02-05"}},
                            {{"A", "C", 2016, 0.5}, {"B", "C", 2016, 0.5}});
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(2);
  const auto p = GatParams::init(store, "g", 4, rng);
  Tensor v = fixture::random_tensor(3, 4, rng);
  for (std::size_t c = 0; c < 4; ++c) v(1, c) = v(0, c);
  const Tensor gamma = edge_attention(ag::constant(v), edges, p).value();
  std::vector<double> from_peers;
  for (std::size_t e = 0; e < edges.num_edges(); ++e)
    if (edges.dst[e] == 2 && edges.src[e] != 2) from_peers.push_back(gamma[e]);
  ASSERT_EQ(from_peers.size(), 2u);
  EXPECT_EQ(from_peers[0], from_peers[1]);
}

TEST(EdgeAttention, FourNeighborsMatchOracle) {
  const auto g = make_graph({{"A", "2017-02-01"}, {"B", "2017-02-02"}, {"C", "2017-02-03"}, {"D", "2017-02-06"},
                             {"E", "2017-02-09"}},
                            {{"A", "E", 2016, 0.3}, {"B", "E", 2016, 0.8}, {"C", "E", 2016, 0.5}, {"D", "E", 2016, 0.95}});
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(3);
  const auto p = GatParams::init(store, "g", 5, rng);
  const Tensor v = fixture::random_tensor(5, 5, rng);
  const Tensor gamma = edge_attention(ag::constant(v), edges, p).value();
  std::vector<double> want;
  oracle::gat_layer(fixture::to_mat(v), oracle::Mat(5, std::vector<double>(5, 0.0)), fixture::oracle_edges(g),
                    fixture::gat_weights(p), false, &want);
  for (std::size_t e = 0; e < edges.num_edges(); ++e) EXPECT_NEAR(gamma[e], want[e], 1e-12);
  EXPECT_EQ(std::count(edges.dst.begin(), edges.dst.end(), 4u), 5);
}

TEST(EdgeAttention, SumsToOnePerNeighborhood) {
  const auto g = random_graph(25, 6, 4);
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(4);
  const auto p = GatParams::init(store, "g", 6, rng);
  const Tensor gamma = edge_attention(ag::constant(fixture::random_tensor(25, 6, rng, 3.0)), edges, p).value();
  std::vector<double> total(25, 0.0);
  for (std::size_t e = 0; e < edges.num_edges(); ++e) total[edges.dst[e]] += gamma[e];
  for (double t : total) EXPECT_NEAR(t, 1.0, 1e-12);
}

TEST(GatLayer, IsolatedNodeClosedForm) {
  const auto g = make_graph({{"A", "2017-02-01"}}, {});
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(5);
  const auto p = GatParams::init(store, "g", 4, rng);
  const Tensor v = fixture::random_tensor(1, 4, rng), m = fixture::random_tensor(1, 4, rng);
  const Tensor gvec = add(v, m);
  const Tensor want = add(matmul_nt(gvec, p.w0.weight.value()), matmul_nt(gvec, p.w1.weight.value()));
  const auto out = gat_layer(edges, ag::constant(v), ag::constant(m), p, true);
  EXPECT_LT(max_abs_diff(out.embeddings.value(), want), 1e-15);
  const auto hidden = gat_layer(edges, ag::constant(v), ag::constant(m), p, false);
  for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(hidden.embeddings.value()[c], std::max(0.0, out.embeddings.value()[c]));
}

TEST(GatLayer, ZeroMarketIsPlainGat) {
  const auto g = five_node_graph();
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(6);
  const auto p = GatParams::init(store, "g", 4, rng);
  const Tensor v = fixture::random_tensor(5, 4, rng);
  const auto got = gat_layer(edges, ag::constant(v), ag::constant(Tensor::matrix(5, 4)), p, false);
  const auto want = oracle::gat_layer(fixture::to_mat(v), oracle::Mat(5, std::vector<double>(4, 0.0)),
                                      fixture::oracle_edges(g), fixture::gat_weights(p), false);
  EXPECT_LT(fixture::max_diff(want, got.embeddings.value()), 1e-12);
}

TEST(GatLayer, FiveNodesTwoDatesMatchOracle) {
  const auto g = five_node_graph();
  ASSERT_EQ(g.date_groups.size(), 2u);
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(7);
  const auto mp = market::MarketParams::init(store, "m", 6, rng);
  const auto p = GatParams::init(store, "g", 6, rng);
  const Tensor v = fixture::random_tensor(5, 6, rng);
  const auto tl = market::run_market_timeline(g.date_groups, ag::constant(v), mp);
  const auto node_market = ag::gather_rows(tl.output_matrix(), g.node_group);
  const auto want_market = oracle_node_market(g, fixture::to_mat(v), fixture::gru_weights(mp));
  EXPECT_LT(fixture::max_diff(want_market, node_market.value()), 1e-12);
  for (bool final_layer : {false, true}) {
    const auto got = gat_layer(edges, ag::constant(v), node_market, p, final_layer);
    const auto want = oracle::gat_layer(fixture::to_mat(v), want_market, fixture::oracle_edges(g), fixture::gat_weights(p),
                                        final_layer);
    EXPECT_LT(fixture::max_diff(want, got.embeddings.value()), 1e-10);
  }
}

TEST(GatLayer, MarketShapeMismatchThrows) {
  const auto g = five_node_graph();
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(8);
  const auto p = GatParams::init(store, "g", 4, rng);
  EXPECT_THROW(gat_layer(edges, ag::constant(Tensor::matrix(5, 4)), ag::constant(Tensor::matrix(2, 4)), p, true),
               DimensionError);
}

TEST(NetworkEncoder, MatchesComposedOracle) {
  const auto g = random_graph(12, 4, 9);
  const auto edges = EdgeIndex::build(g);
  for (std::size_t layers : {1u, 3u}) {
    ParamStore store;
    Rng rng(10 + layers);
    const auto p = EncoderParams::init(store, "net", 5, layers, rng);
    const Tensor v = fixture::random_tensor(12, 5, rng);
    const auto out = company_network_encoder(g, edges, ag::constant(v), p);
    EXPECT_EQ(out.embeddings.shape(), (Shape{12, 5}));
    EXPECT_EQ(out.gamma.size(), layers);
    EXPECT_EQ(out.timelines.size(), layers);
    EXPECT_LT(fixture::max_diff(oracle_encoder(g, fixture::to_mat(v), p), out.embeddings.value()), 1e-10);
  }
}

TEST(NetworkEncoder, OneLayerIsMarketThenGat) {
  const auto g = five_node_graph();
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(12);
  const auto p = EncoderParams::init(store, "net", 4, 1, rng);
  const auto v = ag::constant(fixture::random_tensor(5, 4, rng));
  const auto tl = market::run_market_timeline(g.date_groups, v, p.layers[0].market);
  const auto manual = gat_layer(edges, v, ag::gather_rows(tl.output_matrix(), g.node_group), p.layers[0].gat, true);
  EXPECT_EQ(company_network_encoder(g, edges, v, p).embeddings.value(), manual.embeddings.value());
}

TEST(NetworkEncoder, EarlierNodesIgnoreLaterPerturbations) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto g = random_graph(20, 5, 100 + seed, 0.5);
    const auto edges = EdgeIndex::build(g);
    ParamStore store;
    Rng rng(seed);
    const auto p = EncoderParams::init(store, "net", 6, 3, rng);
    const Tensor v = fixture::random_tensor(20, 6, rng);
    const Tensor base = company_network_encoder(g, edges, ag::constant(v), p).embeddings.value();
    for (std::size_t target = 0; target < 20; ++target) {
      Tensor w = v;
      for (std::size_t c = 0; c < 6; ++c) w(target, c) += 0.5;
      const Tensor pert = company_network_encoder(g, edges, ag::constant(w), p).embeddings.value();
      bool later_changed = false;
      for (std::size_t u = 0; u < 20; ++u) {
        const bool differs = std::equal(base.row_span(u).begin(), base.row_span(u).end(), pert.row_span(u).begin()) == false;
        if (g.nodes[u].call_date < g.nodes[target].call_date) EXPECT_FALSE(differs) << "node " << u << " target " << target;
        if (u == target) later_changed |= differs;
      }
      EXPECT_TRUE(later_changed);
    }
  }
}

TEST(NetworkEncoder, RelabelingPermutesOutputs) {
  Rng rng(13);
  std::vector<std::pair<std::string, std::string>> calls;
  for (std::size_t i = 0; i < 10; ++i)
    calls.push_back({fixture::company(i), format_date(kQ.first_day() + std::chrono::days{static_cast<long>(2 * rng.below(4))})});
  std::vector<data::RelationRecord> rels;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j)
      if (rng.bernoulli(0.4)) rels.push_back({fixture::company(i), fixture::company(j), 2016, rng.uniform(0.2, 1.0)});
  const std::vector<std::size_t> perm = {3, 7, 0, 9, 1, 5, 8, 2, 6, 4};  // new position -> old node
  std::vector<std::pair<std::string, std::string>> permuted;
  for (auto old : perm) permuted.push_back(calls[old]);
  const auto g1 = make_graph(calls, rels), g2 = make_graph(permuted, rels);

  ParamStore store;
  const auto p = EncoderParams::init(store, "net", 4, 2, rng);
  const Tensor v = fixture::random_tensor(10, 4, rng);
  Tensor vp = Tensor::matrix(10, 4);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t c = 0; c < 4; ++c) vp(i, c) = v(perm[i], c);
  const Tensor y1 = company_network_encoder(g1, EdgeIndex::build(g1), ag::constant(v), p).embeddings.value();
  const Tensor y2 = company_network_encoder(g2, EdgeIndex::build(g2), ag::constant(vp), p).embeddings.value();
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(y2(i, c), y1(perm[i], c), 1e-12);
}

TEST(NetworkEncoder, GradientsMatchFiniteDifferences) {
  const auto g = make_graph({{"A", "2017-02-01"}, {"B", "2017-02-01"}, {"C", "2017-02-03"}, {"D", "2017-02-03"},
                             {"E", "2017-02-07"}, {"F", "2017-02-08"}},
                            {{"A", "B", 2016, 0.6}, {"A", "C", 2016, 0.3}, {"B", "D", 2016, 0.9}, {"C", "E", 2016, 0.5},
                             {"D", "F", 2016, 0.4}, {"C", "D", 2016, 0.8}, {"A", "F", 2016, 0.25}});
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(14);
  const auto p = EncoderParams::init(store, "net", 4, 2, rng);
  const auto v = store.add("v", fixture::random_tensor(6, 4, rng));
  const Tensor probe = fixture::random_tensor(6, 4, rng);
  const auto report = grad_check(
      [&] { return ag::sum_all(ag::mul(company_network_encoder(g, edges, v, p).embeddings, ag::constant(probe))); },
      store);
  EXPECT_TRUE(report.passed()) << report.max_rel_error << " at " << report.worst_param;
}

TEST(NetworkEncoder, AttentionCsvHasOneRowPerEdgePerLayer) {
  const auto g = five_node_graph();
  const auto edges = EdgeIndex::build(g);
  ParamStore store;
  Rng rng(15);
  const auto p = EncoderParams::init(store, "net", 4, 2, rng);
  const auto out = company_network_encoder(g, edges, ag::constant(fixture::random_tensor(5, 4, rng)), p);
  const auto path = std::filesystem::temp_directory_path() / "tvgnn_attention.csv";
  write_attention_csv(path, edges, out.gamma);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "layer,src,dst,gamma,gamma_over_d");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2 * edges.num_edges());
}
