#include "tvgnn/market.hpp"

#include <cmath>

#include "tvgnn/errors.hpp"
#include "tvgnn/records.hpp"
#include "text_util.hpp"

namespace tvgnn::market {

MarketParams MarketParams::init(ParamStore& store, const std::string& prefix, std::size_t d, Rng& rng) {
  MarketParams p;
  p.d = d;
  auto square = [&](const std::string& name) { return store.add_uniform(prefix + "." + name, {d, d}, d, rng); };
  auto row = [&](const std::string& name) { return store.add_uniform(prefix + "." + name, {1, d}, d, rng); };
  p.w_k = square("w_k");
  p.w_q = row("w_q");
  p.w_z = square("w_z");
  p.u_z = square("u_z");
  p.b_z = row("b_z");
  p.w_r = square("w_r");
  p.u_r = square("u_r");
  p.b_r = row("b_r");
  p.w_h = square("w_h");
  p.u_h = square("u_h");
  p.b_h = row("b_h");
  p.w_d = store.add_uniform(prefix + ".w_d", {1, 1}, 1, rng);
  p.out = nn::Linear::init(store, prefix + ".out", d, d, rng);
  return p;
}

MarketParams MarketParams::bind(const ParamStore& store, const std::string& prefix) {
  MarketParams p;
  auto get = [&](const std::string& name) { return store.get(prefix + "." + name); };
  p.w_k = get("w_k");
  p.d = p.w_k.rows();
  p.w_q = get("w_q");
  p.w_z = get("w_z");
  p.u_z = get("u_z");
  p.b_z = get("b_z");
  p.w_r = get("w_r");
  p.u_r = get("u_r");
  p.b_r = get("b_r");
  p.w_h = get("w_h");
  p.u_h = get("u_h");
  p.b_h = get("b_h");
  p.w_d = get("w_d");
  p.out = nn::Linear::bind(store, prefix + ".out");
  return p;
}

Pooled market_attention(const ag::Var& embeddings, const MarketParams& p, PoolNorm norm) {
  if (embeddings.rows() == 0) throw DataError("market_attention: empty date group");
  if (embeddings.cols() != p.d) throw DimensionError("market_attention: embedding width != d");
  const ag::Var keys = ag::matmul_nt(embeddings, p.w_k);
  const ag::Var scores = ag::scale(ag::matmul_nt(p.w_q, keys), 1.0 / std::sqrt(static_cast<double>(p.d)));
  const ag::Var beta = norm == PoolNorm::Softmax ? ag::softmax_rows(scores) : ag::normalize_rows(scores);
  return {ag::matmul(beta, embeddings), beta};
}

double decay_coefficient(long gap_days, double w_d) {
  if (gap_days < 0) throw DataError("decay_coefficient: negative gap");
  return 1.0 / (1.0 + std::exp(-w_d / static_cast<double>(gap_days + 1)));
}

ag::Var decay_coefficient(long gap_days, const ag::Var& w_d) {
  if (gap_days < 0) throw DataError("decay_coefficient: negative gap");
  return ag::sigmoid(ag::scale(w_d, 1.0 / static_cast<double>(gap_days + 1)));
}

GruStep market_gru_step(const ag::Var& m, const ag::Var& a_prev, const ag::Var& delta, const MarketParams& p) {
  using namespace ag;
  const Var z = sigmoid(add_row(add(matmul_nt(m, p.w_z), matmul_nt(a_prev, p.u_z)), p.b_z));
  const Var r = sigmoid(add_row(add(matmul_nt(m, p.w_r), matmul_nt(a_prev, p.u_r)), p.b_r));
  const Var reset = mul_scalar(mul(r, a_prev), delta);
  const Var cand = tanh(add_row(add(matmul_nt(m, p.w_h), matmul_nt(reset, p.u_h)), p.b_h));
  // (1 - z) a + z a~  ==  a + z (a~ - a)
  const Var a = add(a_prev, mul(z, sub(cand, a_prev)));
  return {a, p.out(a)};
}

ag::Var MarketTimeline::output_matrix() const { return ag::concat_rows(output); }

MarketTimeline run_market_timeline(const std::vector<graph::DateGroup>& groups, const ag::Var& embeddings,
                                   const MarketParams& p, PoolNorm norm) {
  MarketTimeline tl;
  ag::Var a = ag::constant(Tensor::matrix(1, p.d));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    if (i > 0 && g.date <= groups[i - 1].date) throw DataError("run_market_timeline: date groups out of order");
    if (g.nodes.empty()) throw DataError("run_market_timeline: date group " + format_date(g.date) + " is empty");
    const long gap = i == 0 ? 0 : days_between(g.date, groups[i - 1].date);
    const Pooled pooled = market_attention(ag::gather_rows(embeddings, g.nodes), p, norm);
    const ag::Var delta = decay_coefficient(gap, p.w_d);
    const GruStep step = market_gru_step(pooled.m, a, delta, p);
    a = step.a;
    tl.dates.push_back(g.date);
    tl.pooled.push_back(pooled.m);
    tl.hidden.push_back(step.a);
    tl.output.push_back(step.m_prime);
    tl.beta.push_back(pooled.weights.value());
    tl.delta.push_back(delta.item());
    tl.gap.push_back(gap);
  }
  return tl;
}

void write_timeline_csv(const std::filesystem::path& path, const std::vector<graph::DateGroup>& groups,
                        const MarketTimeline& timeline) {
  if (groups.size() != timeline.size()) throw DimensionError("write_timeline_csv: groups and timeline differ in length");
  auto out = detail::open_out(path);
  out << "date,node_id,beta,delta,gap_days\n";
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t k = 0; k < groups[i].nodes.size(); ++k) {
      out << format_date(groups[i].date) << ',' << groups[i].nodes[k] << ','
          << data::format_real(timeline.beta[i][k]) << ',' << data::format_real(timeline.delta[i]) << ','
          << timeline.gap[i] << '\n';
    }
  }
}

}  // namespace tvgnn::market
