#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/dates.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/nn.hpp"
#include "tvgnn/params.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::market {

/// How the per-date pooling weights are normalized. `Literal` divides the raw
/// scores by their sum, which can go negative or blow up; it exists only so
/// tests can compare it against the softmax form.
enum class PoolNorm { Softmax, Literal };

struct MarketParams {
  std::size_t d = 0;
  ag::Var w_k;  // d x d
  ag::Var w_q;  // 1 x d
  // GRU gates: input weights W_*, recurrent weights U_*, biases b_* (1 x d).
  ag::Var w_z, u_z, b_z;
  ag::Var w_r, u_r, b_r;
  ag::Var w_h, u_h, b_h;
  ag::Var w_d;  // 1 x 1 decay scalar
  nn::Linear out;  // w_a, b_a

  static MarketParams init(ParamStore& store, const std::string& prefix, std::size_t d, Rng& rng);
  static MarketParams bind(const ParamStore& store, const std::string& prefix);
};

struct Pooled {
  ag::Var m;       // 1 x d
  ag::Var weights;  // 1 x k, one beta per node on the date
};

/// k_j = v_j W_k^T, e_j = k_j . w_q / sqrt(d), beta = softmax(e), m = sum beta_j v_j.
/// Throws DataError for an empty date.
Pooled market_attention(const ag::Var& embeddings, const MarketParams& p, PoolNorm norm = PoolNorm::Softmax);

/// sigma(w_d / (gap + 1)). Throws DataError for a negative gap.
double decay_coefficient(long gap_days, double w_d);
ag::Var decay_coefficient(long gap_days, const ag::Var& w_d);

struct GruStep {
  ag::Var a;        // new hidden state
  ag::Var m_prime;  // a W_a^T + b_a
};

/// z = sigma(m W_z^T + a U_z^T + b_z), r = sigma(m W_r^T + a U_r^T + b_r),
/// a~ = tanh(m W_h^T + (delta r a) U_h^T + b_h), a' = (1 - z) a + z a~.
GruStep market_gru_step(const ag::Var& m, const ag::Var& a_prev, const ag::Var& delta, const MarketParams& p);

struct MarketTimeline {
  std::vector<Date> dates;
  std::vector<ag::Var> pooled;  // m per date
  std::vector<ag::Var> hidden;  // a per date
  std::vector<ag::Var> output;  // m' per date
  std::vector<Tensor> beta;     // pooling weights per date
  std::vector<double> delta;    // decay coefficient per date
  std::vector<long> gap;        // days since the previous date (0 for the first)

  std::size_t size() const { return dates.size(); }
  /// m' stacked as T x d.
  ag::Var output_matrix() const;
};

/// Runs pooling and the GRU over date groups in order, starting from a zero
/// hidden state. `embeddings` holds one row per node of the graph.
MarketTimeline run_market_timeline(const std::vector<graph::DateGroup>& groups, const ag::Var& embeddings,
                                   const MarketParams& p, PoolNorm norm = PoolNorm::Softmax);

/// One row per (date, node): date, node_id, beta, delta, gap_days.
void write_timeline_csv(const std::filesystem::path& path, const std::vector<graph::DateGroup>& groups,
                        const MarketTimeline& timeline);

}  // namespace tvgnn::market
