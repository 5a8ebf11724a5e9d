#include <benchmark/benchmark.h>

#include "tvgnn/autograd.hpp"
#include "tvgnn/dataset.hpp"
#include "tvgnn/dialogue.hpp"
#include "tvgnn/model.hpp"
#include "tvgnn/rng.hpp"
#include "tvgnn/synth.hpp"
#include "tvgnn/tensor.hpp"

using namespace tvgnn;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (auto& x : t.storage()) x = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(128)->Arg(256);

// One call through the dialogue encoder at the reference widths.
void BM_DialogueEncode(benchmark::State& state) {
  dialogue::DialogueConfig cfg;
  cfg.sentence_dim = 768;
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  data::CallRecord call;
  call.company_id = "A";
  call.call_id = "A-1";
  call.call_date = parse_date("2017-02-01");
  for (std::size_t j = 0; j < n; ++j) {
    data::Sentence s;
    s.position = j;
    s.utterance_idx = j / 3;
    s.part = j < n / 2 ? data::Part::Presentation : data::Part::QA;
    s.role = (j / 3) % 2 ? data::Role::Analyst : data::Role::Executive;
    s.vector = std::vector<double>(cfg.sentence_dim);
    for (auto& x : *s.vector) x = rng.normal(0.0, 0.1);
    call.sentences.push_back(std::move(s));
  }
  ParamStore store;
  const auto enc = dialogue::DialogueEncoder::init(store, "dialogue", cfg, rng);
  const auto encoded = dialogue::prepare_call(call, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(enc(encoded).value());
}
BENCHMARK(BM_DialogueEncode)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

struct SynthQuarter {
  pipeline::ModelConfig cfg;
  pipeline::Dataset data;
  SynthQuarter(std::size_t companies) {
    data::SynthConfig sc;
    sc.num_companies = companies;
    sc.num_quarters = 1;
    sc.start_year = 2017;
    const auto syn = data::gen_synthetic(sc, 3);
    cfg.sentence_dim = sc.sentence_dim;
    cfg.joint_heads = true;
    data = pipeline::assemble_dataset(syn.transcripts, syn.prices, syn.relations, cfg);
  }
};

void BM_ForwardQuarter(benchmark::State& state) {
  const SynthQuarter sq(static_cast<std::size_t>(state.range(0)));
  const auto model = pipeline::TvgnnModel::create(sq.cfg, {3, 7, 15}, 4);
  const auto& q = sq.data.quarters.front();
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(q).predictions.value());
  state.counters["edges"] = static_cast<double>(q.graph.edges.size());
}
BENCHMARK(BM_ForwardQuarter)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_ForwardBackwardQuarter(benchmark::State& state) {
  const SynthQuarter sq(static_cast<std::size_t>(state.range(0)));
  auto model = pipeline::TvgnnModel::create(sq.cfg, {3, 7, 15}, 4);
  const auto& q = sq.data.quarters.front();
  std::vector<char> mask(q.labels.size(), 0);
  for (std::size_t i = 0; i < q.num_nodes(); ++i)
    for (std::size_t k = 0; k < 3; ++k) mask[i * 3 + k] = q.labeled[i];
  Tensor target = q.labels;
  for (auto& x : target.storage())
    if (x != x) x = 0.0;
  for (auto _ : state) {
    model.params().zero_grad();
    ag::backward(ag::masked_mse(model.forward(q).predictions, target, mask));
  }
}
BENCHMARK(BM_ForwardBackwardQuarter)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
