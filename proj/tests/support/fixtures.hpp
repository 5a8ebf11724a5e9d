#pragma once

// Small hand-sized inputs shared by unit and acceptance tests.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tvgnn/config.hpp"
#include "tvgnn/dataset.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/records.hpp"
#include "tvgnn/rng.hpp"
#include "tvgnn/tensor.hpp"

namespace fixture {

using namespace tvgnn;

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor t = Tensor::matrix(rows, cols);
  for (auto& x : t.storage()) x = rng.normal(0.0, scale);
  return t;
}

inline oracle::Mat to_mat(const Tensor& t) {
  oracle::Mat m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t(i, j);
  return m;
}

inline Tensor from_mat(const oracle::Mat& m) {
  Tensor t = Tensor::matrix(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) t(i, j) = m[i][j];
  return t;
}

inline std::string company(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "F%03zu", i);
  return buf;
}

inline data::CallRecord random_call(const std::string& company_id, Date date, std::size_t sentences,
                                    std::size_t dim, Rng& rng) {
  data::CallRecord c;
  c.company_id = company_id;
  c.call_id = company_id + "-" + format_date(date);
  c.call_date = date;
  const std::size_t pres = std::max<std::size_t>(1, sentences / 2);
  for (std::size_t j = 0; j < sentences; ++j) {
    data::Sentence s;
    s.position = j;
    s.utterance_idx = j / 2;
    s.part = j < pres ? data::Part::Presentation : data::Part::QA;
    s.role = (s.part == data::Part::QA && (j / 2) % 2 == 1) ? data::Role::Analyst : data::Role::Executive;
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal(0.0, 0.5);
    s.vector = std::move(v);
    c.sentences.push_back(std::move(s));
  }
  return c;
}

/// Small model config for tests: d = 8, two heads, short structural tables.
inline pipeline::ModelConfig tiny_config(std::size_t dialogue_layers = 1, std::size_t network_layers = 2) {
  pipeline::ModelConfig cfg;
  cfg.d_hidden = 8;
  cfg.d_struct = 2;
  cfg.sentence_dim = 4;
  cfg.max_sentences = 16;
  cfg.max_utterances = 8;
  cfg.dialogue_layers = dialogue_layers;
  cfg.dialogue_heads = 2;
  cfg.network_layers = network_layers;
  cfg.head_hidden = 6;
  return cfg;
}

/// Quarter 2017Q1 with `n` companies spread over `dates` distinct call dates,
/// random relations and random labels/baselines.
inline pipeline::QuarterData random_quarter(std::size_t n, std::size_t dates, const pipeline::ModelConfig& cfg,
                                            std::uint64_t seed, double density = 0.5, std::size_t sentences = 3) {
  Rng rng(seed);
  const Quarter q{2017, 1};
  std::vector<data::CallRecord> calls;
  for (std::size_t i = 0; i < n; ++i) {
    const auto day = q.first_day() + std::chrono::days{static_cast<long>(3 * (i % dates))};
    calls.push_back(random_call(company(i), day, 1 + rng.below(sentences), cfg.sentence_dim, rng));
  }
  std::vector<data::RelationRecord> rels;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.bernoulli(density)) rels.push_back({company(i), company(j), 2016, rng.uniform(0.2, 1.0)});
  auto g = graph::build_quarter_graph(calls, rels, q);
  for (auto& node : g.nodes) {
    for (std::size_t k = 0; k < 3; ++k) {
      node.labels[k] = -4.0 + rng.normal(0.0, 0.5);
      node.v_past[k] = -4.0 + rng.normal(0.0, 0.5);
    }
  }
  return pipeline::make_quarter(std::move(g), calls, cfg);
}

}  // namespace fixture
