#include "tvgnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "tvgnn/errors.hpp"
#include "tvgnn/volatility.hpp"

namespace tvgnn::pipeline {

std::size_t QuarterData::num_labeled() const {
  return static_cast<std::size_t>(std::count(labeled.begin(), labeled.end(), 1));
}

std::size_t horizon_column(int tau) {
  for (std::size_t k = 0; k < data::kHorizons.size(); ++k)
    if (data::kHorizons[k] == tau) return k;
  throw ConfigError("horizon " + std::to_string(tau) + " is not one of 3, 7, 15");
}

std::size_t Dataset::num_labeled() const {
  std::size_t n = 0;
  for (const auto& q : quarters) n += q.num_labeled();
  return n;
}

std::vector<const QuarterData*> Dataset::with_split(data::SplitTag tag) const {
  std::vector<const QuarterData*> out;
  for (const auto& q : quarters)
    if (q.split == tag) out.push_back(&q);
  return out;
}

void attach_labels(graph::QuarterGraph& graph, std::span<const data::PriceSeries> prices, data::WindowMode mode,
                   std::vector<data::Exclusion>* exclusions) {
  std::unordered_map<std::string, const data::PriceSeries*> by_company;
  for (const auto& s : prices) by_company[s.company_id] = &s;
  for (auto& node : graph.nodes) {
    node.labels = {};
    node.v_past = {};
    auto it = by_company.find(node.company_id);
    if (it == by_company.end()) {
      if (exclusions) exclusions->push_back({node.call_id, "no price series for company '" + node.company_id + "'"});
      continue;
    }
    try {
      for (std::size_t k = 0; k < data::kHorizons.size(); ++k) {
        node.labels[k] = data::label(*it->second, node.call_date, data::kHorizons[k], mode);
        node.v_past[k] = data::v_past(*it->second, node.call_date, data::kHorizons[k], mode);
      }
    } catch (const DataError& e) {
      node.labels = {};
      node.v_past = {};
      if (exclusions) exclusions->push_back({node.call_id, e.what()});
    }
  }
}

QuarterData make_quarter(graph::QuarterGraph graph, std::span<const data::CallRecord> calls, const ModelConfig& cfg) {
  QuarterData q;
  std::unordered_map<std::string, const data::CallRecord*> by_id;
  for (const auto& c : calls) by_id[c.call_id] = &c;
  const auto dcfg = cfg.dialogue();
  for (const auto& node : graph.nodes) {
    auto it = by_id.find(node.call_id);
    if (it == by_id.end()) throw DataError("no transcript for call '" + node.call_id + "'");
    q.calls.push_back(dialogue::prepare_call(*it->second, dcfg));
  }
  const std::size_t n = graph.num_nodes();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  q.labels = Tensor::matrix(n, data::kHorizons.size(), nan);
  q.v_past = Tensor::matrix(n, data::kHorizons.size(), nan);
  q.labeled.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = graph.nodes[i];
    if (!node.labeled()) continue;
    q.labeled[i] = 1;
    for (std::size_t k = 0; k < data::kHorizons.size(); ++k) {
      q.labels(i, k) = *node.labels[k];
      q.v_past(i, k) = *node.v_past[k];
    }
  }
  q.edges = gnn::EdgeIndex::build(graph);
  q.split = data::tag_for(graph.quarter, cfg.boundaries());
  q.graph = std::move(graph);
  return q;
}

Dataset assemble_dataset(std::span<const data::CallRecord> calls, std::span<const data::PriceSeries> prices,
                         std::span<const data::RelationRecord> relations, const ModelConfig& cfg) {
  std::map<Quarter, std::vector<data::CallRecord>> by_quarter;
  for (const auto& c : calls) by_quarter[Quarter::of(c.call_date)].push_back(c);
  Dataset ds;
  for (auto& [quarter, qcalls] : by_quarter) {
    auto g = graph::build_quarter_graph(qcalls, relations, quarter, cfg.threshold);
    attach_labels(g, prices, cfg.window, &ds.exclusions);
    ds.quarters.push_back(make_quarter(std::move(g), qcalls, cfg));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& dir, const ModelConfig& cfg) {
  auto t = data::load_transcripts(dir / "transcripts.jsonl");
  auto p = data::load_prices(dir / "prices.csv");
  auto r = data::load_relations(dir / "relations.csv");
  Dataset ds = assemble_dataset(t.calls, p.series, r.relations, cfg);
  ds.ingest = {{"transcripts", t.report.to_json()}, {"prices", p.report.to_json()}, {"relations", r.report.to_json()}};
  return ds;
}

std::size_t infer_sentence_dim(std::span<const data::CallRecord> calls) {
  for (const auto& c : calls)
    for (const auto& s : c.sentences)
      if (s.vector) return s.vector->size();
  return 0;
}

}  // namespace tvgnn::pipeline
