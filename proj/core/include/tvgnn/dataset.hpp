#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/config.hpp"
#include "tvgnn/dialogue.hpp"
#include "tvgnn/gnn.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/records.hpp"
#include "tvgnn/split.hpp"

namespace tvgnn::pipeline {

/// One quarter graph with everything the model and the metrics need.
struct QuarterData {
  graph::QuarterGraph graph;
  std::vector<dialogue::EncodedCall> calls;  // aligned with graph.nodes
  gnn::EdgeIndex edges;
  data::SplitTag split = data::SplitTag::Train;
  Tensor labels;               // n x 3, NaN where unavailable
  Tensor v_past;               // n x 3, NaN where unavailable
  std::vector<char> labeled;   // all three labels and baselines present

  std::size_t num_nodes() const { return graph.num_nodes(); }
  std::size_t num_labeled() const;
};

/// Column of `labels` / `v_past` holding horizon `tau`. Throws ConfigError otherwise.
std::size_t horizon_column(int tau);

struct Dataset {
  std::vector<QuarterData> quarters;  // chronological
  std::vector<data::Exclusion> exclusions;  // nodes kept for message passing but without labels
  nlohmann::json ingest;  // loader reports, when read from files

  std::size_t num_labeled() const;
  std::vector<const QuarterData*> with_split(data::SplitTag tag) const;
};

/// Attaches labels and baselines to graph nodes from their company's prices.
/// A node whose labels cannot be computed stays in the graph without labels
/// and gets an exclusion entry.
void attach_labels(graph::QuarterGraph& graph, std::span<const data::PriceSeries> prices,
                   data::WindowMode mode, std::vector<data::Exclusion>* exclusions = nullptr);

/// Builds the model inputs for a labeled graph.
QuarterData make_quarter(graph::QuarterGraph graph, std::span<const data::CallRecord> calls,
                         const ModelConfig& cfg);

/// Groups calls by quarter, builds graphs, attaches labels and tags splits.
Dataset assemble_dataset(std::span<const data::CallRecord> calls, std::span<const data::PriceSeries> prices,
                         std::span<const data::RelationRecord> relations, const ModelConfig& cfg);

/// Reads transcripts.jsonl, prices.csv and relations.csv from `dir`.
Dataset load_dataset(const std::filesystem::path& dir, const ModelConfig& cfg);

/// Length of the first sentence vector in the corpus, or 0 when there is none.
std::size_t infer_sentence_dim(std::span<const data::CallRecord> calls);

}  // namespace tvgnn::pipeline
