#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tvgnn/dates.hpp"
#include "tvgnn/records.hpp"

namespace tvgnn::graph {

inline constexpr double kDefaultThreshold = 0.15;

struct CompanyNode {
  std::size_t node_id = 0;
  std::string company_id;
  std::string call_id;
  Date call_date{};
  /// ln-volatility labels and trailing baselines per horizon (3, 7, 15);
  /// empty when prices are missing or too short.
  std::array<std::optional<double>, 3> labels;
  std::array<std::optional<double>, 3> v_past;

  bool labeled() const;
};

/// Directed edge src -> dst: information flows from src's call to dst's.
struct TemporalEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double temporal_weight = 1.0;
  double similarity = 1.0;
  long day_gap = 0;

  bool self_loop() const { return src == dst; }
};

struct DateGroup {
  Date date{};
  std::vector<std::size_t> nodes;
};

/// Company network for one quarter. Edges are ordered by (dst, src).
struct QuarterGraph {
  Quarter quarter;
  std::vector<CompanyNode> nodes;
  std::vector<TemporalEdge> edges;
  std::vector<DateGroup> date_groups;
  /// Index into date_groups for every node.
  std::vector<std::size_t> node_group;

  std::size_t num_nodes() const { return nodes.size(); }
  /// Recomputes date_groups and node_group from node dates.
  void rebuild_date_groups();
};

/// 1 / (gap + 1) for a non-negative calendar-day gap.
double temporal_weight(long day_gap);

/// Calls inside `quarter`, in input order.
std::vector<data::CallRecord> calls_in_quarter(std::span<const data::CallRecord> calls,
                                               const Quarter& quarter);

/// Builds the quarter network from relations effective in quarter.year - 1
/// whose similarity exceeds `threshold`. For a related pair with call dates
/// t_i >= t_j the edge j -> i gets weight 1/(t_i - t_j + 1); same-day pairs
/// get both directions; every node gets a self-loop with weight 1 and
/// similarity 1. Throws DataError for a call outside the quarter or a second
/// call by the same company.
QuarterGraph build_quarter_graph(std::span<const data::CallRecord> calls,
                                 std::span<const data::RelationRecord> relations,
                                 const Quarter& quarter, double threshold = kDefaultThreshold);

/// Ordered (date, nodes) partition; identical to graph.date_groups.
std::vector<DateGroup> date_groups(const QuarterGraph& graph);

struct LeakageViolation {
  std::size_t edge_index = 0;
  std::size_t src = 0;
  std::size_t dst = 0;
  std::string reason;
};

struct LeakageReport {
  std::size_t edges_checked = 0;
  std::vector<LeakageViolation> violations;

  bool clean() const { return violations.empty(); }
  nlohmann::json to_json(const QuarterGraph& graph) const;
};

/// Flags every edge whose source call is later than its destination call or
/// whose gap/weight disagree with the call dates. Never throws.
LeakageReport audit_no_leakage(const QuarterGraph& graph);

/// nodes.csv, edges.csv and graph.json under `dir`.
void write_graph(const std::filesystem::path& dir, const QuarterGraph& graph);
QuarterGraph read_graph(const std::filesystem::path& dir);

}  // namespace tvgnn::graph
