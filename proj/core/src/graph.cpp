#include "tvgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tvgnn/errors.hpp"
#include "text_util.hpp"

namespace tvgnn::graph {

using nlohmann::json;

bool CompanyNode::labeled() const {
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (!labels[k] || !v_past[k]) return false;
  return true;
}

void QuarterGraph::rebuild_date_groups() {
  std::map<Date, std::vector<std::size_t>> by_date;
  for (const auto& n : nodes) by_date[n.call_date].push_back(n.node_id);
  date_groups.clear();
  node_group.assign(nodes.size(), 0);
  for (auto& [d, ids] : by_date) {
    for (auto id : ids) node_group[id] = date_groups.size();
    date_groups.push_back({d, std::move(ids)});
  }
}

double temporal_weight(long day_gap) {
  if (day_gap < 0) throw DataError("temporal_weight: negative day gap");
  return 1.0 / static_cast<double>(day_gap + 1);
}

std::vector<data::CallRecord> calls_in_quarter(std::span<const data::CallRecord> calls,
                                               const Quarter& quarter) {
  std::vector<data::CallRecord> out;
  for (const auto& c : calls)
    if (quarter.contains(c.call_date)) out.push_back(c);
  return out;
}

QuarterGraph build_quarter_graph(std::span<const data::CallRecord> calls,
                                 std::span<const data::RelationRecord> relations,
                                 const Quarter& quarter, double threshold) {
  QuarterGraph g;
  g.quarter = quarter;
  std::map<std::string, std::size_t> by_company;
  for (const auto& c : calls) {
    if (!quarter.contains(c.call_date)) {
      throw DataError("build_quarter_graph: call '" + c.call_id + "' on " + format_date(c.call_date) +
                      " lies outside " + quarter.str());
    }
    auto [it, inserted] = by_company.emplace(c.company_id, g.nodes.size());
    if (!inserted) {
      throw DataError("build_quarter_graph: company '" + c.company_id + "' has two calls in " +
                      quarter.str() + ": '" + g.nodes[it->second].call_id + "' and '" + c.call_id + "'");
    }
    CompanyNode n;
    n.node_id = g.nodes.size();
    n.company_id = c.company_id;
    n.call_id = c.call_id;
    n.call_date = c.call_date;
    g.nodes.push_back(std::move(n));
  }

  // Strongest listing per unordered pair, relations from the previous year only.
  std::map<std::pair<std::size_t, std::size_t>, double> pairs;
  for (const auto& r : relations) {
    if (r.effective_year != quarter.year - 1 || !(r.similarity > threshold)) continue;
    auto ia = by_company.find(r.company_a);
    auto ib = by_company.find(r.company_b);
    if (ia == by_company.end() || ib == by_company.end() || ia->second == ib->second) continue;
    const auto key = std::minmax(ia->second, ib->second);
    auto [it, inserted] = pairs.emplace(key, r.similarity);
    if (!inserted) it->second = std::max(it->second, r.similarity);
  }

  for (const auto& n : g.nodes) g.edges.push_back({n.node_id, n.node_id, 1.0, 1.0, 0});
  for (const auto& [key, sim] : pairs) {
    const auto [a, b] = key;
    const long gap = days_between(g.nodes[b].call_date, g.nodes[a].call_date);
    if (gap >= 0) g.edges.push_back({a, b, temporal_weight(gap), sim, gap});
    if (gap <= 0) g.edges.push_back({b, a, temporal_weight(-gap), sim, -gap});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const TemporalEdge& x, const TemporalEdge& y) {
    return std::tie(x.dst, x.src) < std::tie(y.dst, y.src);
  });
  g.rebuild_date_groups();
  return g;
}

std::vector<DateGroup> date_groups(const QuarterGraph& graph) { return graph.date_groups; }

LeakageReport audit_no_leakage(const QuarterGraph& graph) {
  LeakageReport report;
  const auto n = graph.nodes.size();
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    ++report.edges_checked;
    if (edge.src >= n || edge.dst >= n) {
      report.violations.push_back({e, edge.src, edge.dst, "endpoint out of range"});
      continue;
    }
    const long gap = days_between(graph.nodes[edge.dst].call_date, graph.nodes[edge.src].call_date);
    if (gap < 0) {
      report.violations.push_back(
          {e, edge.src, edge.dst,
           "source call " + format_date(graph.nodes[edge.src].call_date) + " is later than destination call " +
               format_date(graph.nodes[edge.dst].call_date)});
      continue;
    }
    if (edge.day_gap != gap) {
      report.violations.push_back({e, edge.src, edge.dst,
                                   "day_gap " + std::to_string(edge.day_gap) + " != call-date gap " +
                                       std::to_string(gap)});
      continue;
    }
    const double expected = temporal_weight(gap);
    if (!(std::abs(edge.temporal_weight - expected) <= 1e-12 * expected)) {
      report.violations.push_back({e, edge.src, edge.dst,
                                   "temporal_weight " + data::format_real(edge.temporal_weight) +
                                       " != 1/(gap+1) = " + data::format_real(expected)});
    }
  }
  return report;
}

json LeakageReport::to_json(const QuarterGraph& graph) const {
  json v = json::array();
  for (const auto& x : violations) {
    json item = {{"edge", x.edge_index}, {"src", x.src}, {"dst", x.dst}, {"reason", x.reason}};
    if (x.src < graph.nodes.size()) item["src_company"] = graph.nodes[x.src].company_id;
    if (x.dst < graph.nodes.size()) item["dst_company"] = graph.nodes[x.dst].company_id;
    v.push_back(std::move(item));
  }
  return {{"quarter", graph.quarter.str()},
          {"nodes", graph.nodes.size()},
          {"edges_checked", edges_checked},
          {"violation_count", violations.size()},
          {"violations", std::move(v)}};
}

namespace {

std::string opt_str(const std::optional<double>& v) { return v ? data::format_real(*v) : ""; }

std::optional<double> opt_parse(std::string_view s, const std::string& ctx, std::string_view field) {
  if (s.empty()) return std::nullopt;
  return detail::parse_double(s, ctx, field);
}

constexpr const char* kNodeHeader =
    "node_id,company_id,call_id,call_date,label_3,label_7,label_15,v_past_3,v_past_7,v_past_15";
constexpr const char* kEdgeHeader = "src,dst,temporal_weight,similarity,day_gap";

}  // namespace

void write_graph(const std::filesystem::path& dir, const QuarterGraph& graph) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_out(dir / "nodes.csv");
    out << kNodeHeader << '\n';
    for (const auto& n : graph.nodes) {
      out << n.node_id << ',' << n.company_id << ',' << n.call_id << ',' << format_date(n.call_date);
      for (const auto& l : n.labels) out << ',' << opt_str(l);
      for (const auto& v : n.v_past) out << ',' << opt_str(v);
      out << '\n';
    }
  }
  {
    auto out = detail::open_out(dir / "edges.csv");
    out << kEdgeHeader << '\n';
    for (const auto& e : graph.edges) {
      out << e.src << ',' << e.dst << ',' << data::format_real(e.temporal_weight) << ','
          << data::format_real(e.similarity) << ',' << e.day_gap << '\n';
    }
  }
  auto meta = detail::open_out(dir / "graph.json");
  meta << json{{"quarter", graph.quarter.str()},
               {"nodes", graph.nodes.size()},
               {"edges", graph.edges.size()},
               {"date_groups", graph.date_groups.size()}}
              .dump(2)
       << '\n';
}

QuarterGraph read_graph(const std::filesystem::path& dir) {
  QuarterGraph g;
  const json meta = json::parse(detail::read_file(dir / "graph.json"));
  g.quarter = Quarter::parse(meta.at("quarter").get<std::string>());

  const std::string nodes_src = (dir / "nodes.csv").string();
  bool header = false;
  detail::for_each_line(detail::read_file(dir / "nodes.csv"), [&](std::size_t line_no, std::string_view line) {
    if (detail::blank(line)) return;
    const auto ctx = detail::where(nodes_src, line_no);
    if (!header) {
      header = true;
      if (line != kNodeHeader) throw ParseError(ctx + "unexpected nodes.csv header");
      return;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 10) throw ParseError(ctx + "expected 10 fields");
    CompanyNode n;
    n.node_id = static_cast<std::size_t>(detail::parse_integer(f[0], ctx, "node_id"));
    if (n.node_id != g.nodes.size()) throw ParseError(ctx + "field 'node_id' out of sequence");
    n.company_id = std::string(f[1]);
    n.call_id = std::string(f[2]);
    try {
      n.call_date = parse_date(f[3]);
    } catch (const ParseError& e) {
      throw ParseError(ctx + "field 'call_date': " + e.what());
    }
    static constexpr const char* kLabelFields[] = {"label_3", "label_7", "label_15", "v_past_3", "v_past_7", "v_past_15"};
    for (std::size_t k = 0; k < 3; ++k) {
      n.labels[k] = opt_parse(f[4 + k], ctx, kLabelFields[k]);
      n.v_past[k] = opt_parse(f[7 + k], ctx, kLabelFields[3 + k]);
    }
    g.nodes.push_back(std::move(n));
  });

  const std::string edges_src = (dir / "edges.csv").string();
  header = false;
  detail::for_each_line(detail::read_file(dir / "edges.csv"), [&](std::size_t line_no, std::string_view line) {
    if (detail::blank(line)) return;
    const auto ctx = detail::where(edges_src, line_no);
    if (!header) {
      header = true;
      if (line != kEdgeHeader) throw ParseError(ctx + "unexpected edges.csv header");
      return;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 5) throw ParseError(ctx + "expected 5 fields");
    TemporalEdge e;
    const auto src = detail::parse_integer(f[0], ctx, "src");
    const auto dst = detail::parse_integer(f[1], ctx, "dst");
    if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= g.nodes.size() ||
        static_cast<std::size_t>(dst) >= g.nodes.size()) {
      throw ParseError(ctx + "edge endpoint out of range");
    }
    e.src = static_cast<std::size_t>(src);
    e.dst = static_cast<std::size_t>(dst);
    e.temporal_weight = detail::parse_double(f[2], ctx, "temporal_weight");
    e.similarity = detail::parse_double(f[3], ctx, "similarity");
    e.day_gap = static_cast<long>(detail::parse_integer(f[4], ctx, "day_gap"));
    g.edges.push_back(e);
  });
  g.rebuild_date_groups();
  return g;
}

}  // namespace tvgnn::graph
