// tvgnn command-line front end.

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tvgnn/config.hpp"
#include "tvgnn/dataset.hpp"
#include "tvgnn/errors.hpp"
#include "tvgnn/gnn.hpp"
#include "tvgnn/graph.hpp"
#include "tvgnn/metrics.hpp"
#include "tvgnn/model.hpp"
#include "tvgnn/records.hpp"
#include "tvgnn/synth.hpp"
#include "tvgnn/train.hpp"

namespace fs = std::filesystem;
using namespace tvgnn;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// The graph directory written by build-graph also carries the quarter's
// transcripts so that predict/export-attention can rebuild model inputs.
pipeline::QuarterData load_graph_dir(const fs::path& dir, const pipeline::ModelConfig& cfg) {
  auto g = graph::read_graph(dir);
  const auto calls = data::load_transcripts(dir / "calls.jsonl");
  return pipeline::make_quarter(std::move(g), calls.calls, cfg);
}

pipeline::ModelConfig config_for_data(const fs::path& config_path, const std::vector<data::CallRecord>& calls) {
  pipeline::ParsedModelConfig parsed;
  if (!config_path.empty()) parsed = pipeline::load_model_config(config_path);
  if (!parsed.keys.count("sentence_dim")) {
    if (const auto d = pipeline::infer_sentence_dim(calls); d > 0) parsed.config.sentence_dim = d;
  }
  return parsed.config;
}

int cmd_gen_synth(const fs::path& config, std::uint64_t seed, const fs::path& out) {
  const data::SynthConfig cfg = config.empty() ? data::SynthConfig{} : pipeline::load_synth_config(config);
  const auto ds = data::gen_synthetic(cfg, seed);
  data::write_synthetic(out, ds);
  std::ofstream(out / "synth.cfg") << pipeline::format_synth_config(cfg);
  std::cerr << "wrote " << ds.transcripts.size() << " calls, " << ds.prices.size() << " price series, "
            << ds.relations.size() << " relations to " << out << '\n';
  return 0;
}

int cmd_build_graph(const std::string& quarter_text, const fs::path& transcripts, const fs::path& relations,
                    const fs::path& prices, double threshold, const fs::path& out) {
  const Quarter quarter = Quarter::parse(quarter_text);
  const auto t = data::load_transcripts(transcripts);
  const auto r = data::load_relations(relations);
  const auto calls = graph::calls_in_quarter(t.calls, quarter);
  if (calls.empty()) throw DataError("no calls in " + quarter.str());
  auto g = graph::build_quarter_graph(calls, r.relations, quarter, threshold);
  std::vector<data::Exclusion> exclusions;
  if (!prices.empty()) {
    const auto p = data::load_prices(prices);
    pipeline::attach_labels(g, p.series, data::WindowMode::TradingDays, &exclusions);
  }
  graph::write_graph(out, g);
  data::write_transcripts(out / "calls.jsonl", calls);
  json ex = json::array();
  for (const auto& e : exclusions) ex.push_back({{"call_id", e.id}, {"reason", e.reason}});
  write_json(out / "ingest.json",
             {{"transcripts", t.report.to_json()}, {"relations", r.report.to_json()}, {"label_exclusions", ex}});
  std::cerr << quarter.str() << ": " << g.num_nodes() << " nodes, " << g.edges.size() << " edges, "
            << g.date_groups.size() << " dates\n";
  return 0;
}

int cmd_audit(const fs::path& dir, const fs::path& report_path) {
  const auto g = graph::read_graph(dir);
  const auto report = graph::audit_no_leakage(g);
  const json j = report.to_json(g);
  if (!report_path.empty()) write_json(report_path, j);
  std::cout << j.dump(2) << '\n';
  return report.clean() ? 0 : 2;
}

json metrics_json(const pipeline::MetricsReport& model, const pipeline::MetricsReport& vpast, const std::string& split) {
  return {{"schema_version", pipeline::kReportSchemaVersion}, {"split", split}, {"model", model.to_json()},
          {"v_past", vpast.to_json()}};
}

void print_table(const pipeline::MetricsReport& model, const pipeline::MetricsReport& vpast) {
  std::cout << "model        mean     MSE3     MSE7    MSE15     R2_3     R2_7    R2_15\n"
            << vpast.table_row("v_past  ") << '\n'
            << model.table_row("TVGNN   ") << '\n';
}

std::vector<pipeline::Sample> samples_for(const pipeline::Dataset& ds, const std::string& split) {
  std::vector<const pipeline::QuarterData*> qs;
  for (const auto& q : ds.quarters)
    if (split == "all" || data::to_string(q.split) == split) qs.push_back(&q);
  if (qs.empty()) throw DataError("no quarters in split '" + split + "'");
  return pipeline::whole_quarters(qs);
}

int cmd_train(const fs::path& config, const fs::path& data_dir, const fs::path& out, const fs::path& report_path,
              bool quiet) {
  const auto t = data::load_transcripts(data_dir / "transcripts.jsonl");
  const auto cfg = config_for_data(config, t.calls);
  const auto ds = pipeline::load_dataset(data_dir, cfg);
  std::vector<Quarter> quarters;
  for (const auto& q : ds.quarters) quarters.push_back(q.graph.quarter);
  data::split_by_time(quarters, cfg.boundaries());  // validates the split policy

  const auto train_set = samples_for(ds, "train");
  const auto val_set = samples_for(ds, "val");
  auto opts = pipeline::TrainOptions::from(cfg);
  if (!quiet) {
    opts.on_epoch = [](const pipeline::TvgnnModel& m, const pipeline::EpochRecord& r) {
      std::fprintf(stderr, "tau=%d epoch %3zu  train %.5f  val %.5f%s\n", m.horizons().front(), r.epoch,
                   r.train_loss, r.val_mse, r.improved ? "  *" : "");
    };
  }
  const auto result = pipeline::train(cfg, train_set, val_set, opts);
  pipeline::save_checkpoint(out, result.bundle);

  const auto test_set = samples_for(ds, "test");
  const auto model_rep = pipeline::evaluate(result.bundle, test_set);
  const auto vpast_rep = pipeline::vpast_report(test_set);
  json j = metrics_json(model_rep, vpast_rep, "test");
  json hist = json::array();
  for (std::size_t i = 0; i < result.histories.size(); ++i) {
    const auto& h = result.histories[i];
    hist.push_back({{"horizons", result.bundle.models[i].horizons()},
                    {"best_epoch", h.best_epoch},
                    {"best_val_mse", h.best_val},
                    {"epochs_run", h.epochs.size() - 1},
                    {"stopped_early", h.stopped_early}});
  }
  j["training"] = hist;
  if (!report_path.empty()) write_json(report_path, j);
  print_table(model_rep, vpast_rep);
  return 0;
}

int cmd_eval(const fs::path& model_path, const fs::path& data_dir, const fs::path& report_path, const std::string& split) {
  const auto bundle = pipeline::load_checkpoint(model_path);
  const auto ds = pipeline::load_dataset(data_dir, bundle.config);
  const auto samples = samples_for(ds, split);
  const auto model_rep = pipeline::evaluate(bundle, samples);
  const auto vpast_rep = pipeline::vpast_report(samples);
  json j = metrics_json(model_rep, vpast_rep, split);
  j["ingest"] = ds.ingest;
  j["labeled_nodes"] = model_rep.samples;
  json ex = json::array();
  for (const auto& e : ds.exclusions) ex.push_back({{"call_id", e.id}, {"reason", e.reason}});
  j["label_exclusions"] = ex;
  if (!report_path.empty()) write_json(report_path, j);
  print_table(model_rep, vpast_rep);
  return 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& graph_dir, const fs::path& out_path) {
  const auto bundle = pipeline::load_checkpoint(model_path);
  const auto q = load_graph_dir(graph_dir, bundle.config);
  const Tensor p = bundle.predict(q);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write " + out_path.string());
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "node_id,company_id,call_id,call_date,pred_3,pred_7,pred_15\n";
  for (std::size_t i = 0; i < q.num_nodes(); ++i) {
    const auto& n = q.graph.nodes[i];
    out << n.node_id << ',' << n.company_id << ',' << n.call_id << ',' << format_date(n.call_date);
    for (std::size_t k = 0; k < 3; ++k) out << ',' << (std::isnan(p(i, k)) ? "" : data::format_real(p(i, k)));
    out << '\n';
  }
  return 0;
}

int cmd_export_attention(const fs::path& model_path, const fs::path& graph_dir, const fs::path& out_path,
                         int horizon, const fs::path& market_out) {
  const auto bundle = pipeline::load_checkpoint(model_path);
  const auto q = load_graph_dir(graph_dir, bundle.config);
  const auto& model = bundle.model_for(horizon);
  const auto res = model.forward(q);
  gnn::write_attention_csv(out_path, q.edges, res.encoder.gamma);
  if (!market_out.empty()) {
    // One file per layer: <stem>.layerN.csv
    for (std::size_t l = 0; l < res.encoder.timelines.size(); ++l) {
      fs::path p = market_out;
      p.replace_extension(".layer" + std::to_string(l + 1) + ".csv");
      market::write_timeline_csv(p, q.graph.date_groups, res.encoder.timelines[l]);
    }
  }
  std::cerr << "wrote " << res.encoder.gamma.size() << " layers x " << q.edges.num_edges() << " edges to " << out_path
            << '\n';
  return 0;
}

int cmd_split(const fs::path& graph_dir, const std::string& ratios_text, const fs::path& out_path) {
  const auto g = graph::read_graph(graph_dir);
  std::array<double, 3> ratios{};
  std::size_t k = 0;
  std::size_t start = 0;
  while (true) {
    const auto pos = ratios_text.find(',', start);
    if (k == 3) throw ConfigError("--ratios needs exactly three values");
    ratios[k++] = std::stod(ratios_text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (k != 3) throw ConfigError("--ratios needs exactly three values");
  const auto m = pipeline::transductive_split(g, ratios);
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw DataError("cannot write " + out_path.string());
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "node_id,company_id,call_date,split\n";
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const char* tag = m.train[i] ? "train" : m.val[i] ? "val" : "test";
    out << i << ',' << g.nodes[i].company_id << ',' << format_date(g.nodes[i].call_date) << ',' << tag << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tvgnn: temporal company-network volatility model"};
  app.require_subcommand(1);

  fs::path config, out, data_dir, model_path, graph_dir, report, transcripts, relations, prices, market_out;
  std::uint64_t seed = 0;
  std::string quarter, ratios = "7,1,2", split = "test";
  double threshold = graph::kDefaultThreshold;
  int horizon = 3;
  bool quiet = false;
  int rc = 0;

  auto* gen = app.add_subcommand("gen-synth", "generate a synthetic corpus");
  gen->add_option("--config", config, "synthetic config (key = value)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->callback([&] { rc = cmd_gen_synth(config, seed, out); });

  auto* build = app.add_subcommand("build-graph", "build one quarter's company network");
  build->add_option("--quarter", quarter, "e.g. 2017Q1")->required();
  build->add_option("--transcripts", transcripts)->required()->check(CLI::ExistingFile);
  build->add_option("--relations", relations)->required()->check(CLI::ExistingFile);
  build->add_option("--prices", prices, "attach labels from this price file")->check(CLI::ExistingFile);
  build->add_option("--threshold", threshold, "minimum relation similarity (exclusive)");
  build->add_option("--out", out)->required();
  build->callback([&] { rc = cmd_build_graph(quarter, transcripts, relations, prices, threshold, out); });

  auto* audit = app.add_subcommand("audit-leakage", "check a graph for future-to-past edges");
  audit->add_option("--graph", graph_dir)->required()->check(CLI::ExistingDirectory);
  audit->add_option("--report", report, "also write the report here");
  audit->callback([&] { rc = cmd_audit(graph_dir, report); });

  auto* tr = app.add_subcommand("train", "train on train/val quarters and report test metrics");
  tr->add_option("--config", config, "model config (key = value)")->check(CLI::ExistingFile);
  tr->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out, "checkpoint path")->required();
  tr->add_option("--report", report, "metrics report JSON");
  tr->add_flag("--quiet", quiet, "no per-epoch log");
  tr->callback([&] { rc = cmd_train(config, data_dir, out, report, quiet); });

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint against v_past");
  ev->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
  ev->add_option("--report", report, "metrics report JSON");
  ev->add_option("--split", split, "train, val, test or all")->check(CLI::IsMember({"train", "val", "test", "all"}));
  ev->callback([&] { rc = cmd_eval(model_path, data_dir, report, split); });

  auto* pr = app.add_subcommand("predict", "predict log-volatility for every node of a graph");
  pr->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  pr->add_option("--graph", graph_dir)->required()->check(CLI::ExistingDirectory);
  pr->add_option("--out", out, "CSV path (default stdout)");
  pr->callback([&] { rc = cmd_predict(model_path, graph_dir, out); });

  auto* ex = app.add_subcommand("export-attention", "dump neighbor attention per layer");
  ex->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  ex->add_option("--graph", graph_dir)->required()->check(CLI::ExistingDirectory);
  ex->add_option("--out", out, "CSV path")->required();
  ex->add_option("--horizon", horizon, "which horizon's model")->check(CLI::IsMember({3, 7, 15}));
  ex->add_option("--market-out", market_out, "also dump market pooling weights and decay per layer");
  ex->callback([&] { rc = cmd_export_attention(model_path, graph_dir, out, horizon, market_out); });

  auto* sp = app.add_subcommand("split-transductive", "chronological node split of one graph");
  sp->add_option("--graph", graph_dir)->required()->check(CLI::ExistingDirectory);
  sp->add_option("--ratios", ratios, "train,val,test");
  sp->add_option("--out", out, "CSV path (default stdout)");
  sp->callback([&] { rc = cmd_split(graph_dir, ratios, out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
