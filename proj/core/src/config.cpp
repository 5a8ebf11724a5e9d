#include "tvgnn/config.hpp"

#include <charconv>

#include <algorithm>
#include <functional>
#include <sstream>

#include "tvgnn/errors.hpp"
#include "tvgnn/records.hpp"
#include "text_util.hpp"

namespace tvgnn::pipeline {

void ModelConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("config field '" + field + "': " + msg);
  };
  if (!(lr > 0.0)) fail("lr", "must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be non-negative");
  if (d_hidden == 0) fail("d_hidden", "must be positive");
  if (d_struct == 0) fail("d_struct", "must be positive");
  if (sentence_dim == 0) fail("sentence_dim", "must be positive");
  if (max_sentences == 0) fail("max_sentences", "must be positive");
  if (max_utterances == 0) fail("max_utterances", "must be positive");
  if (dialogue_heads == 0 || d_hidden % dialogue_heads != 0) fail("dialogue_heads", "must divide d_hidden");
  if (network_layers == 0) fail("network_layers", "must be at least 1");
  if (network_heads != 1) fail("network_heads", "only single-head neighbor attention is implemented");
  if (head_hidden == 0) fail("head_hidden", "must be positive");
  if (patience == 0) fail("patience", "must be positive");
  if (horizons.empty()) fail("horizons", "must not be empty");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (std::find(data::kHorizons.begin(), data::kHorizons.end(), horizons[i]) == data::kHorizons.end())
      fail("horizons", "must be drawn from 3, 7, 15");
    if (std::count(horizons.begin(), horizons.end(), horizons[i]) > 1) fail("horizons", "repeated horizon");
  }
  if (!(threshold >= 0.0 && threshold < 1.0)) fail("threshold", "must lie in [0,1)");
  if (validation_year >= test_year) fail("test_year", "must be after validation_year");
}

dialogue::DialogueConfig ModelConfig::dialogue() const {
  dialogue::DialogueConfig d;
  d.sentence_dim = sentence_dim;
  d.d_pos = d.d_utt = d.d_role = d.d_part = d_struct;
  d.d_hidden = d_hidden;
  d.layers = dialogue_layers;
  d.heads = dialogue_heads;
  d.max_sentences = max_sentences;
  d.max_utterances = max_utterances;
  return d;
}

std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& source) {
  std::map<std::string, std::string> out;
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  };
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(detail::where(source, line_no) + "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(detail::where(source, line_no) + "empty key");
    if (!out.emplace(key, value).second) throw ConfigError(detail::where(source, line_no) + "key '" + key + "' repeated");
  });
  return out;
}

namespace {

using Setter = std::function<void(const std::string&)>;

double to_real(const std::string& key, const std::string& v) {
  try {
    return detail::parse_double(v, "", key);
  } catch (const ParseError&) {
    throw ConfigError("config field '" + key + "': expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return detail::parse_integer(v, "", key);
  } catch (const ParseError&) {
    throw ConfigError("config field '" + key + "': expected an integer, got '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) throw ConfigError("config field '" + key + "': must be non-negative");
  return static_cast<std::size_t>(n);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("config field '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
  return n;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config field '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<int> to_horizons(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (auto f : detail::split_csv(v)) out.push_back(static_cast<int>(to_int(key, std::string(f))));
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string real(double v) { return data::format_real(v); }

template <class T>
void apply(const std::map<std::string, std::string>& kv, const std::map<std::string, std::function<void(T&, const std::string&)>>& setters,
           T& target, const std::string& source) {
  for (const auto& [k, v] : kv) {
    auto it = setters.find(k);
    if (it == setters.end()) throw ConfigError(source + ": unknown config key '" + k + "'");
    it->second(target, v);
  }
}

using ModelSetter = std::function<void(ModelConfig&, const std::string&)>;

const std::map<std::string, ModelSetter>& model_setters() {
  static const std::map<std::string, ModelSetter> s = {
      {"lr", [](ModelConfig& c, const std::string& v) { c.lr = to_real("lr", v); }},
      {"weight_decay", [](ModelConfig& c, const std::string& v) { c.weight_decay = to_real("weight_decay", v); }},
      {"d_hidden", [](ModelConfig& c, const std::string& v) { c.d_hidden = to_count("d_hidden", v); }},
      {"d_struct", [](ModelConfig& c, const std::string& v) { c.d_struct = to_count("d_struct", v); }},
      {"sentence_dim", [](ModelConfig& c, const std::string& v) { c.sentence_dim = to_count("sentence_dim", v); }},
      {"max_sentences", [](ModelConfig& c, const std::string& v) { c.max_sentences = to_count("max_sentences", v); }},
      {"max_utterances", [](ModelConfig& c, const std::string& v) { c.max_utterances = to_count("max_utterances", v); }},
      {"dialogue_layers", [](ModelConfig& c, const std::string& v) { c.dialogue_layers = to_count("dialogue_layers", v); }},
      {"dialogue_heads", [](ModelConfig& c, const std::string& v) { c.dialogue_heads = to_count("dialogue_heads", v); }},
      {"network_layers", [](ModelConfig& c, const std::string& v) { c.network_layers = to_count("network_layers", v); }},
      {"network_heads", [](ModelConfig& c, const std::string& v) { c.network_heads = to_count("network_heads", v); }},
      {"head_hidden", [](ModelConfig& c, const std::string& v) { c.head_hidden = to_count("head_hidden", v); }},
      {"patience", [](ModelConfig& c, const std::string& v) { c.patience = to_count("patience", v); }},
      {"max_epochs", [](ModelConfig& c, const std::string& v) { c.max_epochs = to_count("max_epochs", v); }},
      {"horizons", [](ModelConfig& c, const std::string& v) { c.horizons = to_horizons("horizons", v); }},
      {"joint_heads", [](ModelConfig& c, const std::string& v) { c.joint_heads = to_bool("joint_heads", v); }},
      {"seed", [](ModelConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
      {"threshold", [](ModelConfig& c, const std::string& v) { c.threshold = to_real("threshold", v); }},
      {"validation_year", [](ModelConfig& c, const std::string& v) { c.validation_year = static_cast<int>(to_int("validation_year", v)); }},
      {"test_year", [](ModelConfig& c, const std::string& v) { c.test_year = static_cast<int>(to_int("test_year", v)); }},
      {"window",
       [](ModelConfig& c, const std::string& v) {
         if (v == "trading") c.window = data::WindowMode::TradingDays;
         else if (v == "calendar") c.window = data::WindowMode::CalendarDays;
         else throw ConfigError("config field 'window': expected trading or calendar, got '" + v + "'");
       }},
      {"pool_norm",
       [](ModelConfig& c, const std::string& v) {
         if (v == "softmax") c.pool_norm = market::PoolNorm::Softmax;
         else if (v == "literal") c.pool_norm = market::PoolNorm::Literal;
         else throw ConfigError("config field 'pool_norm': expected softmax or literal, got '" + v + "'");
       }},
  };
  return s;
}

using SynthSetter = std::function<void(data::SynthConfig&, const std::string&)>;

const std::map<std::string, SynthSetter>& synth_setters() {
  using C = data::SynthConfig;
  static const std::map<std::string, SynthSetter> s = {
      {"num_companies", [](C& c, const std::string& v) { c.num_companies = to_count("num_companies", v); }},
      {"num_quarters", [](C& c, const std::string& v) { c.num_quarters = to_count("num_quarters", v); }},
      {"start_year", [](C& c, const std::string& v) { c.start_year = static_cast<int>(to_int("start_year", v)); }},
      {"start_quarter", [](C& c, const std::string& v) { c.start_quarter = static_cast<int>(to_int("start_quarter", v)); }},
      {"sentence_dim", [](C& c, const std::string& v) { c.sentence_dim = to_count("sentence_dim", v); }},
      {"min_sentences", [](C& c, const std::string& v) { c.min_sentences = to_count("min_sentences", v); }},
      {"max_sentences", [](C& c, const std::string& v) { c.max_sentences = to_count("max_sentences", v); }},
      {"relation_density", [](C& c, const std::string& v) { c.relation_density = to_real("relation_density", v); }},
      {"relation_persistence", [](C& c, const std::string& v) { c.relation_persistence = to_real("relation_persistence", v); }},
      {"signal_strength", [](C& c, const std::string& v) { c.signal_strength = to_real("signal_strength", v); }},
      {"neighbor_weight", [](C& c, const std::string& v) { c.neighbor_weight = to_real("neighbor_weight", v); }},
      {"regime_sd", [](C& c, const std::string& v) { c.regime_sd = to_real("regime_sd", v); }},
      {"noise_sd", [](C& c, const std::string& v) { c.noise_sd = to_real("noise_sd", v); }},
      {"tone_amplitude", [](C& c, const std::string& v) { c.tone_amplitude = to_real("tone_amplitude", v); }},
      {"sentence_noise", [](C& c, const std::string& v) { c.sentence_noise = to_real("sentence_noise", v); }},
      {"base_vol", [](C& c, const std::string& v) { c.base_vol = to_real("base_vol", v); }},
      {"return_jitter", [](C& c, const std::string& v) { c.return_jitter = to_real("return_jitter", v); }},
      {"event_days", [](C& c, const std::string& v) { c.event_days = to_count("event_days", v); }},
      {"call_window_start", [](C& c, const std::string& v) { c.call_window_start = static_cast<int>(to_int("call_window_start", v)); }},
      {"call_window_end", [](C& c, const std::string& v) { c.call_window_end = static_cast<int>(to_int("call_window_end", v)); }},
      {"threshold", [](C& c, const std::string& v) { c.threshold = to_real("threshold", v); }},
      {"emit_text", [](C& c, const std::string& v) { c.emit_text = to_bool("emit_text", v); }},
  };
  return s;
}

}  // namespace

ParsedModelConfig parse_model_config(std::string_view text, const std::string& source) {
  ParsedModelConfig out;
  const auto kv = parse_key_values(text, source);
  apply(kv, model_setters(), out.config, source);
  for (const auto& [k, v] : kv) out.keys.insert(k);
  out.config.validate();
  return out;
}

ParsedModelConfig load_model_config(const std::filesystem::path& path) {
  return parse_model_config(detail::read_file(path), path.string());
}

std::string format_model_config(const ModelConfig& c) {
  std::ostringstream os;
  os << "lr = " << real(c.lr) << '\n'
     << "weight_decay = " << real(c.weight_decay) << '\n'
     << "d_hidden = " << c.d_hidden << '\n'
     << "d_struct = " << c.d_struct << '\n'
     << "sentence_dim = " << c.sentence_dim << '\n'
     << "max_sentences = " << c.max_sentences << '\n'
     << "max_utterances = " << c.max_utterances << '\n'
     << "dialogue_layers = " << c.dialogue_layers << '\n'
     << "dialogue_heads = " << c.dialogue_heads << '\n'
     << "network_layers = " << c.network_layers << '\n'
     << "network_heads = " << c.network_heads << '\n'
     << "head_hidden = " << c.head_hidden << '\n'
     << "patience = " << c.patience << '\n'
     << "max_epochs = " << c.max_epochs << '\n'
     << "horizons = " << join(c.horizons) << '\n'
     << "joint_heads = " << (c.joint_heads ? "true" : "false") << '\n'
     << "seed = " << c.seed << '\n'
     << "threshold = " << real(c.threshold) << '\n'
     << "validation_year = " << c.validation_year << '\n'
     << "test_year = " << c.test_year << '\n'
     << "window = " << (c.window == data::WindowMode::TradingDays ? "trading" : "calendar") << '\n'
     << "pool_norm = " << (c.pool_norm == market::PoolNorm::Softmax ? "softmax" : "literal") << '\n';
  return os.str();
}

data::SynthConfig parse_synth_config(std::string_view text, const std::string& source) {
  data::SynthConfig cfg;
  apply(parse_key_values(text, source), synth_setters(), cfg, source);
  cfg.validate();
  return cfg;
}

data::SynthConfig load_synth_config(const std::filesystem::path& path) {
  return parse_synth_config(detail::read_file(path), path.string());
}

std::string format_synth_config(const data::SynthConfig& c) {
  std::ostringstream os;
  os << "num_companies = " << c.num_companies << '\n'
     << "num_quarters = " << c.num_quarters << '\n'
     << "start_year = " << c.start_year << '\n'
     << "start_quarter = " << c.start_quarter << '\n'
     << "sentence_dim = " << c.sentence_dim << '\n'
     << "min_sentences = " << c.min_sentences << '\n'
     << "max_sentences = " << c.max_sentences << '\n'
     << "relation_density = " << real(c.relation_density) << '\n'
     << "relation_persistence = " << real(c.relation_persistence) << '\n'
     << "signal_strength = " << real(c.signal_strength) << '\n'
     << "neighbor_weight = " << real(c.neighbor_weight) << '\n'
     << "regime_sd = " << real(c.regime_sd) << '\n'
     << "noise_sd = " << real(c.noise_sd) << '\n'
     << "tone_amplitude = " << real(c.tone_amplitude) << '\n'
     << "sentence_noise = " << real(c.sentence_noise) << '\n'
     << "base_vol = " << real(c.base_vol) << '\n'
     << "return_jitter = " << real(c.return_jitter) << '\n'
     << "event_days = " << c.event_days << '\n'
     << "call_window_start = " << c.call_window_start << '\n'
     << "call_window_end = " << c.call_window_end << '\n'
     << "threshold = " << real(c.threshold) << '\n'
     << "emit_text = " << (c.emit_text ? "true" : "false") << '\n';
  return os.str();
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return format_model_config(a) == format_model_config(b);
}

}  // namespace tvgnn::pipeline
