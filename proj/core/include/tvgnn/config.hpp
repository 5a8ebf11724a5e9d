#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tvgnn/dialogue.hpp"
#include "tvgnn/market.hpp"
#include "tvgnn/split.hpp"
#include "tvgnn/synth.hpp"
#include "tvgnn/volatility.hpp"

namespace tvgnn::pipeline {

/// Training and architecture settings. Keys in the flat config file use the
/// field names below.
struct ModelConfig {
  double lr = 5e-4;
  double weight_decay = 1e-7;
  std::size_t d_hidden = 64;
  std::size_t d_struct = 8;  // each of the four structural embeddings
  std::size_t sentence_dim = 768;
  std::size_t max_sentences = 512;
  std::size_t max_utterances = 256;
  std::size_t dialogue_layers = 2;
  std::size_t dialogue_heads = 8;
  std::size_t network_layers = 3;
  std::size_t network_heads = 1;
  std::size_t head_hidden = 64;
  std::size_t patience = 10;
  std::size_t max_epochs = 200;
  std::vector<int> horizons = {3, 7, 15};
  /// One shared encoder with a head per horizon instead of one model per horizon.
  bool joint_heads = false;
  std::uint64_t seed = 0;
  double threshold = 0.15;
  int validation_year = 2016;
  int test_year = 2017;
  data::WindowMode window = data::WindowMode::TradingDays;
  market::PoolNorm pool_norm = market::PoolNorm::Softmax;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  dialogue::DialogueConfig dialogue() const;
  data::SplitBoundaries boundaries() const { return {validation_year, test_year}; }
};

/// "key = value" lines; '#' starts a comment; blank lines ignored. Throws
/// ConfigError on malformed lines or repeated keys.
std::map<std::string, std::string> parse_key_values(std::string_view text, const std::string& source = "<config>");

struct ParsedModelConfig {
  ModelConfig config;
  std::set<std::string> keys;  // keys that were set explicitly
};

/// Unknown keys are rejected.
ParsedModelConfig parse_model_config(std::string_view text, const std::string& source = "<config>");
ParsedModelConfig load_model_config(const std::filesystem::path& path);
/// Writes every field; parse_model_config(format_model_config(c)).config == c.
std::string format_model_config(const ModelConfig& cfg);

data::SynthConfig parse_synth_config(std::string_view text, const std::string& source = "<config>");
data::SynthConfig load_synth_config(const std::filesystem::path& path);
std::string format_synth_config(const data::SynthConfig& cfg);

bool operator==(const ModelConfig& a, const ModelConfig& b);

}  // namespace tvgnn::pipeline
