#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tvgnn/records.hpp"

namespace tvgnn::data {

/// Knobs for the synthetic corpus.
///
/// Each call gets a latent tone z ~ N(0,1). Executive sentence vectors carry
/// `tone_amplitude * z` along a fixed direction, on top of isotropic noise.
/// After the call, absolute daily returns are scaled for `event_days` trading
/// days by
///
///   exp( signal_strength * (z + neighbor_weight * zbar + regime_q) + shock )
///
/// where zbar is the mean tone of related companies that reported on or before
/// the same day, regime_q ~ N(0, regime_sd^2) is shared by every call in the
/// quarter, and shock ~ N(0, noise_sd^2) is unpredictable. Outside event
/// windows returns alternate in sign with magnitude `base_vol * (1 + jitter)`,
/// so the trailing-window baseline is nearly noise-free. With
/// signal_strength = 0 nothing observable predicts the label beyond that
/// baseline.
struct SynthConfig {
  std::size_t num_companies = 40;
  std::size_t num_quarters = 12;
  int start_year = 2015;
  int start_quarter = 1;
  std::size_t sentence_dim = 32;
  std::size_t min_sentences = 8;
  std::size_t max_sentences = 14;
  /// Probability that an unordered company pair is related at all.
  double relation_density = 0.08;
  /// Probability a related pair is listed in a given year.
  double relation_persistence = 0.9;
  double signal_strength = 0.5;
  double neighbor_weight = 0.5;
  double regime_sd = 0.5;
  double noise_sd = 0.3;
  double tone_amplitude = 1.0;
  double sentence_noise = 1.0;
  double base_vol = 0.02;
  double return_jitter = 0.05;
  std::size_t event_days = 15;
  /// Calls fall on weekdays between these calendar-day offsets into the quarter.
  int call_window_start = 14;
  int call_window_end = 63;
  double threshold = 0.15;
  bool emit_text = false;

  /// Throws ConfigError for degenerate settings.
  void validate() const;
};

struct LatentRecord {
  std::string call_id;
  std::string company_id;
  Date call_date{};
  double tone = 0.0;
  double neighbor_tone = 0.0;
  double regime = 0.0;
  double shock = 0.0;
  /// Natural log of the post-call volatility multiplier.
  double log_multiplier = 0.0;
};

struct SynthDataset {
  std::vector<CallRecord> transcripts;
  std::vector<PriceSeries> prices;
  std::vector<RelationRecord> relations;
  std::vector<LatentRecord> latent;
};

SynthDataset gen_synthetic(const SynthConfig& cfg, std::uint64_t seed);

/// Writes transcripts.jsonl, prices.csv, relations.csv and latent.csv.
void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data);

}  // namespace tvgnn::data
