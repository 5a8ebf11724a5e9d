#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/nn.hpp"
#include "tvgnn/params.hpp"
#include "tvgnn/records.hpp"
#include "tvgnn/rng.hpp"

namespace tvgnn::dialogue {

struct DialogueConfig {
  std::size_t sentence_dim = 768;
  std::size_t d_pos = 8;
  std::size_t d_utt = 8;
  std::size_t d_role = 8;
  std::size_t d_part = 8;
  std::size_t d_hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 8;
  std::size_t max_sentences = 512;
  std::size_t max_utterances = 256;

  std::size_t input_width() const { return sentence_dim + d_pos + d_utt + d_role + d_part; }
  void validate() const;
};

/// A call reduced to table indices plus raw sentence vectors, ready for the
/// encoder. Built once per call and reused across epochs.
struct EncodedCall {
  std::string call_id;
  Tensor sentences;  // N x sentence_dim
  std::vector<std::size_t> position;
  std::vector<std::size_t> utterance;
  std::vector<std::size_t> role;
  std::vector<std::size_t> part;
  std::size_t truncated = 0;         // sentences dropped past max_sentences
  std::size_t utterances_clamped = 0;

  std::size_t size() const { return position.size(); }
};

/// Sentence vectors come from the record when present, otherwise from the
/// hash featurizer over the text. Trailing sentences past max_sentences are
/// dropped and utterance indices past the table are clamped to its last row.
/// Throws DataError for an empty call or a vector of the wrong length.
EncodedCall prepare_call(const data::CallRecord& call, const DialogueConfig& cfg);

/// Position, utterance, role and part lookup tables.
struct StructEmbedTables {
  ag::Var position;   // max_sentences x d_pos
  ag::Var utterance;  // max_utterances x d_utt
  ag::Var role;       // 2 x d_role
  ag::Var part;       // 2 x d_part
};

struct DialogueEncoder {
  DialogueConfig cfg;
  StructEmbedTables tables;
  nn::Linear input;  // input_width -> d_hidden
  ag::Var cls;       // 1 x d_hidden
  std::vector<nn::TransformerEncoderLayer> layers;

  static DialogueEncoder init(ParamStore& store, const std::string& prefix, const DialogueConfig& cfg,
                              Rng& rng);
  static DialogueEncoder bind(const ParamStore& store, const std::string& prefix,
                              const DialogueConfig& cfg);

  /// Row j = s_j | pos_j | uttr_j | role_j | part_j.
  ag::Var featurize(const EncodedCall& call) const;
  /// Projects X, prepends CLS, runs the layers and returns the CLS row (1 x d_hidden).
  ag::Var encode(const ag::Var& x) const;
  ag::Var operator()(const EncodedCall& call) const { return encode(featurize(call)); }
};

/// Call embeddings keyed by call id, saved when the encoder is frozen.
struct EmbeddingCache {
  std::vector<std::string> call_ids;
  Tensor embeddings;  // one row per call id
  std::uint64_t seed = 0;
  std::uint64_t param_fingerprint = 0;
};

/// Writes <stem>.bin (raw doubles, host byte order) and <stem>.json (manifest).
void write_cache(const std::filesystem::path& stem, const EmbeddingCache& cache);
/// Throws DataError when the manifest and matrix disagree, or when
/// `expected_fingerprint` is nonzero and differs from the stored one.
EmbeddingCache read_cache(const std::filesystem::path& stem, std::uint64_t expected_fingerprint = 0);

}  // namespace tvgnn::dialogue
