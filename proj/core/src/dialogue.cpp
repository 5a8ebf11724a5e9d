#include "tvgnn/dialogue.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tvgnn/errors.hpp"
#include "tvgnn/featurizer.hpp"
#include "text_util.hpp"

namespace tvgnn::dialogue {

void DialogueConfig::validate() const {
  if (sentence_dim == 0 || d_hidden == 0) throw ConfigError("dialogue: sentence_dim and d_hidden must be positive");
  if (max_sentences == 0 || max_utterances == 0) throw ConfigError("dialogue: table sizes must be positive");
  nn::TransformerConfig{d_hidden, heads, 4}.validate();
}

EncodedCall prepare_call(const data::CallRecord& call, const DialogueConfig& cfg) {
  if (call.sentences.empty()) throw DataError("call '" + call.call_id + "' has no sentences");
  EncodedCall out;
  out.call_id = call.call_id;
  const std::size_t n = std::min(call.sentences.size(), cfg.max_sentences);
  out.truncated = call.sentences.size() - n;
  out.sentences = Tensor::matrix(n, cfg.sentence_dim);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& s = call.sentences[j];
    std::vector<double> v;
    if (s.vector) {
      v = *s.vector;
    } else if (s.text) {
      v = data::hash_featurize(*s.text, cfg.sentence_dim);
    } else {
      throw DataError("call '" + call.call_id + "' sentence " + std::to_string(j) + " has neither text nor vector");
    }
    if (v.size() != cfg.sentence_dim) {
      throw DataError("call '" + call.call_id + "' sentence " + std::to_string(j) + " has vector length " +
                      std::to_string(v.size()) + ", expected " + std::to_string(cfg.sentence_dim));
    }
    std::copy(v.begin(), v.end(), out.sentences.row_span(j).begin());
    out.position.push_back(j);
    std::size_t u = s.utterance_idx;
    if (u >= cfg.max_utterances) {
      u = cfg.max_utterances - 1;
      ++out.utterances_clamped;
    }
    out.utterance.push_back(u);
    out.role.push_back(s.role == data::Role::Executive ? 0 : 1);
    out.part.push_back(s.part == data::Part::Presentation ? 0 : 1);
  }
  return out;
}

DialogueEncoder DialogueEncoder::init(ParamStore& store, const std::string& prefix, const DialogueConfig& cfg,
                                      Rng& rng) {
  cfg.validate();
  DialogueEncoder enc;
  enc.cfg = cfg;
  // Tables are indexed lookups, so fan_in is the embedding width.
  enc.tables.position = store.add_uniform(prefix + ".pos", {cfg.max_sentences, cfg.d_pos}, cfg.d_pos, rng);
  enc.tables.utterance = store.add_uniform(prefix + ".utt", {cfg.max_utterances, cfg.d_utt}, cfg.d_utt, rng);
  enc.tables.role = store.add_uniform(prefix + ".role", {2, cfg.d_role}, cfg.d_role, rng);
  enc.tables.part = store.add_uniform(prefix + ".part", {2, cfg.d_part}, cfg.d_part, rng);
  enc.input = nn::Linear::init(store, prefix + ".in", cfg.input_width(), cfg.d_hidden, rng);
  enc.cls = store.add_uniform(prefix + ".cls", {1, cfg.d_hidden}, cfg.d_hidden, rng);
  const nn::TransformerConfig tcfg{cfg.d_hidden, cfg.heads, 4};
  for (std::size_t l = 0; l < cfg.layers; ++l)
    enc.layers.push_back(nn::TransformerEncoderLayer::init(store, prefix + ".layer" + std::to_string(l), tcfg, rng));
  return enc;
}

DialogueEncoder DialogueEncoder::bind(const ParamStore& store, const std::string& prefix,
                                      const DialogueConfig& cfg) {
  cfg.validate();
  DialogueEncoder enc;
  enc.cfg = cfg;
  enc.tables = {store.get(prefix + ".pos"), store.get(prefix + ".utt"), store.get(prefix + ".role"),
                store.get(prefix + ".part")};
  enc.input = nn::Linear::bind(store, prefix + ".in");
  enc.cls = store.get(prefix + ".cls");
  const nn::TransformerConfig tcfg{cfg.d_hidden, cfg.heads, 4};
  for (std::size_t l = 0; l < cfg.layers; ++l)
    enc.layers.push_back(nn::TransformerEncoderLayer::bind(store, prefix + ".layer" + std::to_string(l), tcfg));
  return enc;
}

ag::Var DialogueEncoder::featurize(const EncodedCall& call) const {
  if (call.size() == 0) throw DataError("featurize: call '" + call.call_id + "' is empty");
  if (call.sentences.cols() != cfg.sentence_dim) throw DimensionError("featurize: sentence width mismatch");
  for (std::size_t j = 0; j < call.size(); ++j) {
    if (call.position[j] >= cfg.max_sentences || call.utterance[j] >= cfg.max_utterances || call.role[j] > 1 ||
        call.part[j] > 1) {
      throw DimensionError("featurize: index out of table range in call '" + call.call_id + "'");
    }
  }
  const std::array<ag::Var, 5> parts = {
      ag::constant(call.sentences), ag::gather_rows(tables.position, call.position),
      ag::gather_rows(tables.utterance, call.utterance), ag::gather_rows(tables.role, call.role),
      ag::gather_rows(tables.part, call.part)};
  return ag::concat_cols(parts);
}

ag::Var DialogueEncoder::encode(const ag::Var& x) const {
  if (x.rows() == 0) throw DataError("encode: empty sentence matrix");
  const std::array<ag::Var, 2> rows = {cls, input(x)};
  ag::Var h = ag::concat_rows(rows);
  for (const auto& layer : layers) h = layer(h);
  return ag::slice_rows(h, 0, 1);
}

void write_cache(const std::filesystem::path& stem, const EmbeddingCache& cache) {
  if (cache.embeddings.rows() != cache.call_ids.size()) throw DimensionError("write_cache: row count != call ids");
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  {
    auto out = detail::open_out(bin_path);
    const auto& d = cache.embeddings.storage();
    out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
  }
  nlohmann::json manifest = {{"format", "tvgnn-embedding-cache"},
                             {"version", 1},
                             {"rows", cache.embeddings.rows()},
                             {"cols", cache.embeddings.cols()},
                             {"byte_order", std::endian::native == std::endian::little ? "little" : "big"},
                             {"seed", cache.seed},
                             {"param_fingerprint", cache.param_fingerprint},
                             {"call_ids", cache.call_ids}};
  detail::open_out(json_path) << manifest.dump(2) << '\n';
}

EmbeddingCache read_cache(const std::filesystem::path& stem, std::uint64_t expected_fingerprint) {
  auto bin_path = stem;
  bin_path += ".bin";
  auto json_path = stem;
  json_path += ".json";
  const auto manifest = nlohmann::json::parse(detail::read_file(json_path));
  EmbeddingCache cache;
  const auto rows = manifest.at("rows").get<std::size_t>();
  const auto cols = manifest.at("cols").get<std::size_t>();
  cache.seed = manifest.at("seed").get<std::uint64_t>();
  cache.param_fingerprint = manifest.at("param_fingerprint").get<std::uint64_t>();
  cache.call_ids = manifest.at("call_ids").get<std::vector<std::string>>();
  const std::string native = std::endian::native == std::endian::little ? "little" : "big";
  if (manifest.at("byte_order").get<std::string>() != native) throw DataError("cache: byte order mismatch");
  if (cache.call_ids.size() != rows) throw DataError("cache: manifest lists " + std::to_string(cache.call_ids.size()) +
                                                     " call ids for " + std::to_string(rows) + " rows");
  if (expected_fingerprint != 0 && expected_fingerprint != cache.param_fingerprint) {
    throw DataError("cache: parameter fingerprint mismatch; the encoder changed since the cache was written");
  }
  const std::string bytes = detail::read_file(bin_path);
  if (bytes.size() != rows * cols * sizeof(double)) throw DataError("cache: matrix file has the wrong size");
  cache.embeddings = Tensor::matrix(rows, cols);
  std::copy(bytes.begin(), bytes.end(), reinterpret_cast<char*>(cache.embeddings.storage().data()));
  return cache;
}

}  // namespace tvgnn::dialogue
