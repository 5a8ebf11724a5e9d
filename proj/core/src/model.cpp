#include "tvgnn/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "tvgnn/errors.hpp"
#include "tvgnn/rng.hpp"
#include "text_util.hpp"

namespace tvgnn::pipeline {

namespace {

std::string head_prefix(int tau) { return "head" + std::to_string(tau); }

}  // namespace

TvgnnModel TvgnnModel::create(const ModelConfig& cfg, std::vector<int> horizons, std::uint64_t seed) {
  cfg.validate();
  if (horizons.empty()) throw ConfigError("model needs at least one horizon");
  for (int tau : horizons) horizon_column(tau);
  TvgnnModel m;
  m.cfg_ = cfg;
  m.horizons_ = std::move(horizons);
  m.seed_ = seed;
  Rng rng(seed);
  dialogue::DialogueEncoder::init(m.params_, "dialogue", cfg.dialogue(), rng);
  gnn::EncoderParams::init(m.params_, "network", cfg.d_hidden, cfg.network_layers, rng);
  for (int tau : m.horizons_) {
    const auto p = head_prefix(tau);
    nn::Linear::init(m.params_, p + ".l1", cfg.d_hidden, cfg.head_hidden, rng);
    m.params_.add(p + ".l2.w", Tensor::matrix(1, cfg.head_hidden));
    m.params_.add(p + ".l2.b", Tensor::matrix(1, 1));
  }
  return m;
}

TvgnnModel TvgnnModel::clone() const {
  TvgnnModel m;
  m.cfg_ = cfg_;
  m.horizons_ = horizons_;
  m.seed_ = seed_;
  m.params_ = params_.clone();
  return m;
}

ag::Var TvgnnModel::embed_calls(std::span<const dialogue::EncodedCall> calls) const {
  const auto enc = dialogue::DialogueEncoder::bind(params_, "dialogue", cfg_.dialogue());
  std::vector<ag::Var> rows;
  rows.reserve(calls.size());
  for (const auto& c : calls) rows.push_back(enc(c));
  return ag::concat_rows(rows);
}

ForwardResult TvgnnModel::forward(const QuarterData& q) const { return forward_from_embeddings(q, embed_calls(q.calls)); }

ForwardResult TvgnnModel::forward_from_embeddings(const QuarterData& q, const ag::Var& initial) const {
  ForwardResult r;
  r.initial = initial;
  const auto net = gnn::EncoderParams::bind(params_, "network", cfg_.network_layers);
  r.encoder = gnn::company_network_encoder(q.graph, q.edges, initial, net, cfg_.pool_norm);
  std::vector<ag::Var> cols;
  for (int tau : horizons_) {
    const auto p = head_prefix(tau);
    const auto l1 = nn::Linear::bind(params_, p + ".l1");
    const auto l2 = nn::Linear::bind(params_, p + ".l2");
    cols.push_back(l2(ag::relu(l1(r.encoder.embeddings))));
  }
  r.predictions = cols.size() == 1 ? cols.front() : ag::concat_cols(cols);
  return r;
}

void TvgnnModel::set_output_bias(int tau, double value) {
  params_.get(head_prefix(tau) + ".l2.b").node()->value = Tensor::from_rows({{value}});
}

ModelBundle ModelBundle::create(const ModelConfig& cfg) {
  cfg.validate();
  ModelBundle b;
  b.config = cfg;
  Rng rng(cfg.seed);
  if (cfg.joint_heads) {
    b.models.push_back(TvgnnModel::create(cfg, cfg.horizons, rng.next_u64()));
  } else {
    for (int tau : cfg.horizons) b.models.push_back(TvgnnModel::create(cfg, {tau}, rng.next_u64()));
  }
  return b;
}

ModelBundle ModelBundle::clone() const {
  ModelBundle b;
  b.config = config;
  for (const auto& m : models) b.models.push_back(m.clone());
  return b;
}

const TvgnnModel& ModelBundle::model_for(int tau) const {
  for (const auto& m : models)
    for (int t : m.horizons())
      if (t == tau) return m;
  throw ConfigError("no model covers horizon " + std::to_string(tau));
}

Tensor ModelBundle::predict(const QuarterData& q) const {
  Tensor out = Tensor::matrix(q.num_nodes(), data::kHorizons.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& m : models) {
    const Tensor p = m.forward(q).predictions.value();
    for (std::size_t k = 0; k < m.horizons().size(); ++k) {
      const std::size_t col = horizon_column(m.horizons()[k]);
      for (std::size_t i = 0; i < q.num_nodes(); ++i) out(i, col) = p(i, k);
    }
  }
  return out;
}

// Checkpoint layout (host byte order):
//   "TVGNNCKP" u32 version u64 seed str config u32 n_models
//   per model: u64 seed u32 n_horizons i32[] u64 n_params
//     per param: str name u32 rank u64[] dims f64[] values
//   u64 fingerprint of all stores combined
namespace {

constexpr char kMagic[8] = {'T', 'V', 'G', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_str(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  std::string bytes;
  std::size_t pos = 0;
  std::string path;

  void need(std::size_t n) {
    if (bytes.size() - pos < n) throw DataError("checkpoint " + path + " is truncated");
  }
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

std::uint64_t combined_fingerprint(const ModelBundle& b) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& m : b.models) h = (h ^ m.params().fingerprint()) * 1099511628211ull;
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle) {
  auto out = detail::open_out(path);
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put<std::uint64_t>(out, bundle.config.seed);
  put_str(out, format_model_config(bundle.config));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.models.size()));
  for (const auto& m : bundle.models) {
    put<std::uint64_t>(out, m.seed());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.horizons().size()));
    for (int t : m.horizons()) put<std::int32_t>(out, t);
    put<std::uint64_t>(out, m.params().size());
    for (const auto& e : m.params().entries()) {
      put_str(out, e.name);
      const auto& v = e.var.value();
      put<std::uint32_t>(out, static_cast<std::uint32_t>(v.rank()));
      for (auto d : v.shape()) put<std::uint64_t>(out, d);
      out.write(reinterpret_cast<const char*>(v.storage().data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
  }
  put<std::uint64_t>(out, combined_fingerprint(bundle));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
  Reader r{detail::read_file(path), 0, path.string()};
  r.need(sizeof kMagic);
  if (std::memcmp(r.bytes.data(), kMagic, sizeof kMagic) != 0) throw DataError(path.string() + " is not a tvgnn checkpoint");
  r.pos = sizeof kMagic;
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw DataError("checkpoint version " + std::to_string(version) + " is not supported");
  ModelBundle b;
  const auto seed = r.get<std::uint64_t>();
  b.config = parse_model_config(r.get_str(), path.string() + " (config)").config;
  if (b.config.seed != seed) throw DataError("checkpoint seed disagrees with its config");
  const auto n_models = r.get<std::uint32_t>();
  for (std::uint32_t mi = 0; mi < n_models; ++mi) {
    const auto model_seed = r.get<std::uint64_t>();
    std::vector<int> horizons(r.get<std::uint32_t>());
    for (auto& t : horizons) t = r.get<std::int32_t>();
    TvgnnModel m = TvgnnModel::create(b.config, horizons, model_seed);
    const auto n_params = r.get<std::uint64_t>();
    if (n_params != m.params().size()) {
      throw DataError("checkpoint model " + std::to_string(mi) + " has " + std::to_string(n_params) +
                      " parameters; the config implies " + std::to_string(m.params().size()));
    }
    for (std::uint64_t pi = 0; pi < n_params; ++pi) {
      const auto name = r.get_str();
      const auto& entry = m.params().entries()[pi];
      if (name != entry.name) throw DataError("checkpoint parameter '" + name + "' where '" + entry.name + "' was expected");
      Shape shape(r.get<std::uint32_t>());
      for (auto& d : shape) d = r.get<std::uint64_t>();
      Tensor& value = entry.var.node()->value;
      if (shape != value.shape()) {
        throw DataError("checkpoint parameter '" + name + "' has shape " + shape_str(shape) + ", expected " +
                        shape_str(value.shape()));
      }
      r.need(value.size() * sizeof(double));
      std::memcpy(value.storage().data(), r.bytes.data() + r.pos, value.size() * sizeof(double));
      r.pos += value.size() * sizeof(double);
    }
    b.models.push_back(std::move(m));
  }
  if (r.get<std::uint64_t>() != combined_fingerprint(b)) throw DataError("checkpoint fingerprint mismatch");
  if (r.pos != r.bytes.size()) throw DataError("checkpoint has trailing bytes");
  return b;
}

}  // namespace tvgnn::pipeline
