#include "tvgnn/params.hpp"

#include <cmath>
#include <cstring>

#include "tvgnn/errors.hpp"

namespace tvgnn {

ag::Var ParamStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw ConfigError("parameter registered twice: " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), ag::leaf(std::move(init))});
  return entries_.back().var;
}

ag::Var ParamStore::add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = rng.uniform(-bound, bound);
  return add(std::move(name), std::move(t));
}

const ag::Var& ParamStore::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ConfigError("unknown parameter: " + std::string(name));
  return entries_[it->second].var;
}

bool ParamStore::contains(std::string_view name) const { return index_.contains(std::string(name)); }

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.var.value().size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) {
    auto& g = e.var.node()->grad;
    if (!g.empty()) g.fill(0.0);
  }
}

ParamStore::Snapshot ParamStore::snapshot() const {
  Snapshot snap;
  snap.reserve(entries_.size());
  for (const auto& e : entries_) snap.push_back(e.var.value());
  return snap;
}

void ParamStore::restore(const Snapshot& snap) {
  if (snap.size() != entries_.size()) throw DimensionError("restore: snapshot size mismatch");
  for (std::size_t i = 0; i < snap.size(); ++i) {
    require_same_shape(entries_[i].var.value(), snap[i], "restore");
    entries_[i].var.node()->value = snap[i];
  }
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& e : entries_) out.add(e.name, e.var.value());
  return out;
}

std::uint64_t ParamStore::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& e : entries_) {
    mix(e.name.data(), e.name.size());
    for (auto d : e.var.shape()) mix(&d, sizeof d);
    const auto& data = e.var.value().storage();
    mix(data.data(), data.size() * sizeof(double));
  }
  return h;
}

}  // namespace tvgnn
