#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/rng.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

/// Named trainable tensors. Iteration follows registration order, which is
/// what makes checkpoints, optimizer state and gradient checks deterministic.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    ag::Var var;
  };
  using Snapshot = std::vector<Tensor>;

  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  /// Registers a parameter; throws ConfigError on a duplicate name.
  ag::Var add(std::string name, Tensor init);
  /// Registers with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) entries.
  ag::Var add_uniform(std::string name, Shape shape, std::size_t fan_in, Rng& rng);

  const ag::Var& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t num_scalars() const;

  void zero_grad();

  Snapshot snapshot() const;
  void restore(const Snapshot& snap);
  /// Deep copy with fresh leaves and no gradient history.
  ParamStore clone() const;

  /// FNV-1a over names, shapes and value bytes.
  std::uint64_t fingerprint() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace tvgnn
