#include "tvgnn/featurizer.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>

#include "tvgnn/errors.hpp"

namespace tvgnn::data {

std::vector<double> hash_featurize(std::string_view text, std::size_t dim) {
  if (dim == 0) throw ConfigError("hash_featurize: dimension must be positive");
  std::vector<double> v(dim, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : token) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    // Counts rather than signed hashes: a signed scheme can cancel to the
    // zero vector, which would break the unit-norm contract.
    v[h % dim] += 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    // Bytes >= 0x80 belong to multi-byte UTF-8 sequences; keep them inside tokens.
    if (std::isalnum(c) || c >= 0x80) {
      token.push_back(static_cast<char>(c >= 0x80 ? c : std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

}  // namespace tvgnn::data
