#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace tvgnn::data {

/// Deterministic stand-in for a pretrained sentence encoder: lower-cased
/// alphanumeric tokens are hashed (FNV-1a) into `dim` count buckets and the
/// result is l2-normalized. Text without tokens maps to the zero vector.
std::vector<double> hash_featurize(std::string_view text, std::size_t dim);

}  // namespace tvgnn::data
