#pragma once

#include <cstdint>
#include <vector>

#include "tvgnn/params.hpp"

namespace tvgnn {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled: w <- w - lr * weight_decay * w, applied after the Adam update.
  double weight_decay = 1e-7;
};

/// First/second moments per parameter, aligned with ParamStore order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  void reset() {
    m.clear();
    v.clear();
    step = 0;
  }
};

/// One Adam update over every parameter in `store`. Parameters with no
/// gradient buffer are treated as having zero gradient. Throws NumericError
/// naming the first parameter whose gradient is not finite.
void adam_step(ParamStore& store, AdamState& state, const AdamConfig& cfg);

}  // namespace tvgnn
