#include "tvgnn/optim.hpp"

#include <cmath>

#include "tvgnn/errors.hpp"

namespace tvgnn {

void adam_step(ParamStore& store, AdamState& state, const AdamConfig& cfg) {
  const auto& entries = store.entries();
  for (const auto& e : entries) {
    const Tensor& g = e.var.grad();
    if (!g.empty() && !g.all_finite()) {
      throw NumericError("non-finite gradient in parameter '" + e.name + "'");
    }
  }
  if (state.m.empty()) {
    for (const auto& e : entries) {
      state.m.emplace_back(e.var.shape(), 0.0);
      state.v.emplace_back(e.var.shape(), 0.0);
    }
  }
  if (state.m.size() != entries.size()) {
    throw DimensionError("adam_step: optimizer state does not match parameter store");
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - cfg.lr * cfg.weight_decay;

  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor& w = entries[p].var.node()->value;
    const Tensor& g = entries[p].var.grad();
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    require_same_shape(w, m, "adam_step");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      w[i] *= decay;
    }
  }
}

}  // namespace tvgnn
