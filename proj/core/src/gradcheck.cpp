#include "tvgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tvgnn/errors.hpp"

namespace tvgnn {

std::vector<Tensor> analytic_gradients(const LossFn& loss_fn, ParamStore& store) {
  store.zero_grad();
  ag::Var loss = loss_fn();
  ag::backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(store.size());
  for (const auto& e : store.entries()) {
    grads.push_back(e.var.grad().empty() ? Tensor(e.var.shape(), 0.0) : e.var.grad());
  }
  store.zero_grad();
  return grads;
}

GradCheckReport grad_check_against(const LossFn& loss_fn, ParamStore& store,
                                   const std::vector<Tensor>& analytic,
                                   const GradCheckOptions& opts) {
  if (analytic.size() != store.size()) {
    throw DimensionError("grad_check: analytic gradient count does not match store");
  }
  GradCheckReport report;
  const auto& entries = store.entries();
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor& w = entries[p].var.node()->value;
    require_same_shape(w, analytic[p], "grad_check");
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double orig = w[i];
      w[i] = orig + opts.step;
      const double up = loss_fn().item();
      w[i] = orig - opts.step;
      const double down = loss_fn().item();
      w[i] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (!(rel <= report.max_rel_error)) {
        report.max_rel_error = rel;
        report.worst_param = entries[p].name;
      }
      if (!(rel <= opts.tol)) {
        report.violations.push_back({entries[p].name, i, a, numeric, rel});
      }
    }
  }
  return report;
}

GradCheckReport grad_check(const LossFn& loss_fn, ParamStore& store, const GradCheckOptions& opts) {
  return grad_check_against(loss_fn, store, analytic_gradients(loss_fn, store), opts);
}

}  // namespace tvgnn
