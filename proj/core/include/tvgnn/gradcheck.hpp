#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "tvgnn/autograd.hpp"
#include "tvgnn/params.hpp"

namespace tvgnn {

struct GradCheckOptions {
  double step = 1e-5;
  double tol = 1e-4;
  /// Denominator floor for the relative error, so entries whose true
  /// derivative is ~0 are judged on absolute error instead.
  double floor = 1e-5;
};

struct GradCheckViolation {
  std::string name;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::string worst_param;
  std::vector<GradCheckViolation> violations;

  bool passed() const { return violations.empty(); }
};

using LossFn = std::function<ag::Var()>;

/// Compares reverse-mode gradients against central differences for every
/// entry of every parameter in `store`.
///
/// rel_error = |analytic - numeric| / max(|analytic|, |numeric|, floor)
///
/// `loss_fn` must rebuild the expression from the current parameter values
/// on each call and be deterministic.
GradCheckReport grad_check(const LossFn& loss_fn, ParamStore& store,
                           const GradCheckOptions& opts = {});

/// Same as above but with analytic gradients supplied by the caller (one
/// tensor per parameter, in store order). Used to test the checker itself.
GradCheckReport grad_check_against(const LossFn& loss_fn, ParamStore& store,
                                   const std::vector<Tensor>& analytic,
                                   const GradCheckOptions& opts = {});

/// Runs `loss_fn` once, backpropagates, and returns a copy of each
/// parameter gradient (zeros where none reached).
std::vector<Tensor> analytic_gradients(const LossFn& loss_fn, ParamStore& store);

}  // namespace tvgnn
