#include "tvgnn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>
#include <utility>

#include "tvgnn/errors.hpp"

namespace tvgnn::ag {

namespace {

using NodePtr = std::shared_ptr<Node>;

Var make(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad =
      std::any_of(parents.begin(), parents.end(), [](const NodePtr& p) { return p->requires_grad; });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward_fn = std::move(fn);
  }
  return Var(std::move(node));
}

bool wants(const Node& self, std::size_t i) { return self.parents[i]->requires_grad; }

Tensor& pgrad(Node& self, std::size_t i) { return self.parents[i]->grad_buffer(); }

const Tensor& pval(const Node& self, std::size_t i) { return self.parents[i]->value; }

void require_matrix(const Var& a, const char* op) {
  if (a.value().rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
  }
}

template <class F>
Var unary_elementwise(const Var& a, F&& fwd_and_deriv) {
  // fwd_and_deriv(x) -> pair(y, dy/dx given x and y)
  Tensor out = a.value();
  for (auto& v : out.storage()) v = fwd_and_deriv(v).first;
  auto fn = fwd_and_deriv;
  return make(std::move(out), {a.node()}, [fn](Node& self) {
    Tensor& ga = pgrad(self, 0);
    const Tensor& x = pval(self, 0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * fn(x[i]).second;
  });
}

}  // namespace

double Var::item() const {
  if (node_->value.size() != 1) {
    throw DimensionError("item: expected a single element, got " + shape_str(shape()));
  }
  return node_->value[0];
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var leaf(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

void backward(const Var& root) {
  if (!root.defined() || !root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Tensor& seed = root.node()->grad_buffer();
  for (auto& v : seed.storage()) v += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && !node->grad.empty()) node->backward_fn(*node);
  }
}

Var matmul(const Var& a, const Var& b) {
  return make(tvgnn::matmul(a.value(), b.value()), {a.node(), b.node()}, [](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), tvgnn::matmul_nt(self.grad, pval(self, 1)));
    if (wants(self, 1)) axpy_inplace(pgrad(self, 1), tvgnn::matmul_tn(pval(self, 0), self.grad));
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  return make(tvgnn::matmul_nt(a.value(), b.value()), {a.node(), b.node()}, [](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), tvgnn::matmul(self.grad, pval(self, 1)));
    if (wants(self, 1)) axpy_inplace(pgrad(self, 1), tvgnn::matmul_tn(self.grad, pval(self, 0)));
  });
}

Var transpose(const Var& a) {
  return make(tvgnn::transpose(a.value()), {a.node()}, [](Node& self) {
    axpy_inplace(pgrad(self, 0), tvgnn::transpose(self.grad));
  });
}

Var add(const Var& a, const Var& b) {
  return make(tvgnn::add(a.value(), b.value()), {a.node(), b.node()}, [](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), self.grad);
    if (wants(self, 1)) axpy_inplace(pgrad(self, 1), self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  return make(tvgnn::sub(a.value(), b.value()), {a.node(), b.node()}, [](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), self.grad);
    if (wants(self, 1)) axpy_inplace(pgrad(self, 1), self.grad, -1.0);
  });
}

Var mul(const Var& a, const Var& b) {
  return make(hadamard(a.value(), b.value()), {a.node(), b.node()}, [](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), hadamard(self.grad, pval(self, 1)));
    if (wants(self, 1)) axpy_inplace(pgrad(self, 1), hadamard(self.grad, pval(self, 0)));
  });
}

Var add_row(const Var& a, const Var& bias) {
  require_matrix(a, "add_row");
  if (bias.value().size() != a.cols()) {
    throw DimensionError("add_row: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(a.shape()));
  }
  Tensor out = a.value();
  const std::size_t n = a.cols();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += bias.value()[c];
  return make(std::move(out), {a.node(), bias.node()}, [n](Node& self) {
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), self.grad);
    if (wants(self, 1)) {
      Tensor& gb = pgrad(self, 1);
      for (std::size_t r = 0; r < self.grad.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += self.grad(r, c);
    }
  });
}

Var scale(const Var& a, double s) { return affine(a, s, 0.0); }

Var affine(const Var& a, double alpha, double beta) {
  Tensor out = a.value();
  for (auto& v : out.storage()) v = alpha * v + beta;
  return make(std::move(out), {a.node()}, [alpha](Node& self) {
    axpy_inplace(pgrad(self, 0), self.grad, alpha);
  });
}

Var mul_scalar(const Var& a, const Var& s) {
  if (s.value().size() != 1) throw DimensionError("mul_scalar: scale must be 1x1");
  return make(scaled(a.value(), s.value()[0]), {a.node(), s.node()}, [](Node& self) {
    const double sv = pval(self, 1)[0];
    if (wants(self, 0)) axpy_inplace(pgrad(self, 0), self.grad, sv);
    if (wants(self, 1)) {
      const Tensor& av = pval(self, 0);
      double acc = 0.0;
      for (std::size_t i = 0; i < av.size(); ++i) acc += self.grad[i] * av[i];
      pgrad(self, 1)[0] += acc;
    }
  });
}

Var mul_rows(const Var& a, const Var& s) {
  require_matrix(a, "mul_rows");
  if (s.value().size() != a.rows()) {
    throw DimensionError("mul_rows: scale " + shape_str(s.shape()) + " does not match " +
                         shape_str(a.shape()));
  }
  Tensor out = a.value();
  const std::size_t n = a.cols();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) *= s.value()[r];
  return make(std::move(out), {a.node(), s.node()}, [n](Node& self) {
    const Tensor& av = pval(self, 0);
    const Tensor& sv = pval(self, 1);
    if (wants(self, 0)) {
      Tensor& ga = pgrad(self, 0);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < n; ++c) ga(r, c) += self.grad(r, c) * sv[r];
    }
    if (wants(self, 1)) {
      Tensor& gs = pgrad(self, 1);
      for (std::size_t r = 0; r < av.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) acc += self.grad(r, c) * av(r, c);
        gs[r] += acc;
      }
    }
  });
}

Var sigmoid(const Var& a) {
  return unary_elementwise(a, [](double x) {
    const double y = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return std::pair{y, y * (1.0 - y)};
  });
}

Var tanh(const Var& a) {
  return unary_elementwise(a, [](double x) {
    const double y = std::tanh(x);
    return std::pair{y, 1.0 - y * y};
  });
}

Var relu(const Var& a) {
  return unary_elementwise(a, [](double x) {
    return x > 0 ? std::pair{x, 1.0} : std::pair{0.0, 0.0};
  });
}

Var leaky_relu(const Var& a, double negative_slope) {
  return unary_elementwise(a, [negative_slope](double x) {
    return x > 0 ? std::pair{x, 1.0} : std::pair{negative_slope * x, negative_slope};
  });
}

Var sum_all(const Var& a) {
  return make(Tensor::scalar(tvgnn::sum(a.value())), {a.node()}, [](Node& self) {
    const double g = self.grad[0];
    for (auto& v : pgrad(self, 0).storage()) v += g;
  });
}

Var row_sum(const Var& a) {
  require_matrix(a, "row_sum");
  Tensor out = Tensor::matrix(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (double v : a.value().row_span(r)) out[r] += v;
  return make(std::move(out), {a.node()}, [](Node& self) {
    Tensor& ga = pgrad(self, 0);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (auto& v : ga.row_span(r)) v += self.grad[r];
  });
}

Var softmax_rows(const Var& a) {
  require_matrix(a, "softmax_rows");
  return make(tvgnn::softmax(a.value(), 1), {a.node()}, [](Node& self) {
    Tensor& ga = pgrad(self, 0);
    const Tensor& y = self.value;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += self.grad(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += y(r, c) * (self.grad(r, c) - dot);
    }
  });
}

Var normalize_rows(const Var& a) {
  require_matrix(a, "normalize_rows");
  Tensor out = a.value();
  std::vector<double> sums(out.rows(), 0.0);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (double v : out.row_span(r)) sums[r] += v;
    if (sums[r] == 0.0) throw NumericError("normalize_rows: row sums to zero");
    for (auto& v : out.row_span(r)) v /= sums[r];
  }
  return make(std::move(out), {a.node()}, [sums](Node& self) {
    Tensor& ga = pgrad(self, 0);
    const Tensor& y = self.value;
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += self.grad(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) ga(r, c) += (self.grad(r, c) - dot) / sums[r];
    }
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
  require_matrix(x, "layer_norm_rows");
  const std::size_t R = x.rows(), C = x.cols();
  if (gain.value().size() != C || bias.value().size() != C) {
    throw DimensionError("layer_norm_rows: gain/bias width does not match " + shape_str(x.shape()));
  }
  Tensor xhat = Tensor::matrix(R, C);
  std::vector<double> inv_std(R);
  Tensor out = Tensor::matrix(R, C);
  for (std::size_t r = 0; r < R; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < C; ++c) mean += x.value()(r, c);
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double d = x.value()(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(C);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < C; ++c) {
      xhat(r, c) = (x.value()(r, c) - mean) * inv_std[r];
      out(r, c) = xhat(r, c) * gain.value()[c] + bias.value()[c];
    }
  }
  return make(std::move(out), {x.node(), gain.node(), bias.node()},
              [xhat = std::move(xhat), inv_std = std::move(inv_std), R, C](Node& self) {
                const Tensor& g = self.grad;
                const Tensor& gamma = pval(self, 1);
                if (wants(self, 1)) {
                  Tensor& gg = pgrad(self, 1);
                  for (std::size_t r = 0; r < R; ++r)
                    for (std::size_t c = 0; c < C; ++c) gg[c] += g(r, c) * xhat(r, c);
                }
                if (wants(self, 2)) {
                  Tensor& gb = pgrad(self, 2);
                  for (std::size_t r = 0; r < R; ++r)
                    for (std::size_t c = 0; c < C; ++c) gb[c] += g(r, c);
                }
                if (wants(self, 0)) {
                  Tensor& gx = pgrad(self, 0);
                  const double n = static_cast<double>(C);
                  for (std::size_t r = 0; r < R; ++r) {
                    double sum_d = 0.0, sum_dx = 0.0;
                    for (std::size_t c = 0; c < C; ++c) {
                      const double d = g(r, c) * gamma[c];
                      sum_d += d;
                      sum_dx += d * xhat(r, c);
                    }
                    for (std::size_t c = 0; c < C; ++c) {
                      const double d = g(r, c) * gamma[c];
                      gx(r, c) += inv_std[r] / n * (n * d - sum_d - xhat(r, c) * sum_dx);
                    }
                  }
                }
              });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t R = parts.front().rows();
  std::size_t C = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    require_matrix(p, "concat_cols");
    if (p.rows() != R) throw DimensionError("concat_cols: row counts differ");
    offsets.push_back(C);
    C += p.cols();
    parents.push_back(p.node());
  }
  Tensor out = Tensor::matrix(R, C);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < R; ++r)
      std::copy(v.row_span(r).begin(), v.row_span(r).end(), out.row_span(r).begin() + offsets[k]);
  }
  return make(std::move(out), std::move(parents), [offsets](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (!wants(self, k)) continue;
      Tensor& gp = pgrad(self, k);
      for (std::size_t r = 0; r < gp.rows(); ++r)
        for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += self.grad(r, offsets[k] + c);
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t C = parts.front().cols();
  std::size_t R = 0;
  std::vector<std::size_t> offsets;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    require_matrix(p, "concat_rows");
    if (p.cols() != C) throw DimensionError("concat_rows: column counts differ");
    offsets.push_back(R);
    R += p.rows();
    parents.push_back(p.node());
  }
  std::vector<double> data;
  data.reserve(R * C);
  for (const auto& p : parts) data.insert(data.end(), p.value().storage().begin(), p.value().storage().end());
  return make(Tensor({R, C}, std::move(data)), std::move(parents), [offsets, C](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (!wants(self, k)) continue;
      Tensor& gp = pgrad(self, k);
      const double* src = self.grad.data().data() + offsets[k] * C;
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
    }
  });
}

Var slice_cols(const Var& a, std::size_t start, std::size_t len) {
  require_matrix(a, "slice_cols");
  if (len == 0 || start + len > a.cols()) throw DimensionError("slice_cols: range out of bounds");
  const std::size_t R = a.rows();
  Tensor out = Tensor::matrix(R, len);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < len; ++c) out(r, c) = a.value()(r, start + c);
  return make(std::move(out), {a.node()}, [start, len, R](Node& self) {
    Tensor& ga = pgrad(self, 0);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < len; ++c) ga(r, start + c) += self.grad(r, c);
  });
}

Var slice_rows(const Var& a, std::size_t start, std::size_t len) {
  require_matrix(a, "slice_rows");
  if (len == 0 || start + len > a.rows()) throw DimensionError("slice_rows: range out of bounds");
  const std::size_t C = a.cols();
  const auto& src = a.value().storage();
  std::vector<double> data(src.begin() + static_cast<std::ptrdiff_t>(start * C),
                           src.begin() + static_cast<std::ptrdiff_t>((start + len) * C));
  return make(Tensor({len, C}, std::move(data)), {a.node()}, [start, C](Node& self) {
    Tensor& ga = pgrad(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[start * C + i] += self.grad[i];
  });
}

Var gather_rows(const Var& a, std::span<const std::size_t> idx) {
  require_matrix(a, "gather_rows");
  if (idx.empty()) throw DimensionError("gather_rows: empty index list");
  const std::size_t C = a.cols();
  Tensor out = Tensor::matrix(idx.size(), C);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= a.rows()) throw DimensionError("gather_rows: index out of range");
    std::copy(a.value().row_span(idx[k]).begin(), a.value().row_span(idx[k]).end(),
              out.row_span(k).begin());
  }
  std::vector<std::size_t> ids(idx.begin(), idx.end());
  return make(std::move(out), {a.node()}, [ids = std::move(ids), C](Node& self) {
    Tensor& ga = pgrad(self, 0);
    for (std::size_t k = 0; k < ids.size(); ++k)
      for (std::size_t c = 0; c < C; ++c) ga(ids[k], c) += self.grad(k, c);
  });
}

Var scatter_add_rows(const Var& a, std::span<const std::size_t> idx, std::size_t out_rows) {
  require_matrix(a, "scatter_add_rows");
  if (idx.size() != a.rows()) throw DimensionError("scatter_add_rows: index count != rows");
  const std::size_t C = a.cols();
  Tensor out = Tensor::matrix(out_rows, C);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= out_rows) throw DimensionError("scatter_add_rows: index out of range");
    for (std::size_t c = 0; c < C; ++c) out(idx[k], c) += a.value()(k, c);
  }
  std::vector<std::size_t> ids(idx.begin(), idx.end());
  return make(std::move(out), {a.node()}, [ids = std::move(ids), C](Node& self) {
    Tensor& ga = pgrad(self, 0);
    for (std::size_t k = 0; k < ids.size(); ++k)
      for (std::size_t c = 0; c < C; ++c) ga(k, c) += self.grad(ids[k], c);
  });
}

Var segment_softmax(const Var& scores, std::span<const std::size_t> seg, std::size_t num_segments) {
  if (scores.value().size() != seg.size()) {
    throw DimensionError("segment_softmax: score count != segment ids");
  }
  const Tensor& s = scores.value();
  std::vector<double> mx(num_segments, -std::numeric_limits<double>::infinity());
  for (std::size_t e = 0; e < seg.size(); ++e) {
    if (seg[e] >= num_segments) throw DimensionError("segment_softmax: segment id out of range");
    mx[seg[e]] = std::max(mx[seg[e]], s[e]);
  }
  Tensor out(scores.shape(), 0.0);
  std::vector<double> total(num_segments, 0.0);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    out[e] = std::exp(s[e] - mx[seg[e]]);
    total[seg[e]] += out[e];
  }
  for (std::size_t e = 0; e < seg.size(); ++e) out[e] /= total[seg[e]];
  std::vector<std::size_t> ids(seg.begin(), seg.end());
  return make(std::move(out), {scores.node()}, [ids = std::move(ids), num_segments](Node& self) {
    const Tensor& y = self.value;
    std::vector<double> dot(num_segments, 0.0);
    for (std::size_t e = 0; e < ids.size(); ++e) dot[ids[e]] += self.grad[e] * y[e];
    Tensor& gs = pgrad(self, 0);
    for (std::size_t e = 0; e < ids.size(); ++e) gs[e] += y[e] * (self.grad[e] - dot[ids[e]]);
  });
}

Var masked_mse(const Var& pred, const Tensor& target, std::span<const char> mask) {
  require_same_shape(pred.value(), target, "masked_mse");
  if (mask.size() != target.size()) throw DimensionError("masked_mse: mask size mismatch");
  const auto count = static_cast<double>(std::count_if(mask.begin(), mask.end(), [](char m) { return m != 0; }));
  if (count == 0) throw DataError("masked_mse: no labeled entries");
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!mask[i]) continue;
    const double d = pred.value()[i] - target[i];
    acc += d * d;
  }
  std::vector<char> m(mask.begin(), mask.end());
  return make(Tensor::scalar(acc / count), {pred.node()},
              [target, m = std::move(m), count](Node& self) {
                Tensor& gp = pgrad(self, 0);
                const Tensor& p = pval(self, 0);
                const double g = self.grad[0];
                for (std::size_t i = 0; i < p.size(); ++i)
                  if (m[i]) gp[i] += g * 2.0 * (p[i] - target[i]) / count;
              });
}

}  // namespace tvgnn::ag
