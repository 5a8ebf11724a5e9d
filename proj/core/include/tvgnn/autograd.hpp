#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tvgnn/tensor.hpp"

/// Reverse-mode automatic differentiation over a fixed operation set.
///
/// Each op returns a `Var` holding its value and a closure that pushes the
/// output gradient back into its parents. Leaves created by `ParamStore` are
/// long-lived and accumulate gradients across calls to `backward` until they
/// are zeroed; every other node lives only as long as the expression that
/// references it.
namespace tvgnn::ag {

struct Node {
  Tensor value;
  Tensor grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer() {
    if (grad.empty()) grad = Tensor(value.shape(), 0.0);
    return grad;
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }

  /// Scalar value of a 1x1 result.
  double item() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

Var constant(Tensor value);
Var leaf(Tensor value);

/// Seeds d(root)/d(root) = 1 and propagates to every reachable node that
/// requires gradients.
void backward(const Var& root);

// Linear algebra
Var matmul(const Var& a, const Var& b);
/// a * b^T; the form every `x W^T` projection uses.
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

// Elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// a (m x n) + bias (1 x n) broadcast over rows.
Var add_row(const Var& a, const Var& bias);
Var scale(const Var& a, double s);
/// alpha * a + beta
Var affine(const Var& a, double alpha, double beta);
/// a * s with s a 1x1 Var broadcast over every entry.
Var mul_scalar(const Var& a, const Var& s);
/// Row i of a (m x n) scaled by s(i, 0) where s is (m x 1).
Var mul_rows(const Var& a, const Var& s);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);

// Reductions and normalizations
Var sum_all(const Var& a);
/// (m x n) -> (m x 1)
Var row_sum(const Var& a);
Var softmax_rows(const Var& a);
/// Divides each row by its sum without exponentiation.
Var normalize_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

// Structure
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& a, std::size_t start, std::size_t len);
Var slice_rows(const Var& a, std::size_t start, std::size_t len);
/// out row k = a row idx[k].
Var gather_rows(const Var& a, std::span<const std::size_t> idx);
/// out row idx[k] += a row k; out has `out_rows` rows.
Var scatter_add_rows(const Var& a, std::span<const std::size_t> idx, std::size_t out_rows);
/// Softmax of an (E x 1) score column within groups given by seg[e] < num_segments.
Var segment_softmax(const Var& scores, std::span<const std::size_t> seg,
                    std::size_t num_segments);

/// Mean of squared differences over entries with mask != 0.
Var masked_mse(const Var& pred, const Tensor& target, std::span<const char> mask);

}  // namespace tvgnn::ag
