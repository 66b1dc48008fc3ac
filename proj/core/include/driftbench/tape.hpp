#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "driftbench/tensor.hpp"

namespace driftbench {

template <typename S>
class TapeT;

/// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
template <typename S>
struct VarT {
  TapeT<S>* tape = nullptr;
  std::int32_t index = -1;

  bool valid() const { return tape != nullptr && index >= 0; }
  const TensorT<S>& value() const;
  const TensorT<S>& grad() const;
};

using Var = VarT<float>;

/// Records primitive operations in creation order, which is by construction a
/// topological order: an operation's inputs always precede it. backward()
/// sweeps the list once in reverse.
template <typename S>
class TapeT {
 public:
  using Tensor = TensorT<S>;

  struct Node {
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    bool needs_grad = false;
    std::function<void(TapeT&)> backprop;  // empty for leaves and constants
  };

  /// Inserts an input tensor. Gradient-carrying leaves are the handles whose
  /// grads callers read back after backward().
  VarT<S> leaf(const Tensor& t, bool needs_grad = true) {
    return push_(Node{t, Tensor{}, needs_grad, nullptr});
  }

  /// Inserts a tensor that never receives gradient (data, masks, targets).
  VarT<S> constant(const Tensor& t) { return leaf(t, false); }

  std::size_t size() const { return nodes_.size(); }
  Node& node(std::int32_t i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Node& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }

  const Tensor& value(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)].value; }
  Tensor& grad(std::int32_t i) { return nodes_[static_cast<std::size_t>(i)].grad; }

  VarT<S> push(Tensor value, bool needs_grad, std::function<void(TapeT&)> backprop) {
    return push_(Node{std::move(value), Tensor{}, needs_grad,
                      needs_grad ? std::move(backprop) : nullptr});
  }

  /// Seeds d(loss)/d(loss) = 1 and runs the chain rule over the whole tape.
  /// Each node is visited exactly once. Throws if loss is not scalar.
  void backward(const VarT<S>& loss);

 private:
  VarT<S> push_(Node n) {
    nodes_.push_back(std::move(n));
    return VarT<S>{this, static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
};

using Tape = TapeT<float>;

template <typename S>
const TensorT<S>& VarT<S>::value() const {
  return tape->value(index);
}
template <typename S>
const TensorT<S>& VarT<S>::grad() const {
  return tape->node(index).grad;
}

// ---- primitive operations -------------------------------------------------
// Every op validates shapes up front and, when tracing is useful (any input
// carries gradient), records a closure that accumulates into its parents.

/// c[i][j] = sum_p a[i][p] * b[p][j]; inner products accumulate in double.
template <typename S>
VarT<S> matmul(VarT<S> a, VarT<S> b);

/// Elementwise sum of two same-shape tensors.
template <typename S>
VarT<S> add(VarT<S> a, VarT<S> b);

/// a[m x n] + bias[n] broadcast over rows.
template <typename S>
VarT<S> add_bias(VarT<S> a, VarT<S> bias);

/// Elementwise product.
template <typename S>
VarT<S> mul(VarT<S> a, VarT<S> b);

/// Elementwise product with a constant tensor (dropout masks, weightings).
template <typename S>
VarT<S> mul_const(VarT<S> a, const TensorT<S>& m);

/// Scalar multiple.
template <typename S>
VarT<S> scale(VarT<S> a, S k);

template <typename S>
VarT<S> sigmoid(VarT<S> a);

template <typename S>
VarT<S> tanh_act(VarT<S> a);

/// Columns [start, start+len) of a rank-2 tensor.
template <typename S>
VarT<S> slice_cols(VarT<S> a, std::size_t start, std::size_t len);

/// Sum of all elements, double accumulation; result is a scalar node.
template <typename S>
VarT<S> sum_all(VarT<S> a);

/// Mean weighted softmax cross-entropy over a batch of logits.
/// loss = (1/B) * sum_i w[y_i] * (-log softmax(logits_i)[y_i]), with
/// max-subtraction for stability. labels hold column indices in [0, C).
template <typename S>
VarT<S> weighted_softmax_xent(VarT<S> logits, const std::vector<int>& labels,
                              const TensorT<S>& class_weights);

/// Distillation loss: temperature-softened cross-entropy between a frozen
/// teacher's logit columns and the matching student columns, scaled by
/// temperature^2 and averaged over the batch.
template <typename S>
VarT<S> distill_xent(VarT<S> student_logits, const TensorT<S>& teacher_logits,
                     const std::vector<int>& columns, S temperature);

/// sum_p coeff[p] * (theta[p] - anchor[p])^2 as a scalar node. The quadratic
/// building block of the consolidation penalties.
template <typename S>
VarT<S> quad_penalty(VarT<S> theta, const TensorT<S>& anchor,
                     const TensorT<S>& coeff);

/// Row-wise softmax of a plain tensor (no tape involvement). Used by
/// evaluation paths and teachers.
template <typename S>
TensorT<S> softmax_rows(const TensorT<S>& logits);

extern template class TapeT<float>;
extern template class TapeT<double>;

#define DRIFTBENCH_DECLARE_OPS(S)                                                        \
  extern template VarT<S> matmul<S>(VarT<S>, VarT<S>);                                  \
  extern template VarT<S> add<S>(VarT<S>, VarT<S>);                                     \
  extern template VarT<S> add_bias<S>(VarT<S>, VarT<S>);                                \
  extern template VarT<S> mul<S>(VarT<S>, VarT<S>);                                     \
  extern template VarT<S> mul_const<S>(VarT<S>, const TensorT<S>&);                     \
  extern template VarT<S> scale<S>(VarT<S>, S);                                         \
  extern template VarT<S> sigmoid<S>(VarT<S>);                                          \
  extern template VarT<S> tanh_act<S>(VarT<S>);                                         \
  extern template VarT<S> slice_cols<S>(VarT<S>, std::size_t, std::size_t);             \
  extern template VarT<S> sum_all<S>(VarT<S>);                                          \
  extern template VarT<S> weighted_softmax_xent<S>(VarT<S>, const std::vector<int>&,    \
                                                   const TensorT<S>&);                  \
  extern template VarT<S> distill_xent<S>(VarT<S>, const TensorT<S>&,                   \
                                          const std::vector<int>&, S);                  \
  extern template VarT<S> quad_penalty<S>(VarT<S>, const TensorT<S>&,                   \
                                          const TensorT<S>&);                           \
  extern template TensorT<S> softmax_rows<S>(const TensorT<S>&);

DRIFTBENCH_DECLARE_OPS(float)
DRIFTBENCH_DECLARE_OPS(double)
#undef DRIFTBENCH_DECLARE_OPS

}  // namespace driftbench
