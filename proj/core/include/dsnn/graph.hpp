// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dsnn/tensor.hpp"

namespace dsnn {

class Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of a dynamically built computation graph. The graph is rebuilt
// for every training step; backward() walks it once in reverse topological
// order. Gradients of interior nodes are scratch space for a single backward
// pass, while leaf gradients accumulate across passes until explicitly
// cleared — summing losses from several forward passes into one optimizer
// update is done by simply calling backward() several times.
class Node {
 public:
  Tensor value;
  Tensor grad;  // empty until first touched; same shape as value afterwards
  bool requires_grad = false;
  bool is_leaf = false;
  const char* op = "";
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backprop;

  /// Gradient buffer, allocated (zero-filled) on first access.
  Tensor& grad_ref();

  void zero_grad();
};

/// Fixed tensor that never receives a gradient.
NodePtr constant(Tensor value);

/// Trainable tensor; gradients accumulate into it across backward passes.
NodePtr leaf(Tensor value);

/// Copy of `a`'s value with the graph edge severed (no gradient flows back).
NodePtr stop_gradient(const NodePtr& a);

// Elementwise ops accept equal shapes, or a scalar (single-element) operand
// on either side.
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double s);

/// C = A * B with shapes [m x k] * [k x n].
NodePtr matmul(const NodePtr& a, const NodePtr& b);
/// C = A * B^T with shapes [m x k] * [n x k]; the natural batch-times-weight
/// product when weights are stored [out x in].
NodePtr matmul_bt(const NodePtr& a, const NodePtr& b);

NodePtr sigmoid(const NodePtr& a);
NodePtr tanh(const NodePtr& a);
NodePtr relu(const NodePtr& a);

/// y[r, c] = x[r, c] + b[c] for a rank-1 bias of length cols(x).
NodePtr add_bias(const NodePtr& x, const NodePtr& b);

/// [m x p] ++ [m x q] -> [m x (p+q)].
NodePtr concat_cols(const NodePtr& a, const NodePtr& b);
/// Columns [c0, c1) of a [m x n] input.
NodePtr slice_cols(const NodePtr& a, std::size_t c0, std::size_t c1);

/// Sum of all elements, as a scalar node.
NodePtr sum(const NodePtr& a);
/// Mean of all elements, as a scalar node.
NodePtr mean(const NodePtr& a);

/// Elementwise product with a fixed 0/1 (or arbitrary) tensor.
NodePtr mask_mul(const NodePtr& a, Tensor mask);

/// Mean over rows of the cross-entropy between softmax(logits) and the given
/// target distributions. Each target row must sum to 1 (within 1e-9) and
/// there must be at least two classes. Log-softmax is computed with a
/// per-row max shift for stability.
NodePtr softmax_cross_entropy(const NodePtr& logits, const Tensor& targets);

/// Reverse-mode sweep from a scalar loss. Interior gradients are zeroed and
/// recomputed; leaf gradients accumulate.
void backward(const NodePtr& loss);

/// Row-wise softmax with max shift (plain tensor op, used for teacher
/// targets and evaluation).
Tensor softmax_rows(const Tensor& logits);

/// Index of the largest element in one row (first index wins ties).
std::size_t argmax_row(const Tensor& t, std::size_t row);

}  // namespace dsnn
