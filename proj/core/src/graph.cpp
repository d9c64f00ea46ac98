// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/graph.hpp"

#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "dsnn/errors.hpp"

namespace dsnn {

Tensor& Node::grad_ref() {
  if (grad.size() == 0) grad = Tensor::zeros(value.shape());
  return grad;
}

void Node::zero_grad() {
  if (grad.size() != 0) grad.fill(0.0);
}

namespace {

NodePtr make_node(Tensor value, const char* op, std::vector<NodePtr> parents,
                  std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  for (const auto& p : parents)
    if (p->requires_grad) n->requires_grad = true;
  n->parents = std::move(parents);
  if (n->requires_grad) n->backprop = std::move(backprop);
  return n;
}

void require_same_or_scalar(const NodePtr& a, const NodePtr& b,
                            const char* op) {
  if (!a->value.same_shape(b->value) && a->value.size() != 1 &&
      b->value.size() != 1)
    throw ShapeError(std::string(op) + ": shapes " + a->value.shape_str() +
                     " and " + b->value.shape_str() +
                     " are neither equal nor scalar");
}

// Adds src into dst, reducing to a scalar if dst has a single element.
void accumulate(Tensor& dst, const Tensor& src) {
  if (dst.size() == src.size()) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  } else if (dst.size() == 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) s += src[i];
    dst[0] += s;
  } else {
    throw ShapeError("gradient accumulate: size mismatch");
  }
}

double scalar_of(const Tensor& t) { return t[0]; }

}  // namespace

NodePtr constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "constant";
  return n;
}

NodePtr leaf(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = "leaf";
  n->requires_grad = true;
  n->is_leaf = true;
  return n;
}

NodePtr stop_gradient(const NodePtr& a) {
  auto n = std::make_shared<Node>();
  n->value = a->value;
  n->op = "stop_gradient";
  return n;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  require_same_or_scalar(a, b, "add");
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  Tensor out = av.size() >= bv.size() ? av : bv;
  if (av.size() == bv.size()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  } else if (av.size() == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[0] + bv[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[0];
  }
  return make_node(std::move(out), "add", {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad)
      accumulate(n.parents[0]->grad_ref(), n.grad);
    if (n.parents[1]->requires_grad)
      accumulate(n.parents[1]->grad_ref(), n.grad);
  });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  require_same_or_scalar(a, b, "sub");
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  Tensor out = av.size() >= bv.size() ? av : bv;
  if (av.size() == bv.size()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  } else if (av.size() == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[0] - bv[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[0];
  }
  return make_node(std::move(out), "sub", {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad)
      accumulate(n.parents[0]->grad_ref(), n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor neg = n.grad;
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
      accumulate(n.parents[1]->grad_ref(), neg);
    }
  });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  require_same_or_scalar(a, b, "mul");
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  Tensor out = av.size() >= bv.size() ? av : bv;
  if (av.size() == bv.size()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  } else if (av.size() == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[0] * bv[i];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[0];
  }
  return make_node(std::move(out), "mul", {a, b}, [](Node& n) {
    const Tensor& av = n.parents[0]->value;
    const Tensor& bv = n.parents[1]->value;
    if (n.parents[0]->requires_grad) {
      Tensor da = n.grad;
      if (bv.size() == 1) {
        for (std::size_t i = 0; i < da.size(); ++i) da[i] *= bv[0];
      } else {
        for (std::size_t i = 0; i < da.size(); ++i) da[i] *= bv[i];
      }
      accumulate(n.parents[0]->grad_ref(), da);
    }
    if (n.parents[1]->requires_grad) {
      Tensor db = n.grad;
      if (av.size() == 1) {
        for (std::size_t i = 0; i < db.size(); ++i) db[i] *= av[0];
      } else {
        for (std::size_t i = 0; i < db.size(); ++i) db[i] *= av[i];
      }
      accumulate(n.parents[1]->grad_ref(), db);
    }
  });
}

NodePtr scale(const NodePtr& a, double s) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return make_node(std::move(out), "scale", {a}, [s](Node& n) {
    Tensor da = n.grad;
    for (std::size_t i = 0; i < da.size(); ++i) da[i] *= s;
    accumulate(n.parents[0]->grad_ref(), da);
  });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  Tensor out = matmul_nn(a->value, b->value);
  return make_node(std::move(out), "matmul", {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad)
      accumulate(n.parents[0]->grad_ref(),
                 matmul_nt(n.grad, n.parents[1]->value));
    if (n.parents[1]->requires_grad)
      accumulate(n.parents[1]->grad_ref(),
                 matmul_tn(n.parents[0]->value, n.grad));
  });
}

NodePtr matmul_bt(const NodePtr& a, const NodePtr& b) {
  Tensor out = matmul_nt(a->value, b->value);
  return make_node(std::move(out), "matmul_bt", {a, b}, [](Node& n) {
    if (n.parents[0]->requires_grad)
      accumulate(n.parents[0]->grad_ref(),
                 matmul_nn(n.grad, n.parents[1]->value));
    if (n.parents[1]->requires_grad)
      accumulate(n.parents[1]->grad_ref(),
                 matmul_tn(n.grad, n.parents[0]->value));
  });
}

NodePtr sigmoid(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  return make_node(std::move(out), "sigmoid", {a}, [](Node& n) {
    Tensor da = n.grad;
    for (std::size_t i = 0; i < da.size(); ++i) {
      double y = n.value[i];
      da[i] *= y * (1.0 - y);
    }
    accumulate(n.parents[0]->grad_ref(), da);
  });
}

NodePtr tanh(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return make_node(std::move(out), "tanh", {a}, [](Node& n) {
    Tensor da = n.grad;
    for (std::size_t i = 0; i < da.size(); ++i) {
      double y = n.value[i];
      da[i] *= 1.0 - y * y;
    }
    accumulate(n.parents[0]->grad_ref(), da);
  });
}

NodePtr relu(const NodePtr& a) {
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] < 0.0) out[i] = 0.0;
  return make_node(std::move(out), "relu", {a}, [](Node& n) {
    Tensor da = n.grad;
    const Tensor& x = n.parents[0]->value;
    for (std::size_t i = 0; i < da.size(); ++i)
      if (x[i] <= 0.0) da[i] = 0.0;
    accumulate(n.parents[0]->grad_ref(), da);
  });
}

NodePtr add_bias(const NodePtr& x, const NodePtr& b) {
  const Tensor& xv = x->value;
  const Tensor& bv = b->value;
  if (bv.ndim() != 1 || bv.size() != xv.cols())
    throw ShapeError("add_bias: bias " + bv.shape_str() +
                     " does not match input " + xv.shape_str());
  Tensor out = xv;
  std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  return make_node(std::move(out), "add_bias", {x, b}, [](Node& n) {
    std::size_t rows = n.value.rows(), cols = n.value.cols();
    if (n.parents[0]->requires_grad)
      accumulate(n.parents[0]->grad_ref(), n.grad);
    if (n.parents[1]->requires_grad) {
      Tensor& db = n.parents[1]->grad_ref();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) db[c] += n.grad[r * cols + c];
    }
  });
}

NodePtr concat_cols(const NodePtr& a, const NodePtr& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  if (av.rows() != bv.rows())
    throw ShapeError("concat_cols: row mismatch " + av.shape_str() + " ++ " +
                     bv.shape_str());
  std::size_t rows = av.rows(), p = av.cols(), q = bv.cols();
  Tensor out({rows, p + q});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < p; ++c) out[r * (p + q) + c] = av[r * p + c];
    for (std::size_t c = 0; c < q; ++c)
      out[r * (p + q) + p + c] = bv[r * q + c];
  }
  return make_node(std::move(out), "concat_cols", {a, b}, [p, q](Node& n) {
    std::size_t rows = n.value.rows();
    if (n.parents[0]->requires_grad) {
      Tensor& da = n.parents[0]->grad_ref();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < p; ++c)
          da[r * p + c] += n.grad[r * (p + q) + c];
    }
    if (n.parents[1]->requires_grad) {
      Tensor& db = n.parents[1]->grad_ref();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < q; ++c)
          db[r * q + c] += n.grad[r * (p + q) + p + c];
    }
  });
}

NodePtr slice_cols(const NodePtr& a, std::size_t c0, std::size_t c1) {
  const Tensor& av = a->value;
  if (c0 >= c1 || c1 > av.cols())
    throw ShapeError("slice_cols: range [" + std::to_string(c0) + ", " +
                     std::to_string(c1) + ") invalid for " + av.shape_str());
  std::size_t rows = av.rows(), n_cols = av.cols(), w = c1 - c0;
  Tensor out({rows, w});
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c)
      out[r * w + c] = av[r * n_cols + c0 + c];
  return make_node(std::move(out), "slice_cols", {a}, [c0, w](Node& n) {
    std::size_t rows = n.value.rows();
    std::size_t n_cols = n.parents[0]->value.cols();
    Tensor& da = n.parents[0]->grad_ref();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c)
        da[r * n_cols + c0 + c] += n.grad[r * w + c];
  });
}

NodePtr sum(const NodePtr& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a->value.size(); ++i) s += a->value[i];
  return make_node(Tensor::scalar(s), "sum", {a}, [](Node& n) {
    double g = scalar_of(n.grad);
    Tensor& da = n.parents[0]->grad_ref();
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
  });
}

NodePtr mean(const NodePtr& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a->value.size()));
}

NodePtr mask_mul(const NodePtr& a, Tensor mask) {
  if (!a->value.same_shape(mask))
    throw ShapeError("mask_mul: mask " + mask.shape_str() +
                     " does not match input " + a->value.shape_str());
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return make_node(std::move(out), "mask_mul", {a},
                   [m = std::move(mask)](Node& n) {
                     Tensor da = n.grad;
                     for (std::size_t i = 0; i < da.size(); ++i) da[i] *= m[i];
                     accumulate(n.parents[0]->grad_ref(), da);
                   });
}

NodePtr softmax_cross_entropy(const NodePtr& logits, const Tensor& targets) {
  const Tensor& lv = logits->value;
  if (lv.ndim() != 2 || !lv.same_shape(targets))
    throw ShapeError("softmax_cross_entropy: logits " + lv.shape_str() +
                     " vs targets " + targets.shape_str());
  std::size_t n = lv.rows(), c = lv.cols();
  if (c < 2)
    throw ValueError("softmax_cross_entropy: need at least two classes");
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += targets[r * c + j];
    if (std::abs(s - 1.0) > 1e-9)
      throw ValueError("softmax_cross_entropy: target row " +
                       std::to_string(r) + " sums to " + std::to_string(s));
  }
  Tensor probs = softmax_rows(lv);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double m = lv[r * c];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, lv[r * c + j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(lv[r * c + j] - m);
    lse = std::log(lse);
    for (std::size_t j = 0; j < c; ++j)
      total += targets[r * c + j] * (lse - (lv[r * c + j] - m));
  }
  total /= static_cast<double>(n);
  return make_node(
      Tensor::scalar(total), "softmax_cross_entropy", {logits},
      [probs = std::move(probs), targets, n](Node& nd) {
        double g = scalar_of(nd.grad) / static_cast<double>(n);
        Tensor& dl = nd.parents[0]->grad_ref();
        for (std::size_t i = 0; i < dl.size(); ++i)
          dl[i] += g * (probs[i] - targets[i]);
      });
}

void backward(const NodePtr& loss) {
  if (!loss) throw ValueError("backward: null loss");
  if (loss->value.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " +
                     loss->value.shape_str());
  if (!loss->requires_grad)
    throw ValueError("backward: loss does not depend on any trainable leaf");

  // Iterative post-order DFS over the requires_grad subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& top = stack.back();
    Node* node = top.first;
    if (top.second < node->parents.size()) {
      Node* parent = node->parents[top.second++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are scratch for this pass; leaves accumulate.
  for (Node* node : order)
    if (!node->is_leaf) node->grad_ref().fill(0.0);
  loss->grad_ref()[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop) node->backprop(*node);
  }
}

Tensor softmax_rows(const Tensor& logits) {
  std::size_t n = logits.rows(), c = logits.cols();
  Tensor out = logits;
  for (std::size_t r = 0; r < n; ++r) {
    double m = out[r * c];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, out[r * c + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      out[r * c + j] = std::exp(out[r * c + j] - m);
      z += out[r * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] /= z;
  }
  return out;
}

std::size_t argmax_row(const Tensor& t, std::size_t row) {
  std::size_t c = t.cols();
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j)
    if (t[row * c + j] > t[row * c + best]) best = j;
  return best;
}

}  // namespace dsnn
