// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/model.hpp"

#include <cmath>

#include "dsnn/errors.hpp"
#include "dsnn/rng.hpp"

namespace dsnn {

namespace {

Tensor init_weight(RngStream& rng, std::size_t out_dim, std::size_t in_dim) {
  Tensor w({out_dim, in_dim});
  double s = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * rng.normal();
  return w;
}

std::size_t token_at(const Batch& batch, std::size_t row, std::size_t t,
                     std::size_t vocab) {
  double v = batch.x[row * batch.x.cols() + t];
  double ip;
  if (std::modf(v, &ip) != 0.0 || v < 0.0 ||
      v >= static_cast<double>(vocab))
    throw ValueError("token id " + std::to_string(v) +
                     " outside vocabulary of " + std::to_string(vocab));
  return static_cast<std::size_t>(v);
}

// y = W x (+ bias) through either engine, used by the graph-free path.
void linear_vec(const Parameter& w, const BsrSet* sparse, const double* x,
                double* y) {
  if (sparse) {
    auto it = sparse->find(w.name);
    if (it != sparse->end()) {
      it->second.matvec(x, y);
      return;
    }
  }
  dense_matvec(w.node->value, x, y);
}

double sigmoid_s(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Parameter& Model::param(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return p;
  throw ValueError("unknown parameter '" + name + "'");
}

const Parameter& Model::param(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return p;
  throw ValueError("unknown parameter '" + name + "'");
}

Parameter& Model::register_param(const std::string& name, Tensor init,
                                 bool prunable) {
  for (const auto& p : params_)
    if (p.name == name)
      throw ValueError("duplicate parameter name '" + name + "'");
  Parameter p;
  p.name = name;
  p.ema_shadow = init;
  p.node = leaf(std::move(init));
  p.prunable = prunable;
  params_.push_back(std::move(p));
  return params_.back();
}

NodePtr Model::weight_node(const Parameter& p, const MaskSet* masks,
                           const MaskSet* freeze) const {
  NodePtr w = p.node;
  if (freeze) {
    auto it = freeze->find(p.name);
    if (it == freeze->end()) {
      // Kept by every sub-network, so entirely frozen.
      w = stop_gradient(w);
    } else {
      const BinaryMask& u = it->second;
      w = add(stop_gradient(apply_mask(w, u)),
              apply_mask(w, mask_complement(u)));
    }
  }
  if (masks) {
    auto it = masks->find(p.name);
    if (it != masks->end()) w = apply_mask(w, it->second);
  }
  return w;
}

MlpModel::MlpModel(std::uint64_t seed, std::size_t input_dim,
                   std::size_t hidden, std::size_t classes)
    : Model("mlp", classes), input_dim_(input_dim), hidden_(hidden) {
  if (classes < 2) throw ValueError("MlpModel: classes < 2");
  RngStream rng(derive_seed(seed, "model-init"));
  register_param("fc0.w", init_weight(rng, hidden, input_dim), true);
  register_param("fc0.b", Tensor({hidden}), false);
  register_param("fc1.w", init_weight(rng, hidden, hidden), true);
  register_param("fc1.b", Tensor({hidden}), false);
  register_param("fc2.w", init_weight(rng, classes, hidden), true);
  register_param("fc2.b", Tensor({classes}), false);
}

NodePtr MlpModel::forward(const Batch& batch, const MaskSet* masks,
                          const MaskSet* freeze) {
  if (batch.x.cols() != input_dim_)
    throw ShapeError("MlpModel: batch features " + batch.x.shape_str());
  NodePtr x = constant(batch.x);
  NodePtr h0 = relu(add_bias(matmul_bt(x, weight_node(param("fc0.w"), masks, freeze)),
                             weight_node(param("fc0.b"), masks, freeze)));
  NodePtr h1 = relu(add_bias(matmul_bt(h0, weight_node(param("fc1.w"), masks, freeze)),
                             weight_node(param("fc1.b"), masks, freeze)));
  return add_bias(matmul_bt(h1, weight_node(param("fc2.w"), masks, freeze)),
                  weight_node(param("fc2.b"), masks, freeze));
}

Tensor MlpModel::forward_inference(const Batch& batch,
                                   const BsrSet* sparse) const {
  std::size_t n = batch.x.rows();
  const Parameter& w0 = param("fc0.w");
  const Parameter& b0 = param("fc0.b");
  const Parameter& w1 = param("fc1.w");
  const Parameter& b1 = param("fc1.b");
  const Parameter& w2 = param("fc2.w");
  const Parameter& b2 = param("fc2.b");
  Tensor logits({n, classes_});
  std::vector<double> h0(hidden_), h1(hidden_), out(classes_);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = batch.x.data() + i * input_dim_;
    linear_vec(w0, sparse, x, h0.data());
    for (std::size_t j = 0; j < hidden_; ++j)
      h0[j] = std::max(0.0, h0[j] + b0.node->value[j]);
    linear_vec(w1, sparse, h0.data(), h1.data());
    for (std::size_t j = 0; j < hidden_; ++j)
      h1[j] = std::max(0.0, h1[j] + b1.node->value[j]);
    linear_vec(w2, sparse, h1.data(), out.data());
    for (std::size_t j = 0; j < classes_; ++j)
      logits[i * classes_ + j] = out[j] + b2.node->value[j];
  }
  return logits;
}

LstmModel::LstmModel(std::uint64_t seed, std::size_t vocab, std::size_t hidden,
                     std::size_t projection, std::size_t classes,
                     std::size_t min_prunable_elems)
    : Model("lstm", classes),
      vocab_(vocab),
      hidden_(hidden),
      projection_(projection) {
  if (classes < 2) throw ValueError("LstmModel: classes < 2");
  if (vocab < 2) throw ValueError("LstmModel: vocab < 2");
  RngStream rng(derive_seed(seed, "model-init"));
  register_param("lstm0.w", init_weight(rng, 4 * hidden, vocab + hidden),
                 true);
  Tensor gate_bias({4 * hidden});
  for (std::size_t i = hidden; i < 2 * hidden; ++i) gate_bias[i] = 1.0;
  register_param("lstm0.b", std::move(gate_bias), false);
  register_param("lstm0.proj.w", init_weight(rng, projection, hidden),
                 projection * hidden >= min_prunable_elems);
  register_param("out.w", init_weight(rng, classes, projection), true);
  register_param("out.b", Tensor({classes}), false);
}

NodePtr LstmModel::forward(const Batch& batch, const MaskSet* masks,
                           const MaskSet* freeze) {
  std::size_t n = batch.x.rows(), seq_len = batch.x.cols();
  NodePtr wg = weight_node(param("lstm0.w"), masks, freeze);
  NodePtr bg = weight_node(param("lstm0.b"), masks, freeze);
  NodePtr wp = weight_node(param("lstm0.proj.w"), masks, freeze);
  NodePtr wo = weight_node(param("out.w"), masks, freeze);
  NodePtr bo = weight_node(param("out.b"), masks, freeze);

  NodePtr h = constant(Tensor({n, hidden_}));
  NodePtr c = constant(Tensor({n, hidden_}));
  for (std::size_t t = 0; t < seq_len; ++t) {
    Tensor xt({n, vocab_});
    for (std::size_t i = 0; i < n; ++i)
      xt[i * vocab_ + token_at(batch, i, t, vocab_)] = 1.0;
    NodePtr cat = concat_cols(constant(std::move(xt)), h);
    NodePtr gates = add_bias(matmul_bt(cat, wg), bg);
    NodePtr gi = sigmoid(slice_cols(gates, 0, hidden_));
    NodePtr gf = sigmoid(slice_cols(gates, hidden_, 2 * hidden_));
    NodePtr gg = tanh(slice_cols(gates, 2 * hidden_, 3 * hidden_));
    NodePtr go = sigmoid(slice_cols(gates, 3 * hidden_, 4 * hidden_));
    c = add(mul(gf, c), mul(gi, gg));
    h = mul(go, tanh(c));
  }
  NodePtr p = matmul_bt(h, wp);
  return add_bias(matmul_bt(p, wo), bo);
}

Tensor LstmModel::forward_inference(const Batch& batch,
                                    const BsrSet* sparse) const {
  std::size_t n = batch.x.rows(), seq_len = batch.x.cols();
  const Parameter& wg = param("lstm0.w");
  const Tensor& bg = param("lstm0.b").node->value;
  const Parameter& wp = param("lstm0.proj.w");
  const Parameter& wo = param("out.w");
  const Tensor& bo = param("out.b").node->value;
  Tensor logits({n, classes_});
  std::vector<double> h(hidden_), c(hidden_), xcat(vocab_ + hidden_),
      gates(4 * hidden_), proj(projection_), out(classes_);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(h.begin(), h.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t t = 0; t < seq_len; ++t) {
      std::fill(xcat.begin(), xcat.begin() + vocab_, 0.0);
      xcat[token_at(batch, i, t, vocab_)] = 1.0;
      std::copy(h.begin(), h.end(), xcat.begin() + vocab_);
      linear_vec(wg, sparse, xcat.data(), gates.data());
      for (std::size_t j = 0; j < hidden_; ++j) {
        double gi = sigmoid_s(gates[j] + bg[j]);
        double gf = sigmoid_s(gates[hidden_ + j] + bg[hidden_ + j]);
        double gg = std::tanh(gates[2 * hidden_ + j] + bg[2 * hidden_ + j]);
        double go = sigmoid_s(gates[3 * hidden_ + j] + bg[3 * hidden_ + j]);
        c[j] = gf * c[j] + gi * gg;
        h[j] = go * std::tanh(c[j]);
      }
    }
    linear_vec(wp, sparse, h.data(), proj.data());
    linear_vec(wo, sparse, proj.data(), out.data());
    for (std::size_t j = 0; j < classes_; ++j)
      logits[i * classes_ + j] = out[j] + bo[j];
  }
  return logits;
}

SparsityPlan build_toy_plan() {
  SparsityPlan plan;
  plan.configs.push_back(
      {"Large", {{"lstm*", 0.0}, {"fc*", 0.0}, {"out*", 0.0}}});
  plan.configs.push_back(
      {"Medium", {{"lstm*", 0.70}, {"fc*", 0.0}, {"out*", 0.0}}});
  plan.configs.push_back(
      {"Small", {{"lstm*", 0.90}, {"fc*", 0.50}, {"out*", 0.50}}});
  plan.validate();
  return plan;
}

MaskSet snn_masks(const std::vector<Parameter>& params,
                  const SparsityConfig& config) {
  MaskSet masks;
  for (const auto& p : params) {
    if (!p.prunable) continue;
    double s = config.level_for(p.name);
    masks.emplace(p.name, snn_structured_mask(p.node->value.rows(),
                                              p.node->value.cols(), s));
  }
  return masks;
}

BsrSet build_bsr_set(const std::vector<Parameter>& params,
                     const MaskSet& masks) {
  BsrSet out;
  for (const auto& p : params) {
    auto it = masks.find(p.name);
    if (it == masks.end()) continue;
    out.emplace(p.name,
                BlockCsrMatrix::from_masked_dense(p.node->value, it->second));
  }
  return out;
}

}  // namespace dsnn
