// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/optim.hpp"

#include <cmath>

#include "dsnn/errors.hpp"

namespace dsnn {

void adam_step(std::vector<Parameter>& params, AdamState& state) {
  state.step += 1;
  double lr = state.hp.lr;
  if (state.hp.warmup_steps > 0 && state.step <= state.hp.warmup_steps)
    lr *= static_cast<double>(state.step) /
          static_cast<double>(state.hp.warmup_steps);
  double bc1 = 1.0 - std::pow(state.hp.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.hp.beta2, static_cast<double>(state.step));

  for (auto& p : params) {
    if (p.node->grad.size() == 0) continue;  // never touched this round
    const Tensor& g = p.node->grad;
    Tensor& val = p.node->value;
    if (g.size() != val.size())
      throw ShapeError("adam_step: gradient shape mismatch for " + p.name);
    Tensor& m = state.m[p.name];
    Tensor& v = state.v[p.name];
    if (m.size() == 0) m = Tensor::zeros(val.shape());
    if (v.size() == 0) v = Tensor::zeros(val.shape());
    for (std::size_t i = 0; i < val.size(); ++i) {
      m[i] = state.hp.beta1 * m[i] + (1.0 - state.hp.beta1) * g[i];
      v[i] = state.hp.beta2 * v[i] + (1.0 - state.hp.beta2) * g[i] * g[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      val[i] -= lr * m_hat / (std::sqrt(v_hat) + state.hp.eps);
    }
  }
}

}  // namespace dsnn
