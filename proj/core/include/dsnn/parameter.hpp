// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "dsnn/graph.hpp"

namespace dsnn {

// A named trainable tensor. The node is a graph leaf that persists across
// steps: its value is updated in place by the optimizer and its gradient
// buffer accumulates across backward passes until cleared. `ema_shadow`
// tracks an exponential moving average of the value and is what evaluation
// reads. Only prunable parameters ever receive sparsity masks.
struct Parameter {
  std::string name;
  NodePtr node;
  Tensor ema_shadow;
  bool prunable = false;
};

inline void zero_grads(std::vector<Parameter>& params) {
  for (auto& p : params) p.node->zero_grad();
}

/// Swaps live values with EMA shadows (self-inverse; evaluation wraps itself
/// in a pair of calls so training state is restored bit for bit).
inline void swap_ema(std::vector<Parameter>& params) {
  for (auto& p : params) std::swap(p.node->value, p.ema_shadow);
}

inline void ema_update(std::vector<Parameter>& params, double decay) {
  for (auto& p : params) {
    const Tensor& val = p.node->value;
    for (std::size_t i = 0; i < val.size(); ++i)
      p.ema_shadow[i] = decay * p.ema_shadow[i] + (1.0 - decay) * val[i];
  }
}

}  // namespace dsnn
