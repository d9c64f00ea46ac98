// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "dsnn/parameter.hpp"
#include "dsnn/tensor.hpp"

namespace dsnn {

struct OptimizerConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t warmup_steps = 0;  // linear LR ramp over this many steps
};

// Adam moments, keyed by parameter name so state survives checkpointing and
// is independent of parameter registration order. Starting from a fresh
// state guarantees that a parameter entry whose gradient is exactly zero is
// left exactly unchanged (m and v stay zero), which the freezing phase
// relies on.
struct AdamState {
  OptimizerConfig hp;
  std::size_t step = 0;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;

  AdamState() = default;
  explicit AdamState(const OptimizerConfig& cfg) : hp(cfg) {}
};

/// One Adam update with bias correction, reading each parameter's
/// accumulated gradient. Parameters whose gradient buffer was never touched
/// this step are skipped entirely. Gradients are not cleared here.
void adam_step(std::vector<Parameter>& params, AdamState& state);

}  // namespace dsnn
