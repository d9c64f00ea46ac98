// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsnn/graph.hpp"
#include "dsnn/mask.hpp"
#include "dsnn/parameter.hpp"
#include "dsnn/tensor.hpp"

namespace dsnn {

// A named sparsity configuration: ordered (pattern, level) pairs mapping
// weight names to target sparsities in [0, 1). A pattern is either an exact
// name or a prefix ending in '*'. Every 2-D weight must match exactly one
// pattern; patterns that match nothing are allowed (a plan can cover several
// model families).
struct SparsityConfig {
  std::string name;
  std::vector<std::pair<std::string, double>> levels;

  double level_for(const std::string& weight_name) const;
  /// Mean target over the config's levels; used only to order configs.
  double mean_level() const;
};

/// True iff `pattern` (exact string, or prefix + '*') matches `name`.
bool pattern_matches(const std::string& pattern, const std::string& name);

// Ordered list [C0, C1, ..., CL]. C0 must be all-zero (the full network);
// training iterates the rest in ascending mean sparsity.
struct SparsityPlan {
  std::vector<SparsityConfig> configs;

  /// Structural checks: non-empty, C0 all-zero, levels in [0,1),
  /// non-decreasing mean level.
  void validate() const;
  /// Additionally checks the exactly-one-pattern rule against every 2-D
  /// parameter of a concrete model.
  void validate_against(const std::vector<Parameter>& params) const;
  const SparsityConfig& config(const std::string& name) const;
  bool has_config(const std::string& name) const;
};

struct PruneSchedule {
  std::size_t ramp_steps = 2000;    // cubic ramp length, must be >= 1
  std::size_t refresh_every = 100;  // F: mask refresh period in steps
  std::size_t block_height = 4;     // R
};

/// Cubic ramp s(t) = target * (1 - (1 - min(t, T)/T)^3).
double cubic_sparsity(std::size_t t, std::size_t ramp_steps, double target);

/// Number of blocks pruned at sparsity S over B blocks: floor(S*B), with an
/// epsilon guard so exact products like 0.7*10 do not round down twice.
std::size_t prune_count(double sparsity, std::size_t block_count);

/// Per-block saliency, block b = sum over its entries of |w * g|. Blocks are
/// `block_height` consecutive rows within one column; a final partial block
/// is scored over its actual entries. Output shape [ceil(m/R) x n].
Tensor block_scores(const Tensor& weight, const Tensor& grad,
                    std::size_t block_height);

/// Mask from a precomputed score table: prunes exactly
/// prune_count(S, blocks) lowest-scoring blocks, ties broken by lower flat
/// block index (block_row * cols + col) pruned first.
BinaryMask mask_from_scores(const Tensor& scores, double sparsity,
                            std::size_t rows, std::size_t cols,
                            std::size_t block_height);

/// block_scores + mask_from_scores in one call.
BinaryMask get_mask(const Tensor& weight, const Tensor& grad, double sparsity,
                    std::size_t block_height);

/// Masked view of a weight in the graph: forward w∘M, backward flows only
/// through kept entries.
NodePtr apply_mask(const NodePtr& weight, const BinaryMask& mask);

/// Masked copy of a plain tensor.
Tensor apply_mask(const Tensor& weight, const BinaryMask& mask);

/// Kept extent of one dimension under the structured (slimmable-style)
/// rule: round(n * (1 - S)^(1/ndims)), half away from zero.
std::size_t snn_keep_dim(std::size_t n, double sparsity, std::size_t ndims);

/// Structured mask keeping the top-left rectangle [T_r x T_c] with
/// T_d = snn_keep_dim(N_d, S, 2). Depends only on shape and S.
BinaryMask snn_structured_mask(std::size_t rows, std::size_t cols,
                               double sparsity);

}  // namespace dsnn
