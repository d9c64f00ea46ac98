// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsnn/errors.hpp"

namespace dsnn {

bool pattern_matches(const std::string& pattern, const std::string& name) {
  if (!pattern.empty() && pattern.back() == '*') {
    std::string_view prefix(pattern.data(), pattern.size() - 1);
    return name.size() >= prefix.size() &&
           name.compare(0, prefix.size(), prefix) == 0;
  }
  return pattern == name;
}

double SparsityConfig::level_for(const std::string& weight_name) const {
  const std::pair<std::string, double>* found = nullptr;
  for (const auto& lv : levels) {
    if (!pattern_matches(lv.first, weight_name)) continue;
    if (found)
      throw ConfigError("config '" + name + "': weight '" + weight_name +
                        "' matches both '" + found->first + "' and '" +
                        lv.first + "'");
    found = &lv;
  }
  if (!found)
    throw ConfigError("config '" + name + "': no sparsity level for weight '" +
                      weight_name + "'");
  return found->second;
}

double SparsityConfig::mean_level() const {
  if (levels.empty()) return 0.0;
  double s = 0.0;
  for (const auto& lv : levels) s += lv.second;
  return s / static_cast<double>(levels.size());
}

void SparsityPlan::validate() const {
  if (configs.empty()) throw ConfigError("sparsity plan has no configs");
  for (const auto& cfg : configs) {
    if (cfg.name.empty()) throw ConfigError("sparsity config with empty name");
    for (const auto& lv : cfg.levels)
      if (lv.second < 0.0 || lv.second >= 1.0)
        throw ConfigError("config '" + cfg.name + "': sparsity " +
                          std::to_string(lv.second) + " outside [0, 1)");
  }
  for (const auto& lv : configs[0].levels)
    if (lv.second != 0.0)
      throw ConfigError("first config '" + configs[0].name +
                        "' must be fully dense");
  for (std::size_t i = 1; i + 1 < configs.size(); ++i)
    if (configs[i].mean_level() > configs[i + 1].mean_level())
      throw ConfigError("configs not in ascending mean sparsity: '" +
                        configs[i].name + "' > '" + configs[i + 1].name + "'");
  for (std::size_t i = 0; i < configs.size(); ++i)
    for (std::size_t j = i + 1; j < configs.size(); ++j)
      if (configs[i].name == configs[j].name)
        throw ConfigError("duplicate config name '" + configs[i].name + "'");
}

void SparsityPlan::validate_against(
    const std::vector<Parameter>& params) const {
  validate();
  for (const auto& cfg : configs)
    for (const auto& p : params)
      if (p.node->value.ndim() == 2) cfg.level_for(p.name);  // throws on 0/2+
}

const SparsityConfig& SparsityPlan::config(const std::string& name) const {
  for (const auto& cfg : configs)
    if (cfg.name == name) return cfg;
  std::string available;
  for (const auto& cfg : configs) {
    if (!available.empty()) available += ", ";
    available += cfg.name;
  }
  throw ConfigError("unknown config '" + name + "'; available: " + available);
}

bool SparsityPlan::has_config(const std::string& name) const {
  for (const auto& cfg : configs)
    if (cfg.name == name) return true;
  return false;
}

double cubic_sparsity(std::size_t t, std::size_t ramp_steps, double target) {
  if (ramp_steps == 0) throw ValueError("cubic_sparsity: ramp must be >= 1");
  double frac = static_cast<double>(std::min(t, ramp_steps)) /
                static_cast<double>(ramp_steps);
  double rem = 1.0 - frac;
  return target * (1.0 - rem * rem * rem);
}

std::size_t prune_count(double sparsity, std::size_t block_count) {
  if (sparsity < 0.0 || sparsity >= 1.0)
    throw ValueError("prune_count: sparsity outside [0, 1)");
  // The epsilon keeps exact products (0.7 * 10) from flooring one short.
  return static_cast<std::size_t>(
      std::floor(sparsity * static_cast<double>(block_count) + 1e-9));
}

Tensor block_scores(const Tensor& weight, const Tensor& grad,
                    std::size_t block_height) {
  if (block_height == 0) throw ValueError("block_scores: block height 0");
  if (!weight.same_shape(grad))
    throw ShapeError("block_scores: weight " + weight.shape_str() +
                     " vs grad " + grad.shape_str());
  std::size_t m = weight.rows(), n = weight.cols();
  std::size_t block_rows = (m + block_height - 1) / block_height;
  Tensor scores({block_rows, n});
  for (std::size_t br = 0; br < block_rows; ++br) {
    std::size_t r1 = std::min(m, (br + 1) * block_height);
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = br * block_height; r < r1; ++r)
        s += std::abs(weight[r * n + c] * grad[r * n + c]);
      scores[br * n + c] = s;
    }
  }
  return scores;
}

BinaryMask mask_from_scores(const Tensor& scores, double sparsity,
                            std::size_t rows, std::size_t cols,
                            std::size_t block_height) {
  std::size_t block_rows = (rows + block_height - 1) / block_height;
  if (scores.rows() != block_rows || scores.cols() != cols)
    throw ShapeError("mask_from_scores: score table " + scores.shape_str() +
                     " does not match block grid");
  std::size_t blocks = block_rows * cols;
  std::size_t k = prune_count(sparsity, blocks);
  std::vector<std::size_t> idx(blocks);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&scores](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });
  BinaryMask mask(rows, cols, block_height);
  for (std::size_t i = 0; i < k; ++i)
    mask.set_block(idx[i] / cols, idx[i] % cols, false);
  return mask;
}

BinaryMask get_mask(const Tensor& weight, const Tensor& grad, double sparsity,
                    std::size_t block_height) {
  Tensor scores = block_scores(weight, grad, block_height);
  return mask_from_scores(scores, sparsity, weight.rows(), weight.cols(),
                          block_height);
}

NodePtr apply_mask(const NodePtr& weight, const BinaryMask& mask) {
  return mask_mul(weight, mask.to_tensor());
}

Tensor apply_mask(const Tensor& weight, const BinaryMask& mask) {
  if (weight.rows() != mask.rows() || weight.cols() != mask.cols())
    throw ShapeError("apply_mask: weight " + weight.shape_str() +
                     " vs mask grid");
  Tensor out = weight;
  for (std::size_t r = 0; r < mask.rows(); ++r)
    for (std::size_t c = 0; c < mask.cols(); ++c)
      if (!mask.get(r, c)) out[r * mask.cols() + c] = 0.0;
  return out;
}

std::size_t snn_keep_dim(std::size_t n, double sparsity, std::size_t ndims) {
  if (sparsity < 0.0 || sparsity >= 1.0)
    throw ValueError("snn_keep_dim: sparsity outside [0, 1)");
  if (ndims == 0) throw ValueError("snn_keep_dim: ndims 0");
  double keep = std::pow(1.0 - sparsity, 1.0 / static_cast<double>(ndims));
  // round() is half-away-from-zero, the documented tie rule.
  return static_cast<std::size_t>(
      std::round(static_cast<double>(n) * keep));
}

BinaryMask snn_structured_mask(std::size_t rows, std::size_t cols,
                               double sparsity) {
  std::size_t keep_r = snn_keep_dim(rows, sparsity, 2);
  std::size_t keep_c = snn_keep_dim(cols, sparsity, 2);
  BinaryMask mask(rows, cols, 1);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (r >= keep_r || c >= keep_c) mask.set(r, c, false);
  return mask;
}

}  // namespace dsnn
