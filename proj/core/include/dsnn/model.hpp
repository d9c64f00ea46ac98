// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dsnn/block_sparse.hpp"
#include "dsnn/data.hpp"
#include "dsnn/graph.hpp"
#include "dsnn/mask.hpp"
#include "dsnn/parameter.hpp"
#include "dsnn/pruning.hpp"

namespace dsnn {

/// Masks of one sparsity configuration, keyed by weight name. Only prunable
/// weights appear.
using MaskSet = std::map<std::string, BinaryMask>;

/// Block-sparse forms of the masked weights, keyed by weight name.
using BsrSet = std::map<std::string, BlockCsrMatrix>;

// A toy classifier with named parameters. forward() builds a fresh graph per
// batch; the same parameter leaves persist across steps so gradients
// accumulate on them. Two weight transforms compose, in order:
//   freeze: w -> stop_gradient(w∘U) + w∘(1-U), with U the union mask — only
//           positions pruned by every sparse config keep training; weights
//           without a union entry (biases, sub-threshold projections) are
//           kept by every sub-network and freeze entirely;
//   masks:  w -> w∘M, the sub-network of one sparsity configuration.
class Model {
 public:
  virtual ~Model() = default;

  const std::string& kind() const { return kind_; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }
  Parameter& param(const std::string& name);
  const Parameter& param(const std::string& name) const;

  /// Logits node [batch x classes].
  virtual NodePtr forward(const Batch& batch, const MaskSet* masks = nullptr,
                          const MaskSet* freeze = nullptr) = 0;

  /// Graph-free logits [batch x classes]; weights present in `sparse` run
  /// through the block-sparse kernel, everything else through the dense
  /// matvec. Reads live values (callers swap EMA shadows in beforehand).
  virtual Tensor forward_inference(const Batch& batch,
                                   const BsrSet* sparse = nullptr) const = 0;

  std::size_t classes() const { return classes_; }

 protected:
  Model(std::string kind, std::size_t classes)
      : kind_(std::move(kind)), classes_(classes) {}
  Parameter& register_param(const std::string& name, Tensor init,
                            bool prunable);
  NodePtr weight_node(const Parameter& p, const MaskSet* masks,
                      const MaskSet* freeze) const;

  std::string kind_;
  std::size_t classes_;
  std::vector<Parameter> params_;
};

// Input -> hidden -> hidden -> classes, ReLU activations; stands in for the
// fully-connected layer class. All weight matrices are prunable.
class MlpModel : public Model {
 public:
  MlpModel(std::uint64_t seed, std::size_t input_dim, std::size_t hidden,
           std::size_t classes);

  NodePtr forward(const Batch& batch, const MaskSet* masks,
                  const MaskSet* freeze) override;
  Tensor forward_inference(const Batch& batch,
                           const BsrSet* sparse) const override;

 private:
  std::size_t input_dim_, hidden_;
};

// Single-cell LSTM over one-hot tokens with all four gates packed into one
// [4*hidden x (vocab + hidden)] matrix (row order: input, forget, cell,
// output), followed by a linear projection of the final hidden state and an
// output layer. The forget-gate bias starts at 1. The projection weight is
// prunable only at or above `min_prunable_elems` elements.
class LstmModel : public Model {
 public:
  LstmModel(std::uint64_t seed, std::size_t vocab, std::size_t hidden,
            std::size_t projection, std::size_t classes,
            std::size_t min_prunable_elems = 8192);

  NodePtr forward(const Batch& batch, const MaskSet* masks,
                  const MaskSet* freeze) override;
  Tensor forward_inference(const Batch& batch,
                           const BsrSet* sparse) const override;

  std::size_t hidden() const { return hidden_; }
  std::size_t vocab() const { return vocab_; }

 private:
  std::size_t vocab_, hidden_, projection_;
};

/// The standard three-configuration plan: recurrent-class weights at
/// {0, 0.70, 0.90} and fully-connected-class weights at {0, 0, 0.50} for
/// configs Large / Medium / Small.
SparsityPlan build_toy_plan();

/// Masks for every prunable parameter of a model under one config, all built
/// by the structured (shape-only) rule. Used by the slimmable-style
/// baseline.
MaskSet snn_masks(const std::vector<Parameter>& params,
                  const SparsityConfig& config);

/// Packs each masked prunable weight into block-CSR form.
BsrSet build_bsr_set(const std::vector<Parameter>& params,
                     const MaskSet& masks);

}  // namespace dsnn
