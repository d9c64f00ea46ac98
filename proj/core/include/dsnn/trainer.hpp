// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dsnn/data.hpp"
#include "dsnn/model.hpp"
#include "dsnn/optim.hpp"
#include "dsnn/pruning.hpp"

namespace dsnn {

// Everything one training run needs to be reproducible. All trainers consume
// the same plan; the three booleans switch the ablation rows on and off
// independently.
struct TrainPlan {
  SparsityPlan plan;
  std::size_t total_steps = 10000;   // T
  std::size_t freeze_steps = 1000;   // T'
  std::size_t refresh_every = 100;   // F: mask refresh period
  std::size_t ramp_steps = 2000;     // cubic sparsity ramp length
  std::size_t block_height = 4;      // R
  std::size_t batch_size = 32;
  OptimizerConfig optim;
  double ema_decay = 0.999;
  std::uint64_t seed = 1;
  bool distillation = true;       // sparse passes learn from the full model
  bool lazy_update = true;        // one optimizer step per training step
  bool mix_ground_truth = false;  // average distillation and true-label loss

  void validate() const;
};

struct StepMetric {
  std::size_t step = 0;
  std::string config;
  double loss = 0.0;
  double accuracy = 0.0;
  double sparsity = 0.0;
  double wall_ms = 0.0;
};

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void record(const StepMetric& m) = 0;
};

/// Streams rows as "step,config,loss,accuracy,sparsity,wall_ms".
class CsvMetricsSink : public MetricsSink {
 public:
  explicit CsvMetricsSink(const std::string& path);
  void record(const StepMetric& m) override;

 private:
  std::ofstream out_;
};

// Test/diagnostic taps into the training loop. `on_mask_refresh` fires after
// a config's masks are recomputed; `on_grads_accumulated` fires once per
// lazy step with the summed gradients, right before the optimizer update.
struct TrainHooks {
  std::function<void(std::size_t step, const std::string& config,
                     const MaskSet& masks)>
      on_mask_refresh;
  std::function<void(std::size_t step, const std::vector<Parameter>& params)>
      on_grads_accumulated;
};

// The super-network: one set of weights plus per-configuration mask tables
// and the gradient accumulator that scores the next mask refresh. `history`
// keeps a sampled copy of the metric stream for the checkpoint manifest.
struct SuperNetwork {
  std::shared_ptr<Model> model;
  SparsityPlan plan;
  std::map<std::string, MaskSet> masks;      // config name -> weight -> mask
  std::map<std::string, Tensor> grad_store;  // previous step's accumulation
  std::size_t step = 0;                      // total optimizer steps taken
  std::vector<StepMetric> history;

  SuperNetwork() = default;
  /// Masks initialize to all-ones at the plan's block height; grad_store to
  /// zeros.
  SuperNetwork(std::shared_ptr<Model> model, SparsityPlan plan,
               std::size_t block_height);
};

struct TrainContext {
  SuperNetwork* net = nullptr;
  const TrainPlan* plan = nullptr;
  AdamState state;
  MetricsSink* metrics = nullptr;
  TrainHooks hooks;
  bool snn_mode = false;  // masks come from the structured rule

  TrainContext(SuperNetwork& n, const TrainPlan& p)
      : net(&n), plan(&p), state{p.optim} {}
};

/// Total zero fraction across a mask set (0 when empty).
double realized_sparsity(const MaskSet& masks);

/// Cross-entropy of the student against the detached teacher distribution;
/// no gradient reaches the teacher.
NodePtr distillation_loss(const NodePtr& student_logits,
                          const NodePtr& teacher_logits);

/// Plain dense training from the model's current weights; EMA shadows track
/// every step. Returns a super-network wired to `plan.plan` as the starting
/// point for the sparse trainers.
SuperNetwork pretrain(std::shared_ptr<Model> model, BatchSampler& sampler,
                      std::size_t steps, const TrainPlan& plan,
                      MetricsSink* metrics = nullptr);

/// One multi-configuration training step: full-model pass against ground
/// truth, then each sparse config in ascending sparsity (mask refresh every
/// F steps from the stored gradient, forward through the mask, distillation
/// against the step's full-model output), one lazy optimizer update, and
/// grad_store replacement. With lazy_update off, every pass updates
/// immediately instead.
void dsnn_train_step(TrainContext& ctx, const Batch& batch, std::size_t step);

/// T steps of dsnn_train_step; if freeze_steps > 0, refreshes all masks from
/// the final gradient store and runs the freezing phase.
void train_dsnn(TrainContext& ctx, BatchSampler& sampler);

/// Recomputes every sparse config's masks from the final gradient store at
/// the post-ramp sparsity targets — the transition step between the main
/// phase and progressive freezing.
void refresh_final_masks(TrainContext& ctx);

/// Fine-tunes only the weights pruned by every sparse config: forward uses
/// stop_gradient(w∘U) + w∘(1-U) with U the union of the C1..CL masks, so
/// union-kept weights stay bit-identical. Uses a fresh optimizer state (zero
/// moments guarantee zero-gradient entries receive exactly-zero updates).
void progressive_freeze(TrainContext& ctx, BatchSampler& sampler,
                        std::size_t t_prime);

/// Baseline: trains the masked model alone against ground truth with
/// immediate updates; mask refreshed every F steps from this run's own
/// gradients. The context's plan must hold exactly [C0, target].
void train_single_sparsity(TrainContext& ctx, BatchSampler& sampler);

/// Same loop as train_dsnn with the structured shape-only masks.
void train_snn_baseline(TrainContext& ctx, BatchSampler& sampler);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  double sparsity = 0.0;
};

/// Loss/accuracy over the eval split under one config's masks, computed with
/// EMA shadows swapped in (and swapped back out — the network is unchanged
/// afterwards). `use_bsr` routes masked weights through the block-sparse
/// kernel instead of the graph.
EvalResult evaluate(SuperNetwork& net, const std::string& config_name,
                    const SyntheticDataset& ds, bool use_bsr = false,
                    std::size_t batch_size = 256);

}  // namespace dsnn
