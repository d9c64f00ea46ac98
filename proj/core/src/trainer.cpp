// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/trainer.hpp"

#include <chrono>
#include <cmath>

#include "dsnn/errors.hpp"

namespace dsnn {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double batch_accuracy(const Tensor& logits,
                      const std::vector<std::size_t>& labels) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r)
    if (argmax_row(logits, r) == labels[r]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

void ensure_finite(double loss, const std::string& config, std::size_t step) {
  if (!std::isfinite(loss))
    throw NumericError("config '" + config + "' step " +
                       std::to_string(step) + ": non-finite loss");
}

// Mean cross-entropy from raw tensors; used on the inference paths where no
// graph exists.
double xent_value(const Tensor& logits, const Tensor& targets) {
  std::size_t n = logits.rows(), c = logits.cols();
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double m = logits[r * c];
    for (std::size_t j = 1; j < c; ++j) m = std::max(m, logits[r * c + j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j)
      lse += std::exp(logits[r * c + j] - m);
    lse = std::log(lse);
    for (std::size_t j = 0; j < c; ++j)
      total += targets[r * c + j] * (lse - (logits[r * c + j] - m));
  }
  return total / static_cast<double>(n);
}

// Records to the live sink always, and to the manifest history (with the
// timing zeroed, so checkpoints stay byte-reproducible) when sampled.
void push_metric(TrainContext& ctx, const StepMetric& m, bool to_history) {
  if (ctx.metrics) ctx.metrics->record(m);
  if (to_history) {
    StepMetric h = m;
    h.wall_ms = 0.0;
    ctx.net->history.push_back(std::move(h));
  }
}

void refresh_config_masks(TrainContext& ctx, const SparsityConfig& cfg,
                          std::size_t step) {
  const TrainPlan& tp = *ctx.plan;
  MaskSet& ms = ctx.net->masks.at(cfg.name);
  for (const auto& p : ctx.net->model->params()) {
    if (!p.prunable) continue;
    const Tensor& w = p.node->value;
    double target = cfg.level_for(p.name);
    double s_t = cubic_sparsity(step, tp.ramp_steps, target);
    BinaryMask m =
        ctx.snn_mode
            ? snn_structured_mask(w.rows(), w.cols(), s_t)
            : get_mask(w, ctx.net->grad_store.at(p.name), s_t,
                       tp.block_height);
    ms.insert_or_assign(p.name, std::move(m));
  }
  if (ctx.hooks.on_mask_refresh) ctx.hooks.on_mask_refresh(step, cfg.name, ms);
}

void store_grads(SuperNetwork& net) {
  for (const auto& p : net.model->params())
    net.grad_store[p.name] = p.node->grad.size()
                                 ? p.node->grad
                                 : Tensor::zeros(p.node->value.shape());
}

void add_grads_into(std::map<std::string, Tensor>& acc,
                    const std::vector<Parameter>& params) {
  for (const auto& p : params) {
    if (p.node->grad.size() == 0) continue;
    Tensor& a = acc[p.name];
    if (a.size() == 0) {
      a = p.node->grad;
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += p.node->grad[i];
    }
  }
}

void check_plan_agreement(const SuperNetwork& net, const TrainPlan& tp) {
  if (tp.plan.configs.size() != net.plan.configs.size())
    throw ConfigError("training plan and super-network disagree on configs");
  for (std::size_t i = 0; i < net.plan.configs.size(); ++i)
    if (tp.plan.configs[i].name != net.plan.configs[i].name)
      throw ConfigError("training plan and super-network disagree on configs");
}

struct EmaSwapGuard {
  std::vector<Parameter>& params;
  explicit EmaSwapGuard(std::vector<Parameter>& p) : params(p) {
    swap_ema(params);
  }
  ~EmaSwapGuard() { swap_ema(params); }
};

}  // namespace

void TrainPlan::validate() const {
  plan.validate();
  if (total_steps == 0) throw ConfigError("total_steps must be >= 1");
  if (refresh_every == 0) throw ConfigError("refresh_every must be >= 1");
  if (ramp_steps == 0) throw ConfigError("ramp_steps must be >= 1");
  if (block_height == 0) throw ConfigError("block_height must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(ema_decay > 0.0 && ema_decay < 1.0))
    throw ConfigError("ema_decay must lie in (0, 1)");
  if (optim.lr <= 0.0) throw ConfigError("learning rate must be positive");
}

CsvMetricsSink::CsvMetricsSink(const std::string& path) : out_(path) {
  if (!out_) throw IoError("cannot open metrics file " + path);
  out_.precision(17);
  out_ << "step,config,loss,accuracy,sparsity,wall_ms\n";
}

void CsvMetricsSink::record(const StepMetric& m) {
  out_ << m.step << "," << m.config << "," << m.loss << "," << m.accuracy
       << "," << m.sparsity << "," << m.wall_ms << "\n";
}

SuperNetwork::SuperNetwork(std::shared_ptr<Model> model_, SparsityPlan plan_,
                           std::size_t block_height)
    : model(std::move(model_)), plan(std::move(plan_)) {
  plan.validate_against(model->params());
  if (block_height == 0) throw ConfigError("block_height must be >= 1");
  for (const auto& cfg : plan.configs) {
    MaskSet ms;
    for (const auto& p : model->params())
      if (p.prunable)
        ms.emplace(p.name, BinaryMask(p.node->value.rows(),
                                      p.node->value.cols(), block_height));
    masks.emplace(cfg.name, std::move(ms));
  }
  for (const auto& p : model->params())
    grad_store.emplace(p.name, Tensor::zeros(p.node->value.shape()));
}

double realized_sparsity(const MaskSet& masks) {
  std::size_t zeros = 0, total = 0;
  for (const auto& [name, m] : masks) {
    zeros += m.zero_count();
    total += m.size();
  }
  return total == 0 ? 0.0
                    : static_cast<double>(zeros) / static_cast<double>(total);
}

NodePtr distillation_loss(const NodePtr& student_logits,
                          const NodePtr& teacher_logits) {
  if (!student_logits->value.same_shape(teacher_logits->value))
    throw ShapeError("distillation_loss: student " +
                     student_logits->value.shape_str() + " vs teacher " +
                     teacher_logits->value.shape_str());
  return softmax_cross_entropy(student_logits,
                               softmax_rows(teacher_logits->value));
}

SuperNetwork pretrain(std::shared_ptr<Model> model, BatchSampler& sampler,
                      std::size_t steps, const TrainPlan& plan,
                      MetricsSink* metrics) {
  plan.validate();
  AdamState state{plan.optim};
  auto& params = model->params();
  std::vector<StepMetric> history;
  for (std::size_t t = 0; t < steps; ++t) {
    Batch batch = sampler.next();
    zero_grads(params);
    auto t0 = Clock::now();
    NodePtr logits = model->forward(batch, nullptr, nullptr);
    NodePtr loss = softmax_cross_entropy(logits, batch.targets);
    ensure_finite(loss->value[0], "pretrain", t);
    backward(loss);
    adam_step(params, state);
    ema_update(params, plan.ema_decay);
    StepMetric m{t,   "pretrain", loss->value[0],
                 batch_accuracy(logits->value, batch.labels), 0.0,
                 ms_since(t0)};
    if (metrics) metrics->record(m);
    if (t % plan.refresh_every == 0 || t + 1 == steps) {
      m.wall_ms = 0.0;
      history.push_back(m);
    }
  }
  SuperNetwork net(std::move(model), plan.plan, plan.block_height);
  net.step = steps;
  net.history = std::move(history);
  return net;
}

void dsnn_train_step(TrainContext& ctx, const Batch& batch,
                     std::size_t step) {
  SuperNetwork& net = *ctx.net;
  const TrainPlan& tp = *ctx.plan;
  auto& params = net.model->params();
  bool sample =
      step % tp.refresh_every == 0 || step + 1 == tp.total_steps;
  zero_grads(params);
  std::map<std::string, Tensor> step_accum;

  auto t0 = Clock::now();
  NodePtr logits = net.model->forward(batch, nullptr, nullptr);
  NodePtr loss = softmax_cross_entropy(logits, batch.targets);
  ensure_finite(loss->value[0], net.plan.configs[0].name, step);
  backward(loss);
  push_metric(ctx,
              {step, net.plan.configs[0].name, loss->value[0],
               batch_accuracy(logits->value, batch.labels), 0.0,
               ms_since(t0)},
              sample);
  if (!tp.lazy_update) {
    add_grads_into(step_accum, params);
    adam_step(params, ctx.state);
    ema_update(params, tp.ema_decay);
    zero_grads(params);
  }

  for (std::size_t i = 1; i < net.plan.configs.size(); ++i) {
    const SparsityConfig& cfg = net.plan.configs[i];
    if (step % tp.refresh_every == 0) refresh_config_masks(ctx, cfg, step);
    const MaskSet& masks = net.masks.at(cfg.name);
    auto t1 = Clock::now();
    NodePtr slogits = net.model->forward(batch, &masks, nullptr);
    NodePtr sloss;
    if (tp.distillation) {
      sloss = distillation_loss(slogits, logits);
      if (tp.mix_ground_truth)
        sloss = scale(
            add(sloss, softmax_cross_entropy(slogits, batch.targets)), 0.5);
    } else {
      sloss = softmax_cross_entropy(slogits, batch.targets);
    }
    ensure_finite(sloss->value[0], cfg.name, step);
    backward(sloss);
    push_metric(ctx,
                {step, cfg.name, sloss->value[0],
                 batch_accuracy(slogits->value, batch.labels),
                 realized_sparsity(masks), ms_since(t1)},
                sample);
    if (!tp.lazy_update) {
      add_grads_into(step_accum, params);
      adam_step(params, ctx.state);
      ema_update(params, tp.ema_decay);
      zero_grads(params);
    }
  }

  if (tp.lazy_update) {
    if (ctx.hooks.on_grads_accumulated)
      ctx.hooks.on_grads_accumulated(step, params);
    adam_step(params, ctx.state);
    ema_update(params, tp.ema_decay);
    store_grads(net);
  } else {
    for (const auto& p : params) {
      auto it = step_accum.find(p.name);
      net.grad_store[p.name] = it != step_accum.end()
                                   ? std::move(it->second)
                                   : Tensor::zeros(p.node->value.shape());
    }
  }
  net.step += 1;
}

void train_dsnn(TrainContext& ctx, BatchSampler& sampler) {
  const TrainPlan& tp = *ctx.plan;
  tp.validate();
  SuperNetwork& net = *ctx.net;
  check_plan_agreement(net, tp);
  net.plan.validate_against(net.model->params());
  for (std::size_t t = 0; t < tp.total_steps; ++t)
    dsnn_train_step(ctx, sampler.next(), t);
  if (tp.freeze_steps > 0) {
    refresh_final_masks(ctx);
    progressive_freeze(ctx, sampler, tp.freeze_steps);
  }
}

void refresh_final_masks(TrainContext& ctx) {
  // A last refresh from the final gradient store so the frozen union
  // matches what the converged weights would be pruned to.
  for (std::size_t i = 1; i < ctx.net->plan.configs.size(); ++i)
    refresh_config_masks(ctx, ctx.net->plan.configs[i],
                         ctx.plan->total_steps);
}

void progressive_freeze(TrainContext& ctx, BatchSampler& sampler,
                        std::size_t t_prime) {
  if (t_prime == 0) return;
  SuperNetwork& net = *ctx.net;
  const TrainPlan& tp = *ctx.plan;
  auto& params = net.model->params();
  MaskSet union_masks;
  if (net.plan.configs.size() > 1) {
    for (const auto& p : params) {
      if (!p.prunable) continue;
      std::vector<BinaryMask> ms;
      for (std::size_t i = 1; i < net.plan.configs.size(); ++i)
        ms.push_back(net.masks.at(net.plan.configs[i].name).at(p.name));
      union_masks.emplace(p.name, mask_union(ms));
    }
  }
  // Fresh moments: entries with zero gradient must move by exactly zero.
  AdamState freeze_state{tp.optim};
  for (std::size_t k = 0; k < t_prime; ++k) {
    Batch batch = sampler.next();
    std::size_t step = tp.total_steps + k;
    zero_grads(params);
    auto t0 = Clock::now();
    NodePtr logits = net.model->forward(batch, nullptr, &union_masks);
    NodePtr loss = softmax_cross_entropy(logits, batch.targets);
    ensure_finite(loss->value[0], "freeze", step);
    if (loss->requires_grad) {  // false when the union freezes everything
      backward(loss);
      adam_step(params, freeze_state);
      ema_update(params, tp.ema_decay);
    }
    net.step += 1;
    push_metric(ctx,
                {step, "freeze", loss->value[0],
                 batch_accuracy(logits->value, batch.labels),
                 realized_sparsity(union_masks), ms_since(t0)},
                k % tp.refresh_every == 0 || k + 1 == t_prime);
  }
}

void train_single_sparsity(TrainContext& ctx, BatchSampler& sampler) {
  const TrainPlan& tp = *ctx.plan;
  tp.validate();
  SuperNetwork& net = *ctx.net;
  check_plan_agreement(net, tp);
  if (net.plan.configs.size() != 2)
    throw ConfigError(
        "single-sparsity training expects a plan of exactly [C0, target]");
  net.plan.validate_against(net.model->params());
  auto& params = net.model->params();
  const SparsityConfig& cfg = net.plan.configs[1];
  for (std::size_t t = 0; t < tp.total_steps; ++t) {
    Batch batch = sampler.next();
    zero_grads(params);
    if (t % tp.refresh_every == 0) refresh_config_masks(ctx, cfg, t);
    const MaskSet& masks = net.masks.at(cfg.name);
    auto t0 = Clock::now();
    NodePtr logits = net.model->forward(batch, &masks, nullptr);
    NodePtr loss = softmax_cross_entropy(logits, batch.targets);
    ensure_finite(loss->value[0], cfg.name, t);
    backward(loss);
    adam_step(params, ctx.state);
    ema_update(params, tp.ema_decay);
    store_grads(net);
    net.step += 1;
    push_metric(ctx,
                {t, cfg.name, loss->value[0],
                 batch_accuracy(logits->value, batch.labels),
                 realized_sparsity(masks), ms_since(t0)},
                t % tp.refresh_every == 0 || t + 1 == tp.total_steps);
  }
}

void train_snn_baseline(TrainContext& ctx, BatchSampler& sampler) {
  ctx.snn_mode = true;
  train_dsnn(ctx, sampler);
}

EvalResult evaluate(SuperNetwork& net, const std::string& config_name,
                    const SyntheticDataset& ds, bool use_bsr,
                    std::size_t batch_size) {
  const SparsityConfig& cfg = net.plan.config(config_name);
  const MaskSet& masks = net.masks.at(cfg.name);
  auto& params = net.model->params();
  std::size_t n = ds.eval_y.size();
  if (n == 0) throw ValueError("evaluate: empty eval split");
  if (batch_size == 0) throw ValueError("evaluate: batch size 0");

  EmaSwapGuard guard(params);
  BsrSet bsr;
  if (use_bsr) bsr = build_bsr_set(params, masks);

  double total_loss = 0.0;
  std::size_t hits = 0;
  for (std::size_t i0 = 0; i0 < n; i0 += batch_size) {
    std::size_t i1 = std::min(n, i0 + batch_size);
    std::vector<std::size_t> idx(i1 - i0);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i0 + i;
    Batch b = make_batch(ds.eval_x, ds.eval_y, idx, ds.classes);
    Tensor logits = use_bsr
                        ? net.model->forward_inference(b, &bsr)
                        : net.model->forward(b, &masks, nullptr)->value;
    total_loss += xent_value(logits, b.targets) *
                  static_cast<double>(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r)
      if (argmax_row(logits, r) == b.labels[r]) ++hits;
  }
  EvalResult res;
  res.loss = total_loss / static_cast<double>(n);
  res.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  res.sparsity = realized_sparsity(masks);
  return res;
}

}  // namespace dsnn
