// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite for the dynamic-sparsity training stack. Each numbered
// criterion prints exactly one PASS/FAIL line; the process exits non-zero
// if any blocking criterion fails. Criteria 9 (trend) and 11 are advisory:
// their outcome is logged but never fails the build. All tolerances are
// pinned here, next to the checks that use them.
//
// The expensive criteria (7, 8, 9) share one set of training runs: for each
// seed in {1, 2, 3} we pretrain once, then train the multi-sparsity network,
// per-config single-sparsity baselines, the structured-mask baseline, and
// the ablation grid, all from the same pretrained weights. Criteria 2 and 5
// piggyback on those runs via training hooks and the freeze-phase snapshot.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dsnn/block_sparse.hpp"
#include "dsnn/checkpoint.hpp"
#include "dsnn/config.hpp"
#include "dsnn/data.hpp"
#include "dsnn/errors.hpp"
#include "dsnn/graph.hpp"
#include "dsnn/mask.hpp"
#include "dsnn/model.hpp"
#include "dsnn/pruning.hpp"
#include "dsnn/rng.hpp"
#include "dsnn/tensor.hpp"
#include "dsnn/trainer.hpp"

using namespace dsnn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct CriterionResult {
  int id = 0;
  bool pass = false;
  bool advisory = false;  // logged, never fails the suite
  std::string detail;
  double seconds = 0.0;
};

std::vector<CriterionResult> g_results;

void record(int id, bool pass, const std::string& detail, double secs,
            bool advisory = false) {
  g_results.push_back({id, pass, advisory, detail, secs});
}

void progress(const std::string& msg) {
  std::cerr << "[acceptance] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients vs central finite differences.

double loss_value(Model& model, const Batch& batch) {
  NodePtr logits = model.forward(batch, nullptr, nullptr);
  return softmax_cross_entropy(logits, batch.targets)->value[0];
}

// Max relative error over every entry of every parameter. The denominator is
// floored at 1e-3 so entries whose true gradient is tiny are held to an
// absolute 1e-8 instead of amplifying finite-difference roundoff.
double gradcheck_model(Model& model, const Batch& batch) {
  const double kEps = 1e-6;  // pinned by the criterion
  auto& params = model.params();
  zero_grads(params);
  NodePtr logits = model.forward(batch, nullptr, nullptr);
  NodePtr loss = softmax_cross_entropy(logits, batch.targets);
  backward(loss);
  std::vector<Tensor> analytic;
  for (auto& p : params) analytic.push_back(p.node->grad);

  double max_err = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& w = params[pi].node->value;
    for (std::size_t i = 0; i < w.size(); ++i) {
      double orig = w[i];
      w[i] = orig + kEps;
      double f_plus = loss_value(model, batch);
      w[i] = orig - kEps;
      double f_minus = loss_value(model, batch);
      w[i] = orig;
      double fd = (f_plus - f_minus) / (2.0 * kEps);
      double an = analytic[pi][i];
      double err =
          std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

void criterion_1() {
  auto t0 = Clock::now();
  const double kRelTol = 1e-5;  // pinned by the criterion
  double worst = 0.0;
  RngStream rng(derive_seed(2026, "acceptance-gradcheck"));

  SyntheticDataset seq = gen_symbol_count(19, 64, 5, 5, 3, 16);
  SyntheticDataset clu = gen_gaussian_clusters(23, 64, 3, 6, 0.3, 16);
  for (int draw = 0; draw < 20; ++draw) {
    std::vector<std::size_t> idx(4);
    for (auto& v : idx) v = rng.uniform_int(64);

    LstmModel lstm(rng.uniform_int(1u << 30), 5, 8, 4, 3, 1);
    Batch bs = make_batch(seq.train_x, seq.train_y, idx, 3);
    worst = std::max(worst, gradcheck_model(lstm, bs));

    MlpModel mlp(rng.uniform_int(1u << 30), 6, 8, 3);
    Batch bc = make_batch(clu.train_x, clu.train_y, idx, 3);
    worst = std::max(worst, gradcheck_model(mlp, bc));
  }
  double secs = seconds_since(t0);
  std::ostringstream os;
  os << "gradients vs central differences (step 1e-6), 20 draws per model, "
        "max rel err "
     << worst;
  record(1, worst < kRelTol && secs < 60.0, os.str(), secs);
}

// ---------------------------------------------------------------------------
// Criteria 7/8/9 share these runs; 2 and 5 ride along on hooks/snapshots.

ExperimentConfig experiment_config(std::uint64_t seed) {
  return parse_config("", {
                              "seed=" + std::to_string(seed),
                              "data.n_train=4096",
                              "train.batch_size=16",
                              "train.pretrain_steps=800",
                              "train.total_steps=2000",
                              "train.freeze_steps=1000",
                              "train.refresh_every=50",
                              "train.ramp_steps=800",
                              "train.ema_decay=0.995",
                              "optim.warmup_steps=100",
                          });
}

struct Weights {
  std::vector<Tensor> values, shadows;
};

Weights capture(const Model& model) {
  Weights w;
  for (const auto& p : model.params()) {
    w.values.push_back(p.node->value);
    w.shadows.push_back(p.ema_shadow);
  }
  return w;
}

std::shared_ptr<Model> model_from(const ExperimentConfig& cfg,
                                  const Weights& w) {
  auto model = make_model(cfg);
  auto& params = model->params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].node->value = w.values[i];
    params[i].ema_shadow = w.shadows[i];
  }
  return model;
}

// Independent restatement of the standard plan's levels (weights are named
// lstm0.*, fc*, out.*).
double target_level(const std::string& config, const std::string& weight) {
  bool recurrent = weight.rfind("lstm", 0) == 0;
  if (config == "Medium") return recurrent ? 0.70 : 0.0;
  if (config == "Small") return recurrent ? 0.90 : 0.50;
  return 0.0;
}

struct MaskAudit {  // criterion 2
  long long checks = 0;
  long long violations = 0;
  std::string first_violation;
};

struct FreezeAudit {  // criterion 5
  bool ran = false;
  bool kept_identical = true;
  bool untouched_identical = true;
  std::size_t kept_entries = 0;
  std::size_t changed_pruned = 0;
};

struct SeedRuns {
  std::map<std::string, EvalResult> dsnn;    // config -> result
  std::map<std::string, EvalResult> single;  // config -> result
  std::map<std::string, EvalResult> snn;
  std::map<std::string, EvalResult> abl_baseline;  // no lazy, no distill
  std::map<std::string, EvalResult> abl_lazy;      // lazy only
  std::map<std::string, EvalResult> abl_distill;   // lazy + distillation
};

struct RunCache {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<SeedRuns> per_seed;
  MaskAudit mask_audit;
  FreezeAudit freeze_audit;
  double seconds = 0.0;
};

void audit_mask_refresh(MaskAudit& audit, std::size_t block_height,
                        std::size_t ramp_steps, std::size_t step,
                        const std::string& config, const MaskSet& masks) {
  if (step < ramp_steps) return;  // ramp still rising: counts not yet final
  for (const auto& [name, mask] : masks) {
    double s = target_level(config, name);
    std::size_t block_rows =
        (mask.rows() + block_height - 1) / block_height;
    std::size_t blocks = block_rows * mask.cols();
    auto expect = static_cast<std::size_t>(
        std::floor(s * static_cast<double>(blocks) + 1e-9));
    ++audit.checks;
    if (mask.pruned_block_count() != expect) {
      ++audit.violations;
      if (audit.first_violation.empty()) {
        std::ostringstream os;
        os << config << "/" << name << " step " << step << ": "
           << mask.pruned_block_count() << " != " << expect;
        audit.first_violation = os.str();
      }
    }
  }
}

void run_seed(RunCache& cache, std::uint64_t seed, SeedRuns& out,
              bool freeze_audit_seed) {
  ExperimentConfig cfg = experiment_config(seed);
  SyntheticDataset ds = make_dataset(cfg);
  TrainPlan tp = make_train_plan(cfg);
  const std::vector<std::string> config_names = {"Large", "Medium", "Small"};

  progress("seed " + std::to_string(seed) + ": pretraining");
  auto model0 = make_model(cfg);
  BatchSampler pre_sampler(ds, tp.batch_size, tp.seed);
  SuperNetwork pre =
      pretrain(model0, pre_sampler, cfg.get_u64("train.pretrain_steps"), tp);
  Weights w0 = capture(*pre.model);

  // Multi-sparsity training, split around the freeze phase so criterion 5
  // can snapshot; the composed sequence is exactly what train_dsnn runs
  // when freeze_steps > 0.
  {
    progress("seed " + std::to_string(seed) + ": multi-sparsity training");
    TrainPlan tpd = tp;
    tpd.freeze_steps = 0;
    auto model = model_from(cfg, w0);
    SuperNetwork net(model, tp.plan, tp.block_height);
    TrainContext ctx(net, tpd);
    ctx.hooks.on_mask_refresh = [&](std::size_t step,
                                    const std::string& config,
                                    const MaskSet& masks) {
      audit_mask_refresh(cache.mask_audit, tp.block_height, tp.ramp_steps,
                         step, config, masks);
    };
    BatchSampler sampler(ds, tp.batch_size, tp.seed);
    train_dsnn(ctx, sampler);
    refresh_final_masks(ctx);

    if (freeze_audit_seed) {
      Weights before = capture(*net.model);
      MaskSet unions;
      for (const auto& p : net.model->params()) {
        if (!p.prunable) continue;
        unions.emplace(p.name,
                       mask_union({net.masks.at("Medium").at(p.name),
                                   net.masks.at("Small").at(p.name)}));
      }
      progress("seed " + std::to_string(seed) + ": freeze phase (audited)");
      progressive_freeze(ctx, sampler, tp.freeze_steps);

      FreezeAudit& fa = cache.freeze_audit;
      fa.ran = true;
      auto& params = net.model->params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& now = params[i].node->value;
        const Tensor& was = before.values[i];
        if (!params[i].prunable) {
          for (std::size_t j = 0; j < now.size(); ++j)
            if (now[j] != was[j]) fa.untouched_identical = false;
          continue;
        }
        const BinaryMask& u = unions.at(params[i].name);
        for (std::size_t r = 0; r < now.rows(); ++r)
          for (std::size_t c = 0; c < now.cols(); ++c) {
            if (u.get(r, c)) {
              ++fa.kept_entries;
              if (now.at(r, c) != was.at(r, c)) fa.kept_identical = false;
            } else if (now.at(r, c) != was.at(r, c)) {
              ++fa.changed_pruned;
            }
          }
      }
    } else {
      progress("seed " + std::to_string(seed) + ": freeze phase");
      progressive_freeze(ctx, sampler, tp.freeze_steps);
    }
    for (const auto& name : config_names)
      out.dsnn[name] = evaluate(net, name, ds);
  }

  // Per-config single-sparsity baselines from the same pretrained weights.
  for (const std::string& target : {std::string("Medium"), std::string("Small")}) {
    progress("seed " + std::to_string(seed) + ": single-sparsity " + target);
    SparsityPlan sub;
    sub.configs = {tp.plan.configs[0], tp.plan.config(target)};
    TrainPlan tps = tp;
    tps.plan = sub;
    auto model = model_from(cfg, w0);
    SuperNetwork net(model, sub, tp.block_height);
    TrainContext ctx(net, tps);
    BatchSampler sampler(ds, tp.batch_size, tp.seed);
    train_single_sparsity(ctx, sampler);
    out.single[target] = evaluate(net, target, ds);
  }
  {
    progress("seed " + std::to_string(seed) + ": dense-only baseline");
    SparsityPlan dense;
    dense.configs = {tp.plan.configs[0]};
    TrainPlan tpl = tp;
    tpl.plan = dense;
    tpl.freeze_steps = 0;
    auto model = model_from(cfg, w0);
    SuperNetwork net(model, dense, tp.block_height);
    TrainContext ctx(net, tpl);
    BatchSampler sampler(ds, tp.batch_size, tp.seed);
    train_dsnn(ctx, sampler);
    out.single["Large"] = evaluate(net, "Large", ds);
  }

  // Structured-mask (slimmable-style) baseline, same budget as the
  // multi-sparsity run.
  {
    progress("seed " + std::to_string(seed) + ": structured-mask baseline");
    auto model = model_from(cfg, w0);
    SuperNetwork net(model, tp.plan, tp.block_height);
    TrainContext ctx(net, tp);
    BatchSampler sampler(ds, tp.batch_size, tp.seed);
    train_snn_baseline(ctx, sampler);
    for (const auto& name : config_names)
      out.snn[name] = evaluate(net, name, ds);
  }

  // Ablation rows without the freeze phase; the full run above is the
  // fourth row (+freezing).
  auto ablation_row = [&](bool lazy, bool distill) {
    TrainPlan tpa = tp;
    tpa.freeze_steps = 0;
    tpa.lazy_update = lazy;
    tpa.distillation = distill;
    auto model = model_from(cfg, w0);
    SuperNetwork net(model, tp.plan, tp.block_height);
    TrainContext ctx(net, tpa);
    BatchSampler sampler(ds, tp.batch_size, tp.seed);
    train_dsnn(ctx, sampler);
    std::map<std::string, EvalResult> row;
    for (const auto& name : config_names) row[name] = evaluate(net, name, ds);
    return row;
  };
  progress("seed " + std::to_string(seed) + ": ablation rows");
  out.abl_baseline = ablation_row(false, false);
  out.abl_lazy = ablation_row(true, false);
  out.abl_distill = ablation_row(true, true);
}

RunCache build_run_cache() {
  RunCache cache;
  auto t0 = Clock::now();
  cache.per_seed.resize(cache.seeds.size());
  for (std::size_t i = 0; i < cache.seeds.size(); ++i)
    run_seed(cache, cache.seeds[i], cache.per_seed[i], i == 0);
  cache.seconds = seconds_since(t0);
  return cache;
}

void criterion_2(const RunCache& cache) {
  const MaskAudit& a = cache.mask_audit;
  std::ostringstream os;
  os << "pruned-block count == floor(S*B) at " << a.checks
     << " post-ramp mask refreshes across 3 runs";
  if (a.violations)
    os << "; " << a.violations << " violations, first: " << a.first_violation;
  record(2, a.checks > 0 && a.violations == 0, os.str(), 0.0);
}

void criterion_5(const RunCache& cache) {
  const FreezeAudit& f = cache.freeze_audit;
  std::ostringstream os;
  os << "freeze phase (1000 steps): " << f.kept_entries
     << " union-kept entries bit-identical="
     << (f.kept_identical ? "yes" : "NO") << ", union-pruned entries changed="
     << f.changed_pruned
     << ", never-masked params untouched="
     << (f.untouched_identical ? "yes" : "NO");
  record(5,
         f.ran && f.kept_identical && f.untouched_identical &&
             f.changed_pruned >= 1,
         os.str(), 0.0);
}

void criterion_7(const RunCache& cache) {
  const double kRatio = 1.10;  // pinned by the criterion
  bool pass = cache.seconds <= 1800.0;
  std::ostringstream os;
  os << "mean eval loss over 3 seeds, multi-sparsity vs single-sparsity:";
  for (const std::string name : {"Large", "Medium", "Small"}) {
    double d = 0.0, s = 0.0;
    for (const SeedRuns& r : cache.per_seed) {
      d += r.dsnn.at(name).loss;
      s += r.single.at(name).loss;
    }
    d /= double(cache.per_seed.size());
    s /= double(cache.per_seed.size());
    bool ok = d <= kRatio * s;
    pass = pass && ok;
    os << " " << name << " " << d << " vs " << s << (ok ? " ok" : " FAIL");
  }
  os << " (training " << int(cache.seconds) << " s)";
  record(7, pass, os.str(), cache.seconds);
}

void criterion_8(const RunCache& cache) {
  int wins = 0;
  std::ostringstream os;
  os << "highest-sparsity config, per-seed loss vs structured baseline:";
  for (std::size_t i = 0; i < cache.per_seed.size(); ++i) {
    double d = cache.per_seed[i].dsnn.at("Small").loss;
    double s = cache.per_seed[i].snn.at("Small").loss;
    if (d < s) ++wins;
    os << " seed" << cache.seeds[i] << " " << d << " vs " << s;
  }
  os << " -> " << wins << "/3 wins";
  record(8, wins == 3, os.str(), 0.0);
}

void criterion_9(const RunCache& cache) {
  // Emit the four-row ablation table (mean eval loss over the seeds).
  const std::vector<std::string> configs = {"Large", "Medium", "Small"};
  auto mean_of = [&](auto accessor) {
    std::map<std::string, double> m;
    for (const std::string& c : configs) {
      double acc = 0.0;
      for (const SeedRuns& r : cache.per_seed) acc += accessor(r).at(c).loss;
      m[c] = acc / double(cache.per_seed.size());
    }
    return m;
  };
  struct Row {
    std::string name;
    std::map<std::string, double> loss;
  };
  std::vector<Row> rows = {
      {"baseline", mean_of([](const SeedRuns& r) -> const auto& {
         return r.abl_baseline;
       })},
      {"+lazy update", mean_of([](const SeedRuns& r) -> const auto& {
         return r.abl_lazy;
       })},
      {"+distillation", mean_of([](const SeedRuns& r) -> const auto& {
         return r.abl_distill;
       })},
      {"+freezing", mean_of([](const SeedRuns& r) -> const auto& {
         return r.dsnn;
       })},
  };
  std::cout << "\nablation grid (mean eval loss over 3 seeds)\n";
  std::cout << "| variant       ";
  for (const std::string& c : configs) std::cout << " | " << c;
  std::cout << " |\n|---------------|--------|--------|--------|\n";
  std::cout.precision(6);
  for (const Row& r : rows) {
    std::cout << "| " << r.name;
    for (std::size_t pad = r.name.size(); pad < 14; ++pad) std::cout << ' ';
    for (const std::string& c : configs) std::cout << " | " << r.loss.at(c);
    std::cout << " |\n";
  }
  std::cout << "\n";

  int improved = 0;
  for (const SeedRuns& r : cache.per_seed)
    if (r.abl_distill.at("Small").loss < r.abl_lazy.at("Small").loss)
      ++improved;
  std::ostringstream os;
  os << "ablation grid ran and emitted its table; advisory trend: "
        "distillation improved Small in "
     << improved << "/3 seeds"
     << (improved >= 2 ? "" : " (below the 2/3 trend)");
  record(9, true, os.str(), 0.0);
}

// ---------------------------------------------------------------------------
// Criterion 3: nesting across sparsity levels, plus block recovery.

void criterion_3() {
  auto t0 = Clock::now();
  RngStream rng(derive_seed(2026, "acceptance-nesting"));
  long long failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t rows = 1 + rng.uniform_int(32);
    std::size_t cols = 1 + rng.uniform_int(16);
    std::size_t R = 1 + rng.uniform_int(4);
    std::vector<double> wv(rows * cols), gv(rows * cols);
    for (auto& v : wv) v = rng.normal();
    for (auto& v : gv) v = rng.normal();
    Tensor w({rows, cols}, wv);
    Tensor g({rows, cols}, gv);
    double s1 = rng.uniform(0.0, 0.95);
    double s2 = rng.uniform(s1, 0.999);
    BinaryMask loose = get_mask(w, g, s1, R);
    BinaryMask tight = get_mask(w, g, s2, R);
    if (!zeros_nested(loose, tight)) ++failures;
  }

  // Recovery: a block pruned under one gradient signal returns once the
  // signal moves elsewhere.
  Tensor w({2, 2}, {1.0, 1.0, 1.0, 1.0});
  BinaryMask first = get_mask(w, Tensor({2, 2}, {0.1, 5.0, 0.1, 5.0}), 0.5, 2);
  BinaryMask second = get_mask(w, Tensor({2, 2}, {5.0, 0.1, 5.0, 0.1}), 0.5, 2);
  bool recovered = !first.get(0, 0) && second.get(0, 0) && !second.get(0, 1);

  std::ostringstream os;
  os << "zeros(S1) within zeros(S2) on 500 random pairs, " << failures
     << " failures; pruned block recovered after the gradient moved: "
     << (recovered ? "yes" : "NO");
  record(3, failures == 0 && recovered, os.str(), seconds_since(t0));
}

// ---------------------------------------------------------------------------
// Criterion 4: block-sparse kernel vs masked-dense reference.

void criterion_4() {
  auto t0 = Clock::now();
  const double kAbsTol = 1e-12;  // pinned by the criterion
  RngStream rng(derive_seed(2026, "acceptance-bsr"));
  double max_diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t rows = 1 + rng.uniform_int(64);
    std::size_t cols = 1 + rng.uniform_int(64);
    std::size_t R = 1 + rng.uniform_int(8);
    std::vector<double> wv(rows * cols), gv(rows * cols), xv(cols);
    for (auto& v : wv) v = rng.normal();
    for (auto& v : gv) v = rng.normal();
    for (auto& v : xv) v = rng.normal();
    Tensor w({rows, cols}, wv);
    BinaryMask m = get_mask(w, Tensor({rows, cols}, gv),
                            rng.uniform(0.0, 0.95), R);
    Tensor x({cols}, xv);
    Tensor ref = dense_matvec(apply_mask(w, m), x);
    Tensor got = BlockCsrMatrix::from_masked_dense(w, m).matvec(x);
    for (std::size_t i = 0; i < ref.size(); ++i)
      max_diff = std::max(max_diff, std::abs(ref.data()[i] - got.data()[i]));
  }
  double secs = seconds_since(t0);
  std::ostringstream os;
  os << "block-sparse vs masked-dense matvec on 1000 instances, max abs diff "
     << max_diff;
  record(4, max_diff <= kAbsTol && secs < 60.0, os.str(), secs);
}

// ---------------------------------------------------------------------------
// Criterion 6: structured mask dimensions against a scalar oracle.

void criterion_6() {
  auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream os;
  os << "structured keep extents";
  const std::vector<std::pair<std::size_t, std::size_t>> shapes = {
      {10, 10}, {4, 4}, {64, 48}};
  for (auto [rows, cols] : shapes)
    for (double s : {0.0, 0.36, 0.75}) {
      auto keep = [&](std::size_t n) {
        return static_cast<std::size_t>(
            std::round(double(n) * std::pow(1.0 - s, 0.5)));
      };
      std::size_t tr = keep(rows), tc = keep(cols);
      if (snn_keep_dim(rows, s, 2) != tr || snn_keep_dim(cols, s, 2) != tc)
        pass = false;
      BinaryMask m = snn_structured_mask(rows, cols, s);
      for (std::size_t r = 0; r < rows && pass; ++r)
        for (std::size_t c = 0; c < cols; ++c)
          if (m.get(r, c) != (r < tr && c < tc)) {
            pass = false;
            break;
          }
    }
  os << " match round(N*(1-S)^(1/2)) and masks are top-left rectangles for "
        "3 shapes x 3 sparsities";
  record(6, pass, os.str(), seconds_since(t0));
}

// ---------------------------------------------------------------------------
// Criterion 10: determinism and checkpoint round-trip.

ExperimentConfig determinism_config() {
  return parse_config("", {
                              "seed=5",
                              "lstm.hidden=32",
                              "lstm.projection=8",
                              "pruning.min_prunable_elems=256",
                              "pruning.block_height=2",
                              "data.n_train=512",
                              "data.n_eval=128",
                              "train.pretrain_steps=30",
                              "train.total_steps=60",
                              "train.freeze_steps=20",
                              "train.refresh_every=10",
                              "train.ramp_steps=20",
                              "train.batch_size=16",
                          });
}

SuperNetwork determinism_run(const ExperimentConfig& cfg) {
  SyntheticDataset ds = make_dataset(cfg);
  TrainPlan tp = make_train_plan(cfg);
  auto model = make_model(cfg);
  BatchSampler pre_sampler(ds, tp.batch_size, tp.seed);
  SuperNetwork net =
      pretrain(model, pre_sampler, cfg.get_u64("train.pretrain_steps"), tp);
  TrainContext ctx(net, tp);
  BatchSampler sampler(ds, tp.batch_size, tp.seed);
  train_dsnn(ctx, sampler);
  return net;
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      out[fs::relative(e.path(), root).generic_string()] =
          std::string(std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>());
    }
  return out;
}

void criterion_10() {
  auto t0 = Clock::now();
  fs::path root = "acceptance_tmp";
  fs::remove_all(root);
  fs::create_directories(root);
  ExperimentConfig cfg = determinism_config();

  progress("determinism: run A");
  SuperNetwork a = determinism_run(cfg);
  save_checkpoint(a, cfg, (root / "a").string(), "dsnn");
  progress("determinism: run B");
  SuperNetwork b = determinism_run(cfg);
  save_checkpoint(b, cfg, (root / "b").string(), "dsnn");
  bool reruns_identical = tree_contents(root / "a") == tree_contents(root / "b");

  LoadedCheckpoint lc = load_checkpoint((root / "a").string());
  bool roundtrip_exact = lc.net.step == a.step && lc.net.masks == a.masks;
  auto& pa = a.model->params();
  auto& pl = lc.net.model->params();
  roundtrip_exact = roundtrip_exact && pa.size() == pl.size();
  for (std::size_t i = 0; roundtrip_exact && i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pa[i].node->value.size(); ++j)
      if (pa[i].node->value[j] != pl[i].node->value[j] ||
          pa[i].ema_shadow[j] != pl[i].ema_shadow[j]) {
        roundtrip_exact = false;
        break;
      }
  }
  save_checkpoint(lc.net, lc.config, (root / "c").string(), lc.trainer);
  bool resave_identical = tree_contents(root / "a") == tree_contents(root / "c");
  fs::remove_all(root);

  std::ostringstream os;
  os << "repeated fixed-seed runs byte-identical="
     << (reruns_identical ? "yes" : "NO")
     << ", save/load round-trip bit-exact=" << (roundtrip_exact ? "yes" : "NO")
     << ", loaded re-save byte-identical=" << (resave_identical ? "yes" : "NO");
  record(10, reruns_identical && roundtrip_exact && resave_identical, os.str(),
         seconds_since(t0));
}

// ---------------------------------------------------------------------------
// Criterion 11 (advisory): kernel speedup.

void criterion_11() {
  auto t0 = Clock::now();
  progress("benchmarking kernels (1024x1024, R=16)");
  std::vector<BenchRow> rows =
      bench_speedup({1024}, {0.0, 0.5, 0.7, 0.9}, 16, 100);
  double at90 = 0.0;
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].sparsity == 0.9) at90 = rows[i].ratio;
    // Monotone within a 10% noise band.
    if (i > 0 && rows[i].ratio < 0.9 * rows[i - 1].ratio) monotone = false;
  }
  std::ostringstream os;
  os << "median speedup at S=0.9 is " << at90 << "x (need >= 2x), monotone in "
        "S within 10%: "
     << (monotone ? "yes" : "NO") << " [";
  for (const BenchRow& r : rows) os << " " << r.sparsity << ":" << r.ratio;
  os << " ]";
  record(11, at90 >= 2.0 && monotone, os.str(), seconds_since(t0),
         /*advisory=*/true);
}

}  // namespace

int main() {
  std::cout.precision(6);
  std::cerr.precision(6);
  auto t0 = Clock::now();

  try {
    criterion_1();
    criterion_3();
    criterion_4();
    criterion_6();

    RunCache cache = build_run_cache();
    criterion_2(cache);
    criterion_5(cache);
    criterion_7(cache);
    criterion_8(cache);
    criterion_9(cache);

    criterion_10();
    criterion_11();
  } catch (const std::exception& e) {
    std::cout << "acceptance suite aborted: " << e.what() << "\n";
    return 1;
  }

  std::sort(g_results.begin(), g_results.end(),
            [](const CriterionResult& x, const CriterionResult& y) {
              return x.id < y.id;
            });
  bool all_blocking_pass = true;
  for (const CriterionResult& r : g_results) {
    std::ostringstream line;
    line << (r.pass ? "PASS" : "FAIL") << " criterion " << r.id;
    if (r.advisory) line << " (advisory)";
    line << ": " << r.detail;
    if (r.seconds > 0.05) {
      line.precision(1);
      line << " [" << std::fixed << r.seconds << " s]";
    }
    std::cout << line.str() << "\n";
    if (!r.pass && !r.advisory) all_blocking_pass = false;
  }
  std::cout << "acceptance: "
            << std::count_if(g_results.begin(), g_results.end(),
                             [](const CriterionResult& r) { return r.pass; })
            << "/" << g_results.size() << " criteria passed, total "
            << int(seconds_since(t0)) << " s\n";
  return all_blocking_pass ? 0 : 1;
}
