// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver. One subcommand per pipeline stage:
//
//   pretrain     dense training from random init -> checkpoint
//   train-dsnn   multi-configuration training from a pretrain checkpoint
//   train-single one (dense, target) pair, the per-sparsity baseline
//   train-snn    the structured-mask baseline over the same plan
//   eval         loss/accuracy of one stored sub-network (dense or bsr)
//   compare      cross-checkpoint table (csv + markdown)
//   bench        dense vs block-sparse matvec timings
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime/numeric failure.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dsnn/block_sparse.hpp"
#include "dsnn/checkpoint.hpp"
#include "dsnn/config.hpp"
#include "dsnn/errors.hpp"
#include "dsnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace dsnn;

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string init_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_init) {
  cmd->add_option("--config", args.config_file, "Config file (key = value)");
  cmd->add_option("--set", args.sets,
                  "Override a config key, e.g. --set train.total_steps=500");
  cmd->add_option("--out", args.out_dir,
                  "Output directory (default runs/out)");
  auto* init = cmd->add_option("--init", args.init_dir,
                               "Pretrain checkpoint directory to start from");
  if (needs_init) init->required();
}

ExperimentConfig resolve_config(const CommonArgs& args,
                                const ExperimentConfig* base) {
  const std::vector<std::string>& overrides = args.sets;
  ExperimentConfig cfg = base ? apply_config(*base, args.config_file,
                                             overrides)
                              : (args.config_file.empty()
                                     ? parse_config("", overrides)
                                     : load_config(args.config_file,
                                                   overrides));
  return cfg;
}

// The output directory is plumbing, not an experiment parameter: it stays
// out of the config so checkpoints from identical runs are byte-identical
// no matter where they are written.
fs::path out_root(const CommonArgs& args) {
  return args.out_dir.empty() ? fs::path("runs/out") : fs::path(args.out_dir);
}

CsvMetricsSink open_metrics(const fs::path& out) {
  fs::create_directories(out);
  return CsvMetricsSink((out / "metrics.csv").string());
}

void finish_run(const SuperNetwork& net, const ExperimentConfig& cfg,
                const fs::path& out, const std::string& trainer) {
  fs::path ckpt = out / "checkpoint";
  save_checkpoint(net, cfg, ckpt.string(), trainer);
  std::cout << trainer << ": wrote " << ckpt.string() << " (step "
            << net.step << ")\n";
}

int cmd_pretrain(const CommonArgs& args) {
  ExperimentConfig cfg = resolve_config(args, nullptr);
  std::shared_ptr<Model> model = make_model(cfg);
  SyntheticDataset ds = make_dataset(cfg);
  TrainPlan tp = make_train_plan(cfg);
  BatchSampler sampler(ds, tp.batch_size, tp.seed);
  CsvMetricsSink metrics = open_metrics(out_root(args));
  SuperNetwork net = pretrain(model, sampler,
                              cfg.get_u64("train.pretrain_steps"), tp,
                              &metrics);
  finish_run(net, cfg, out_root(args), "pretrain");
  return 0;
}

// Shared preamble of the three training commands: restore the pretrain
// checkpoint, overlay config tweaks, and rebuild the batch stream.
struct TrainSetup {
  LoadedCheckpoint lc;
  ExperimentConfig cfg;
  TrainPlan tp;
  SyntheticDataset ds;
};

TrainSetup setup_training(const CommonArgs& args) {
  TrainSetup s{load_checkpoint(args.init_dir), {}, {}, {}};
  s.cfg = resolve_config(args, &s.lc.config);
  s.tp = make_train_plan(s.cfg);
  s.ds = make_dataset(s.cfg);
  return s;
}

int cmd_train_dsnn(const CommonArgs& args) {
  TrainSetup s = setup_training(args);
  SuperNetwork net(s.lc.net.model, s.tp.plan, s.tp.block_height);
  net.step = s.lc.net.step;
  net.history = std::move(s.lc.net.history);
  BatchSampler sampler(s.ds, s.tp.batch_size, s.tp.seed);
  CsvMetricsSink metrics = open_metrics(out_root(args));
  TrainContext ctx(net, s.tp);
  ctx.metrics = &metrics;
  train_dsnn(ctx, sampler);
  finish_run(net, s.cfg, out_root(args), "dsnn");
  return 0;
}

int cmd_train_single(const CommonArgs& args, const std::string& target) {
  TrainSetup s = setup_training(args);
  SparsityPlan sub;
  sub.configs = {s.tp.plan.configs.at(0), s.tp.plan.config(target)};
  if (sub.configs[0].name == target)
    throw ConfigError("train-single target must be a sparse config, not '" +
                      target + "'");
  TrainPlan tp = s.tp;
  tp.plan = sub;
  SuperNetwork net(s.lc.net.model, sub, tp.block_height);
  net.step = s.lc.net.step;
  net.history = std::move(s.lc.net.history);
  BatchSampler sampler(s.ds, tp.batch_size, tp.seed);
  CsvMetricsSink metrics = open_metrics(out_root(args));
  TrainContext ctx(net, tp);
  ctx.metrics = &metrics;
  train_single_sparsity(ctx, sampler);
  finish_run(net, s.cfg, out_root(args), "single:" + target);
  return 0;
}

int cmd_train_snn(const CommonArgs& args) {
  TrainSetup s = setup_training(args);
  SuperNetwork net(s.lc.net.model, s.tp.plan, s.tp.block_height);
  net.step = s.lc.net.step;
  net.history = std::move(s.lc.net.history);
  BatchSampler sampler(s.ds, s.tp.batch_size, s.tp.seed);
  CsvMetricsSink metrics = open_metrics(out_root(args));
  TrainContext ctx(net, s.tp);
  ctx.metrics = &metrics;
  train_snn_baseline(ctx, sampler);
  finish_run(net, s.cfg, out_root(args), "snn");
  return 0;
}

int cmd_eval(const std::string& ckpt_dir, const std::string& config_name,
             const std::string& engine, std::size_t batch_size) {
  if (engine != "dense" && engine != "bsr")
    throw ConfigError("--engine must be dense or bsr, got '" + engine + "'");
  LoadedCheckpoint lc = load_checkpoint(ckpt_dir);
  SyntheticDataset ds = make_dataset(lc.config);
  EvalResult r =
      evaluate(lc.net, config_name, ds, engine == "bsr", batch_size);
  std::cout << "type=" << lc.trainer << " config=" << config_name
            << " engine=" << engine << " loss=" << r.loss
            << " accuracy=" << r.accuracy << " sparsity=" << r.sparsity
            << "\n";
  return 0;
}

struct CompareRow {
  std::string type;
  double sparsity;
  std::string model;
  std::string config;
  double loss;
  double accuracy;
};

void check_compatible_plans(const std::vector<LoadedCheckpoint>& cps) {
  for (std::size_t i = 0; i < cps.size(); ++i)
    for (std::size_t j = i + 1; j < cps.size(); ++j)
      for (const auto& a : cps[i].net.plan.configs)
        for (const auto& b : cps[j].net.plan.configs)
          if (a.name == b.name && a.levels != b.levels)
            throw ConfigError("incompatible plans: config '" + a.name +
                              "' has different levels across checkpoints");
}

int cmd_compare(const std::vector<std::string>& dirs, bool ablation,
                const std::string& out_dir) {
  std::vector<LoadedCheckpoint> cps;
  for (const auto& d : dirs) cps.push_back(load_checkpoint(d));
  check_compatible_plans(cps);

  std::vector<CompareRow> rows;
  for (auto& lc : cps) {
    SyntheticDataset ds = make_dataset(lc.config);
    for (const auto& sc : lc.net.plan.configs) {
      EvalResult r = evaluate(lc.net, sc.name, ds);
      rows.push_back({lc.trainer, r.sparsity, lc.net.model->kind(), sc.name,
                      r.loss, r.accuracy});
    }
  }

  std::ostringstream csv;
  csv << "type,sparsity,model,loss,accuracy\n";
  csv.precision(10);
  for (const auto& r : rows)
    csv << r.type << "," << r.sparsity << "," << r.model << "," << r.loss
        << "," << r.accuracy << "\n";

  std::ostringstream md;
  md.precision(6);
  if (!ablation) {
    md << "| type | config | sparsity | model | loss | accuracy |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : rows)
      md << "| " << r.type << " | " << r.config << " | " << r.sparsity
         << " | " << r.model << " | " << r.loss << " | " << r.accuracy
         << " |\n";
  } else {
    // Ablation layout: one row per checkpoint, one loss column per config.
    std::vector<std::string> configs;
    for (const auto& r : rows)
      if (std::find(configs.begin(), configs.end(), r.config) ==
          configs.end())
        configs.push_back(r.config);
    md << "| variant |";
    for (const auto& c : configs) md << " " << c << " loss |";
    md << "\n|---|";
    for (std::size_t i = 0; i < configs.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& lc : cps) {
      md << "| " << lc.trainer << " |";
      for (const auto& c : configs) {
        bool found = false;
        for (const auto& r : rows)
          if (r.type == lc.trainer && r.config == c) {
            md << " " << r.loss << " |";
            found = true;
            break;
          }
        if (!found) md << " - |";
      }
      md << "\n";
    }
  }

  std::cout << md.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream cf(fs::path(out_dir) / "compare.csv");
    cf << csv.str();
    std::ofstream mf(fs::path(out_dir) / "compare.md");
    mf << md.str();
    if (!cf || !mf) throw IoError("cannot write compare outputs");
    std::cout << "wrote " << (fs::path(out_dir) / "compare.csv").string()
              << "\n";
  }
  return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes,
              const std::vector<double>& sparsities, std::size_t reps,
              std::size_t block_height, const std::string& csv_path) {
  std::vector<BenchRow> rows =
      bench_speedup(sizes, sparsities, block_height, reps);
  std::cout << "size sparsity dense_ns sparse_ns ratio\n";
  std::cout.precision(4);
  for (const auto& r : rows)
    std::cout << r.size << " " << r.sparsity << " " << r.dense_ns << " "
              << r.sparse_ns << " " << r.ratio << "\n";
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot write " + csv_path);
    write_bench_csv(rows, out);
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic sparsity networks: train once, run at any "
               "predefined sparsity"};
  app.require_subcommand(0, 1);
  bool dump_defaults = false;
  app.add_flag("--dump-defaults", dump_defaults,
               "Print the default config and exit");

  CommonArgs pre_args, dsnn_args, single_args, snn_args;
  std::string single_target;

  auto* c_pre = app.add_subcommand("pretrain", "Dense training from scratch");
  add_common(c_pre, pre_args, false);

  auto* c_dsnn = app.add_subcommand(
      "train-dsnn", "Train every sparsity configuration jointly");
  add_common(c_dsnn, dsnn_args, true);

  auto* c_single = app.add_subcommand(
      "train-single", "Train one sparsity configuration on its own");
  add_common(c_single, single_args, true);
  c_single->add_option("--target", single_target, "Sparse config to train")
      ->required();

  auto* c_snn = app.add_subcommand("train-snn",
                                   "Structured-mask baseline training");
  add_common(c_snn, snn_args, true);

  std::string eval_ckpt, eval_config, eval_engine = "dense";
  std::size_t eval_batch = 256;
  auto* c_eval = app.add_subcommand("eval", "Evaluate one stored sub-network");
  c_eval->add_option("checkpoint", eval_ckpt, "Checkpoint directory")
      ->required();
  c_eval->add_option("config", eval_config, "Sparsity config name")
      ->required();
  c_eval->add_option("--engine", eval_engine, "dense | bsr");
  c_eval->add_option("--batch-size", eval_batch, "Eval batch size");

  std::vector<std::string> cmp_dirs;
  bool cmp_ablation = false;
  std::string cmp_out;
  auto* c_cmp = app.add_subcommand("compare",
                                   "Tabulate checkpoints side by side");
  c_cmp->add_option("checkpoints", cmp_dirs, "Checkpoint directories")
      ->required()
      ->expected(2, -1);
  c_cmp->add_flag("--ablation", cmp_ablation,
                  "Pivot the markdown to variant rows x config columns");
  c_cmp->add_option("--out", cmp_out, "Directory for compare.csv/compare.md");

  std::vector<std::size_t> bench_sizes{256, 512, 1024};
  std::vector<double> bench_sparsities{0.0, 0.5, 0.7, 0.9};
  std::size_t bench_reps = 100, bench_r = 16;
  std::string bench_csv;
  auto* c_bench = app.add_subcommand(
      "bench", "Time dense vs block-sparse matrix-vector products");
  c_bench->add_option("--sizes", bench_sizes, "Square matrix sizes")
      ->delimiter(',');
  c_bench->add_option("--sparsities", bench_sparsities, "Sparsity levels")
      ->delimiter(',');
  c_bench->add_option("--reps", bench_reps, "Timing repetitions (median)");
  c_bench->add_option("--block-height", bench_r, "Block height R");
  c_bench->add_option("--csv", bench_csv, "Also write a CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);  // prints the message / help text
    return rc == 0 ? 0 : 1;
  }

  try {
    if (dump_defaults) {
      std::cout << dump_config(default_config());
      return 0;
    }
    if (c_pre->parsed()) return cmd_pretrain(pre_args);
    if (c_dsnn->parsed()) return cmd_train_dsnn(dsnn_args);
    if (c_single->parsed()) return cmd_train_single(single_args,
                                                    single_target);
    if (c_snn->parsed()) return cmd_train_snn(snn_args);
    if (c_eval->parsed())
      return cmd_eval(eval_ckpt, eval_config, eval_engine, eval_batch);
    if (c_cmp->parsed()) return cmd_compare(cmp_dirs, cmp_ablation, cmp_out);
    if (c_bench->parsed())
      return cmd_bench(bench_sizes, bench_sparsities, bench_reps, bench_r,
                       bench_csv);
    std::cerr << app.help();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
