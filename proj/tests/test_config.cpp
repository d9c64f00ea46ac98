// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "dsnn/config.hpp"
#include "dsnn/errors.hpp"
#include "dsnn/model.hpp"

using namespace dsnn;

TEST_CASE("defaults describe the standard experiment") {
  ExperimentConfig cfg = default_config();
  CHECK(cfg.get("task") == "symbol-count");
  CHECK(cfg.get("model") == "lstm");
  CHECK(cfg.get_u64("seed") == 1);
  CHECK(cfg.get_u64("train.total_steps") == 10000);
  CHECK(cfg.get_u64("train.freeze_steps") == 1000);
  CHECK(cfg.get_u64("train.refresh_every") == 100);
  CHECK(cfg.get_u64("pruning.block_height") == 4);
  CHECK(cfg.get_double("optim.lr") == 0.001);
  CHECK(cfg.get_bool("train.distillation"));
  CHECK(cfg.get_bool("train.lazy_update"));
  CHECK_FALSE(cfg.get_bool("train.mix_ground_truth"));
  CHECK(cfg.get("plan.configs") == "Large,Medium,Small");
  CHECK(cfg.get("plan.Small.lstm*") == "0.90");
}

TEST_CASE("parsing accepts comments, blanks, and whitespace") {
  ExperimentConfig cfg = parse_config(
      "# an experiment\n"
      "\n"
      "seed = 42   # trailing comment\n"
      "  optim.lr=0.01\n"
      "task = symbol-count\n");
  CHECK(cfg.get_u64("seed") == 42);
  CHECK(cfg.get_double("optim.lr") == 0.01);
  // Untouched keys keep their defaults.
  CHECK(cfg.get_u64("train.batch_size") == 32);
}

TEST_CASE("dump and parse round-trip exactly") {
  ExperimentConfig cfg = parse_config("", {"seed=9", "optim.lr=0.05"});
  ExperimentConfig back = parse_config(dump_config(cfg));
  CHECK(back.kv == cfg.kv);
  // Round-trip must also survive custom config names that sort ahead of
  // the `plan.configs` key itself.
  ExperimentConfig named = parse_config(
      "plan.configs = Alpha,Tiny\n"
      "plan.Alpha.lstm* = 0\n"
      "plan.Alpha.fc* = 0\n"
      "plan.Alpha.out* = 0\n"
      "plan.Tiny.lstm* = 0.9\n"
      "plan.Tiny.fc* = 0.5\n"
      "plan.Tiny.out* = 0.5\n");
  ExperimentConfig named_back = parse_config(dump_config(named));
  CHECK(named_back.kv == named.kv);
  CHECK(named.kv.count("plan.Medium.lstm*") == 0);  // dropped with its config
}

TEST_CASE("unknown keys are rejected with a line number") {
  CHECK_THROWS_AS(parse_config("sneed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("train.totalsteps = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("", {"nope=1"}), ConfigError);
  try {
    parse_config("seed = 1\nbogus = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("plan keys must belong to a declared config") {
  // `Tiny` is not in plan.configs, so its level keys are invalid.
  CHECK_THROWS_AS(parse_config("plan.Tiny.lstm* = 0.5\n"), ConfigError);
  // Declaring it first makes the same key legal.
  ExperimentConfig cfg = parse_config(
      "plan.configs = Large,Tiny\n"
      "plan.Tiny.lstm* = 0.5\n"
      "plan.Tiny.fc* = 0.5\n"
      "plan.Tiny.out* = 0.5\n");
  CHECK(cfg.get("plan.Tiny.lstm*") == "0.5");
  SparsityPlan plan = make_plan(cfg);
  REQUIRE(plan.configs.size() == 2);
  CHECK(plan.configs[1].name == "Tiny");
}

TEST_CASE("config names are restricted to a path-safe charset") {
  CHECK_THROWS_AS(parse_config("plan.configs = Large,Sm all\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("plan.configs = Large,a/b\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("plan.configs = Large,..\n"), ConfigError);
  CHECK_NOTHROW(parse_config(
      "plan.configs = Large,half_9-x\n"
      "plan.half_9-x.lstm* = 0.5\n"
      "plan.half_9-x.fc* = 0.5\n"
      "plan.half_9-x.out* = 0.5\n"));
}

TEST_CASE("malformed lines and values are rejected") {
  CHECK_THROWS_AS(parse_config("seed\n"), ConfigError);           // no '='
  CHECK_THROWS_AS(parse_config("= 3\n"), ConfigError);            // no key
  CHECK_THROWS_AS(parse_config("seed = x\n").get_u64("seed"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = -4\n").get_u64("seed"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 4q\n").get_u64("seed"), ConfigError);
  CHECK_THROWS_AS(parse_config("optim.lr = fast\n").get_double("optim.lr"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config("train.distillation = maybe\n").get_bool("train.distillation"),
      ConfigError);
  ExperimentConfig cfg = default_config();
  CHECK_THROWS_AS(cfg.get("no.such.key"), ConfigError);
}

TEST_CASE("overrides win over file text, last assignment wins") {
  ExperimentConfig cfg = parse_config("seed = 3\n", {"seed=4", "seed=5"});
  CHECK(cfg.get_u64("seed") == 5);
}

TEST_CASE("apply_config layers new settings over an existing config") {
  ExperimentConfig base = parse_config("seed = 3\noptim.lr = 0.5\n");
  ExperimentConfig out = apply_config(base, "", {"seed=8"});
  CHECK(out.get_u64("seed") == 8);
  CHECK(out.get_double("optim.lr") == 0.5);  // untouched keys carry over
  CHECK_THROWS_AS(apply_config(base, "", {"bogus=1"}), ConfigError);
}

TEST_CASE("load_config reads a file and rejects missing paths") {
  CHECK_THROWS_AS(load_config("does_not_exist.cfg"), IoError);
}

TEST_CASE("factories build the configured objects") {
  ExperimentConfig cfg = parse_config(
      "task = symbol-count\n"
      "model = lstm\n"
      "lstm.hidden = 8\n"
      "lstm.projection = 4\n"
      "data.classes = 3\n"
      "data.vocab = 5\n"
      "data.seq_len = 5\n"
      "data.n_train = 32\n"
      "data.n_eval = 16\n");
  std::shared_ptr<Model> model = make_model(cfg);
  CHECK(model->kind() == "lstm");
  CHECK(model->param("lstm0.w").node->value.rows() == 32);  // 4 * hidden
  SyntheticDataset ds = make_dataset(cfg);
  CHECK(ds.kind == "symbol-count");
  CHECK(ds.train_y.size() == 32);
  CHECK(ds.eval_y.size() == 16);
  SparsityPlan plan = make_plan(cfg);
  CHECK(plan.configs.size() == 3);
  TrainPlan tp = make_train_plan(cfg);
  CHECK(tp.total_steps == 10000);
  CHECK(tp.optim.lr == 0.001);
  CHECK(tp.plan.configs[2].name == "Small");

  ExperimentConfig mlp_cfg = parse_config(
      "task = clusters\n"
      "model = mlp\n"
      "mlp.hidden = 8\n"
      "data.classes = 3\n"
      "data.dim = 6\n"
      "data.n_train = 32\n"
      "data.n_eval = 16\n");
  CHECK(make_model(mlp_cfg)->kind() == "mlp");
  CHECK(make_dataset(mlp_cfg).kind == "clusters");
}

TEST_CASE("model/task pairings are validated") {
  CHECK_THROWS_AS(make_model(parse_config("model = mlp\n")), ConfigError);
  CHECK_THROWS_AS(
      make_model(parse_config("task = clusters\n")), ConfigError);
  CHECK_THROWS_AS(make_model(parse_config("", {"model=transformer"})),
                  ConfigError);
  CHECK_THROWS_AS(make_dataset(parse_config("", {"task=parity"})),
                  ConfigError);
}

TEST_CASE("plan built from keys follows declaration order") {
  ExperimentConfig cfg = parse_config(
      "plan.configs = Dense,Mid,Tiny\n"
      "plan.Dense.lstm* = 0\n"
      "plan.Dense.fc* = 0\n"
      "plan.Dense.out* = 0\n"
      "plan.Mid.lstm* = 0.5\n"
      "plan.Mid.fc* = 0\n"
      "plan.Mid.out* = 0\n"
      "plan.Tiny.lstm* = 0.9\n"
      "plan.Tiny.fc* = 0.5\n"
      "plan.Tiny.out* = 0.5\n");
  SparsityPlan plan = make_plan(cfg);
  REQUIRE(plan.configs.size() == 3);
  CHECK(plan.configs[0].name == "Dense");
  CHECK(plan.configs[1].name == "Mid");
  CHECK(plan.configs[2].name == "Tiny");
  CHECK(plan.config("Mid").level_for("lstm0.w") == 0.5);
  // A plan whose first config is not all-zero fails validation.
  CHECK_THROWS_AS(make_plan(parse_config(
                      "plan.configs = Dense,Tiny\n"
                      "plan.Dense.lstm* = 0.1\n"
                      "plan.Dense.fc* = 0\n"
                      "plan.Dense.out* = 0\n"
                      "plan.Tiny.lstm* = 0.9\n"
                      "plan.Tiny.fc* = 0\n"
                      "plan.Tiny.out* = 0\n")),
                  ConfigError);
}
