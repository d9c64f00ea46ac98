// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dsnn/data.hpp"
#include "dsnn/model.hpp"
#include "dsnn/trainer.hpp"

namespace dsnn {

// A fully resolved experiment: a flat key=value table (defaults overlaid
// with a config file and command-line overrides). The file grammar is
// documented in docs/config-grammar.txt: one `key = value` per line, `#`
// comments, dotted section names. Unknown keys are rejected at parse time;
// value types are checked when the typed accessors run.
struct ExperimentConfig {
  std::map<std::string, std::string> kv;

  const std::string& get(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
};

/// All defaults: symbol-count task, LSTM model, the standard
/// Large/Medium/Small plan.
ExperimentConfig default_config();

/// Loads a config file over the defaults, then applies `overrides`
/// ("key=value" strings, e.g. from the command line).
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

/// Parses config text over the defaults (empty text = defaults).
ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides = {});

/// Applies an optional config file and then "key=value" overrides on top of
/// an existing config (e.g. the one stored in a checkpoint) with the same
/// key validation as parsing from scratch.
ExperimentConfig apply_config(const ExperimentConfig& base,
                              const std::string& file_path,
                              const std::vector<std::string>& overrides);

/// Canonical `key = value` rendering, sorted by key; parse(dump(c)) == c.
std::string dump_config(const ExperimentConfig& cfg);

std::shared_ptr<Model> make_model(const ExperimentConfig& cfg);
SyntheticDataset make_dataset(const ExperimentConfig& cfg);
SparsityPlan make_plan(const ExperimentConfig& cfg);
TrainPlan make_train_plan(const ExperimentConfig& cfg);

}  // namespace dsnn
