// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dsnn/errors.hpp"

namespace dsnn {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// plan.<name>.<pattern>; the pattern may itself contain dots, the config
// name may not.
bool split_plan_key(const std::string& key, std::string& name,
                    std::string& pattern) {
  if (key.rfind("plan.", 0) != 0 || key == "plan.configs") return false;
  std::size_t dot = key.find('.', 5);
  if (dot == std::string::npos || dot == 5 || dot + 1 >= key.size())
    return false;
  name = key.substr(5, dot - 5);
  pattern = key.substr(dot + 1);
  return true;
}

const std::map<std::string, std::string>& default_kv() {
  static const std::map<std::string, std::string> defaults = {
      {"task", "symbol-count"},
      {"model", "lstm"},
      {"seed", "1"},
      {"data.n_train", "4096"},
      {"data.n_eval", "1000"},
      {"data.classes", "3"},
      {"data.dim", "64"},
      {"data.noise", "0.3"},
      {"data.seq_len", "8"},
      {"data.vocab", "8"},
      {"mlp.hidden", "256"},
      {"lstm.hidden", "128"},
      {"lstm.projection", "32"},
      {"pruning.block_height", "4"},
      {"pruning.min_prunable_elems", "8192"},
      {"train.pretrain_steps", "1000"},
      {"train.total_steps", "10000"},
      {"train.freeze_steps", "1000"},
      {"train.refresh_every", "100"},
      {"train.ramp_steps", "2000"},
      {"train.batch_size", "32"},
      {"train.distillation", "true"},
      {"train.lazy_update", "true"},
      {"train.mix_ground_truth", "false"},
      {"train.ema_decay", "0.999"},
      {"optim.lr", "0.001"},
      {"optim.beta1", "0.9"},
      {"optim.beta2", "0.999"},
      {"optim.eps", "1e-8"},
      {"optim.warmup_steps", "0"},
      {"checkpoint.dtype", "f64"},
      {"plan.configs", "Large,Medium,Small"},
      {"plan.Large.lstm*", "0"},
      {"plan.Large.fc*", "0"},
      {"plan.Large.out*", "0"},
      {"plan.Medium.lstm*", "0.70"},
      {"plan.Medium.fc*", "0"},
      {"plan.Medium.out*", "0"},
      {"plan.Small.lstm*", "0.90"},
      {"plan.Small.fc*", "0.50"},
      {"plan.Small.out*", "0.50"},
  };
  return defaults;
}

bool is_fixed_key(const std::string& key) {
  if (key == "plan.configs") return true;
  if (key.rfind("plan.", 0) == 0) return false;
  return default_kv().count(key) != 0;
}

struct ConfigLine {
  std::string key, value;
  std::string loc;  // "<source>:<line>", kept so later checks cite it
};

std::vector<ConfigLine> parse_pairs(const std::string& text,
                                    const std::string& where) {
  std::vector<ConfigLine> pairs;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    std::string loc = where + ":" + std::to_string(line_no);
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(loc + ": expected key = value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(loc + ": empty key or value");
    pairs.push_back({std::move(key), std::move(value), std::move(loc)});
  }
  return pairs;
}

ExperimentConfig apply_pairs(std::map<std::string, std::string> base,
                             const std::vector<ConfigLine>& pairs) {
  ExperimentConfig cfg;
  cfg.kv = std::move(base);

  // plan.configs first (last assignment wins), so per-config level keys can
  // be validated regardless of their position in the file.
  for (const auto& [key, value, loc] : pairs) {
    if (key != "plan.configs") continue;
    std::vector<std::string> names = split_list(value);
    if (names.empty()) throw ConfigError(loc + ": plan.configs: empty list");
    for (const auto& n : names) {
      bool ok = !n.empty();
      for (char c : n)
        ok = ok && (std::isalnum(static_cast<unsigned char>(c)) ||
                    c == '_' || c == '-');
      if (!ok)
        throw ConfigError(loc + ": config name '" + n +
                          "' must match [A-Za-z0-9_-]+");
    }
    for (auto it = cfg.kv.begin(); it != cfg.kv.end();) {
      std::string name, pattern;
      if (split_plan_key(it->first, name, pattern) &&
          std::find(names.begin(), names.end(), name) == names.end())
        it = cfg.kv.erase(it);
      else
        ++it;
    }
    cfg.kv["plan.configs"] = value;
  }

  std::vector<std::string> names = split_list(cfg.kv.at("plan.configs"));
  for (const auto& [key, value, loc] : pairs) {
    if (key == "plan.configs") continue;
    std::string name, pattern;
    if (split_plan_key(key, name, pattern)) {
      if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError(loc + ": unknown key '" + key + "' (config '" +
                          name + "' is not in plan.configs)");
    } else if (!is_fixed_key(key)) {
      throw ConfigError(loc + ": unknown key '" + key + "'");
    }
    cfg.kv[key] = value;
  }
  return cfg;
}

}  // namespace

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v +
                      "' is not a non-negative integer");
  }
}

double ExperimentConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v +
                    "'");
}

static std::vector<ConfigLine> file_and_override_pairs(
    const std::string& file_path, const std::vector<std::string>& overrides) {
  std::vector<ConfigLine> pairs;
  if (!file_path.empty()) {
    std::ifstream in(file_path);
    if (!in) throw IoError("cannot open config file " + file_path);
    std::stringstream ss;
    ss << in.rdbuf();
    pairs = parse_pairs(ss.str(), file_path);
  }
  for (const auto& ov : overrides) {
    auto extra = parse_pairs(ov, "<override>");
    pairs.insert(pairs.end(), extra.begin(), extra.end());
  }
  return pairs;
}

ExperimentConfig default_config() { return apply_pairs(default_kv(), {}); }

ExperimentConfig parse_config(const std::string& text,
                              const std::vector<std::string>& overrides) {
  auto pairs = parse_pairs(text, "<config>");
  for (const auto& ov : overrides) {
    auto extra = parse_pairs(ov, "<override>");
    pairs.insert(pairs.end(), extra.begin(), extra.end());
  }
  return apply_pairs(default_kv(), pairs);
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  return apply_pairs(default_kv(), file_and_override_pairs(path, overrides));
}

ExperimentConfig apply_config(const ExperimentConfig& base,
                              const std::string& file_path,
                              const std::vector<std::string>& overrides) {
  return apply_pairs(base.kv, file_and_override_pairs(file_path, overrides));
}

std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& [key, value] : cfg.kv) os << key << " = " << value << "\n";
  return os.str();
}

std::shared_ptr<Model> make_model(const ExperimentConfig& cfg) {
  const std::string& task = cfg.get("task");
  const std::string& model = cfg.get("model");
  std::uint64_t seed = cfg.get_u64("seed");
  std::size_t classes = cfg.get_u64("data.classes");
  if (model == "mlp") {
    if (task != "clusters")
      throw ConfigError("model mlp requires task = clusters");
    return std::make_shared<MlpModel>(seed, cfg.get_u64("data.dim"),
                                      cfg.get_u64("mlp.hidden"), classes);
  }
  if (model == "lstm") {
    if (task != "symbol-count")
      throw ConfigError("model lstm requires task = symbol-count");
    return std::make_shared<LstmModel>(
        seed, cfg.get_u64("data.vocab"), cfg.get_u64("lstm.hidden"),
        cfg.get_u64("lstm.projection"), classes,
        cfg.get_u64("pruning.min_prunable_elems"));
  }
  throw ConfigError("unknown model '" + model + "' (expected mlp or lstm)");
}

SyntheticDataset make_dataset(const ExperimentConfig& cfg) {
  const std::string& task = cfg.get("task");
  std::uint64_t seed = cfg.get_u64("seed");
  std::size_t n_train = cfg.get_u64("data.n_train");
  std::size_t n_eval = cfg.get_u64("data.n_eval");
  std::size_t classes = cfg.get_u64("data.classes");
  if (task == "clusters")
    return gen_gaussian_clusters(seed, n_train, classes,
                                 cfg.get_u64("data.dim"),
                                 cfg.get_double("data.noise"), n_eval);
  if (task == "symbol-count")
    return gen_symbol_count(seed, n_train, cfg.get_u64("data.seq_len"),
                            cfg.get_u64("data.vocab"), classes, n_eval);
  throw ConfigError("unknown task '" + task +
                    "' (expected clusters or symbol-count)");
}

SparsityPlan make_plan(const ExperimentConfig& cfg) {
  SparsityPlan plan;
  for (const std::string& name : split_list(cfg.get("plan.configs"))) {
    SparsityConfig sc;
    sc.name = name;
    std::string prefix = "plan." + name + ".";
    for (const auto& [key, value] : cfg.kv) {
      if (key.rfind(prefix, 0) != 0) continue;
      sc.levels.emplace_back(key.substr(prefix.size()),
                             cfg.get_double(key));
    }
    plan.configs.push_back(std::move(sc));
  }
  plan.validate();
  return plan;
}

TrainPlan make_train_plan(const ExperimentConfig& cfg) {
  TrainPlan tp;
  tp.plan = make_plan(cfg);
  tp.total_steps = cfg.get_u64("train.total_steps");
  tp.freeze_steps = cfg.get_u64("train.freeze_steps");
  tp.refresh_every = cfg.get_u64("train.refresh_every");
  tp.ramp_steps = cfg.get_u64("train.ramp_steps");
  tp.block_height = cfg.get_u64("pruning.block_height");
  tp.batch_size = cfg.get_u64("train.batch_size");
  tp.optim.lr = cfg.get_double("optim.lr");
  tp.optim.beta1 = cfg.get_double("optim.beta1");
  tp.optim.beta2 = cfg.get_double("optim.beta2");
  tp.optim.eps = cfg.get_double("optim.eps");
  tp.optim.warmup_steps = cfg.get_u64("optim.warmup_steps");
  tp.ema_decay = cfg.get_double("train.ema_decay");
  tp.seed = cfg.get_u64("seed");
  tp.distillation = cfg.get_bool("train.distillation");
  tp.lazy_update = cfg.get_bool("train.lazy_update");
  tp.mix_ground_truth = cfg.get_bool("train.mix_ground_truth");
  tp.validate();
  return tp;
}

}  // namespace dsnn
