// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "dsnn/errors.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace dsnn {

namespace {

constexpr int kFormatVersion = 1;

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

bool parse_dtype(const std::string& dtype) {
  if (dtype == "f32") return true;
  if (dtype == "f64") return false;
  throw ConfigError("checkpoint.dtype must be f64 or f32, got '" + dtype +
                    "'");
}

std::vector<double> rounded_values(const Tensor& t, bool f32) {
  std::vector<double> v(t.data(), t.data() + t.size());
  if (f32)
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  return v;
}

std::string value_bytes(const std::vector<double>& v, bool f32) {
  std::string out;
  if (f32) {
    out.resize(v.size() * 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      float f = static_cast<float>(v[i]);
      std::memcpy(out.data() + i * 4, &f, 4);
    }
  } else {
    out.resize(v.size() * 8);
    std::memcpy(out.data(), v.data(), out.size());
  }
  return out;
}

std::vector<double> values_from_bytes(const std::string& bytes, bool f32,
                                      std::size_t expect,
                                      const std::string& what) {
  std::size_t unit = f32 ? 4 : 8;
  if (bytes.size() != expect * unit)
    throw IoError("checkpoint payload " + what + ": expected " +
                  std::to_string(expect * unit) + " bytes, got " +
                  std::to_string(bytes.size()));
  std::vector<double> v(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    if (f32) {
      float f;
      std::memcpy(&f, bytes.data() + i * 4, 4);
      v[i] = static_cast<double>(f);
    } else {
      std::memcpy(&v[i], bytes.data() + i * 8, 8);
    }
  }
  return v;
}

class PayloadWriter {
 public:
  explicit PayloadWriter(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& relpath, const std::string& bytes) {
    fs::path full = root_ / relpath;
    fs::create_directories(full.parent_path());
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("cannot write " + full.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + full.string());
    hashes_[relpath] = fnv1a64_hex(bytes);
  }

  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  fs::path root_;
  std::map<std::string, std::string> hashes_;
};

std::string as_string(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> as_bytes(const std::string& s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace

void save_checkpoint(const SuperNetwork& net, const ExperimentConfig& cfg,
                     const std::string& dir, const std::string& trainer) {
  if (!net.model) throw ValueError("save_checkpoint: empty network");
  bool f32 = parse_dtype(cfg.get("checkpoint.dtype"));
  fs::path root(dir);
  fs::create_directories(root);
  for (const char* sub : {"tensors", "ema", "masks", "bsr"})
    fs::remove_all(root / sub);
  fs::remove(root / "manifest.json");

  PayloadWriter out(root);
  const auto& params = net.model->params();

  ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["model_kind"] = net.model->kind();
  manifest["trainer"] = trainer;
  manifest["step"] = net.step;
  manifest["dtype"] = f32 ? "f32" : "f64";

  ordered_json jparams = ordered_json::array();
  for (const auto& p : params) {
    const Tensor& t = p.node->value;
    ordered_json jp;
    jp["name"] = p.name;
    jp["shape"] = t.shape();
    jp["prunable"] = p.prunable;
    jparams.push_back(jp);
    out.write("tensors/" + p.name + ".bin",
              value_bytes(rounded_values(t, f32), f32));
    out.write("ema/" + p.name + ".bin",
              value_bytes(rounded_values(p.ema_shadow, f32), f32));
  }
  manifest["params"] = jparams;

  ordered_json jplan = ordered_json::array();
  for (const auto& sc : net.plan.configs) {
    ordered_json jc;
    jc["name"] = sc.name;
    ordered_json jlv = ordered_json::array();
    for (const auto& [pattern, level] : sc.levels)
      jlv.push_back(ordered_json::array({pattern, level}));
    jc["levels"] = jlv;
    jplan.push_back(jc);
  }
  manifest["plan"] = jplan;

  for (const auto& [config, mask_set] : net.masks)
    for (const auto& [weight, mask] : mask_set)
      out.write("masks/" + config + "/" + weight + ".mask",
                as_string(mask.serialize()));

  // Block-sparse payloads for every masked config beyond the dense one,
  // packed from the rounded values so they match tensors/ bit for bit.
  std::string dense_name =
      net.plan.configs.empty() ? "" : net.plan.configs[0].name;
  for (const auto& [config, mask_set] : net.masks) {
    if (config == dense_name) continue;
    for (const auto& [weight, mask] : mask_set) {
      const Tensor& w = net.model->param(weight).node->value;
      Tensor rounded(w.shape(), rounded_values(w, f32));
      BlockCsrMatrix bsr = BlockCsrMatrix::from_masked_dense(rounded, mask);
      out.write("bsr/" + config + "/" + weight + ".bsr",
                as_string(bsr.serialize()));
    }
  }

  ordered_json jhist = ordered_json::array();
  for (const auto& m : net.history)
    jhist.push_back(ordered_json::array(
        {m.step, m.config, m.loss, m.accuracy, m.sparsity}));
  manifest["history"] = jhist;

  ordered_json jcfg = ordered_json::object();
  for (const auto& [k, v] : cfg.kv) jcfg[k] = v;
  manifest["config"] = jcfg;

  ordered_json jhash = ordered_json::object();
  for (const auto& [rel, hex] : out.hashes()) jhash[rel] = hex;
  manifest["payload_hashes"] = jhash;

  std::ofstream mf(root / "manifest.json", std::ios::binary);
  if (!mf) throw IoError("cannot write " + (root / "manifest.json").string());
  mf << manifest.dump(2) << "\n";
  if (!mf) throw IoError("short write to manifest.json");
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
  fs::path root(dir);
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_file(root / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse manifest.json: " + std::string(e.what()));
  }

  try {
    if (manifest.at("format_version").get<int>() != kFormatVersion)
      throw IoError("unsupported checkpoint format_version");

    LoadedCheckpoint lc;
    for (const auto& [k, v] : manifest.at("config").items())
      lc.config.kv[k] = v.get<std::string>();
    lc.trainer = manifest.at("trainer").get<std::string>();
    bool f32 = parse_dtype(manifest.at("dtype").get<std::string>());

    // Verify every payload against its hash before trusting any of it.
    std::map<std::string, std::string> payload;
    for (const auto& [rel, hex] : manifest.at("payload_hashes").items()) {
      std::string bytes = read_file(root / rel);
      if (fnv1a64_hex(bytes) != hex.get<std::string>())
        throw IoError("checkpoint payload corrupt: " + rel);
      payload[rel] = std::move(bytes);
    }
    auto take = [&](const std::string& rel) -> const std::string& {
      auto it = payload.find(rel);
      if (it == payload.end())
        throw IoError("payload not listed in manifest: " + rel);
      return it->second;
    };

    SparsityPlan plan;
    for (const auto& jc : manifest.at("plan")) {
      SparsityConfig sc;
      sc.name = jc.at("name").get<std::string>();
      for (const auto& jl : jc.at("levels"))
        sc.levels.emplace_back(jl.at(0).get<std::string>(),
                               jl.at(1).get<double>());
      plan.configs.push_back(std::move(sc));
    }

    std::shared_ptr<Model> model = make_model(lc.config);
    if (manifest.at("model_kind").get<std::string>() != model->kind())
      throw IoError("checkpoint model kind does not match its config");
    lc.net = SuperNetwork(model, plan,
                          lc.config.get_u64("pruning.block_height"));
    lc.net.step = manifest.at("step").get<std::size_t>();

    const auto& jparams = manifest.at("params");
    if (jparams.size() != model->params().size())
      throw IoError("checkpoint parameter count does not match model");
    for (const auto& jp : jparams) {
      std::string name = jp.at("name").get<std::string>();
      Parameter& p = model->param(name);
      std::vector<std::size_t> shape =
          jp.at("shape").get<std::vector<std::size_t>>();
      if (shape != p.node->value.shape())
        throw IoError("checkpoint shape mismatch for " + name);
      if (jp.at("prunable").get<bool>() != p.prunable)
        throw IoError("checkpoint prunable flag mismatch for " + name);
      p.node->value = Tensor(
          shape, values_from_bytes(take("tensors/" + name + ".bin"), f32,
                                   p.node->value.size(), "tensors/" + name));
      p.ema_shadow = Tensor(
          shape, values_from_bytes(take("ema/" + name + ".bin"), f32,
                                   p.ema_shadow.size(), "ema/" + name));
    }

    lc.net.masks.clear();
    for (const auto& [rel, bytes] : payload) {
      bool is_mask = rel.rfind("masks/", 0) == 0;
      bool is_bsr = rel.rfind("bsr/", 0) == 0;
      if (!is_mask && !is_bsr) continue;
      std::size_t start = is_mask ? 6 : 4;
      std::size_t slash = rel.find('/', start);
      std::size_t dot = rel.rfind('.');
      if (slash == std::string::npos || dot == std::string::npos ||
          dot <= slash + 1)
        throw IoError("malformed payload path: " + rel);
      std::string config = rel.substr(start, slash - start);
      std::string weight = rel.substr(slash + 1, dot - slash - 1);
      if (is_mask)
        lc.net.masks[config].insert_or_assign(
            weight, BinaryMask::deserialize(as_bytes(bytes)));
      else
        lc.bsr[config].insert_or_assign(
            weight, BlockCsrMatrix::deserialize(as_bytes(bytes)));
    }

    for (const auto& jm : manifest.at("history")) {
      StepMetric m;
      m.step = jm.at(0).get<std::size_t>();
      m.config = jm.at(1).get<std::string>();
      m.loss = jm.at(2).get<double>();
      m.accuracy = jm.at(3).get<double>();
      m.sparsity = jm.at(4).get<double>();
      lc.net.history.push_back(std::move(m));
    }
    return lc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest.json: " + std::string(e.what()));
  }
}

}  // namespace dsnn
