// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/data.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dsnn/errors.hpp"

namespace dsnn {

namespace {

void draw_cluster_sample(RngStream& rng, const Tensor& means,
                         std::size_t classes, std::size_t dim, double noise,
                         double* x, std::size_t& label) {
  label = static_cast<std::size_t>(rng.uniform_int(classes));
  for (std::size_t d = 0; d < dim; ++d)
    x[d] = means[label * dim + d] + noise * rng.normal();
}

std::vector<double> draw_count_sequence(RngStream& rng, std::size_t seq_len,
                                        std::size_t vocab,
                                        std::size_t& count_out) {
  std::size_t count = static_cast<std::size_t>(rng.uniform_int(seq_len + 1));
  std::vector<std::size_t> pos(seq_len);
  std::iota(pos.begin(), pos.end(), 0);
  rng.shuffle(pos);
  std::vector<double> seq(seq_len);
  for (std::size_t i = 0; i < seq_len; ++i) {
    if (i < count)
      seq[pos[i]] = 0.0;
    else
      seq[pos[i]] = static_cast<double>(1 + rng.uniform_int(vocab - 1));
  }
  count_out = count;
  return seq;
}

}  // namespace

SyntheticDataset gen_gaussian_clusters(std::uint64_t seed, std::size_t n_train,
                                       std::size_t classes, std::size_t dim,
                                       double noise, std::size_t n_eval) {
  if (classes < 2) throw ValueError("gen_gaussian_clusters: classes < 2");
  if (noise < 0.0) throw ValueError("gen_gaussian_clusters: negative noise");
  if (dim < classes - 1)
    throw ValueError("gen_gaussian_clusters: dim " + std::to_string(dim) +
                     " cannot separate " + std::to_string(classes) +
                     " class means");
  RngStream rng(derive_seed(seed, "clusters"));
  SyntheticDataset ds;
  ds.kind = "clusters";
  ds.classes = classes;
  ds.feature_dim = dim;
  ds.means = Tensor({classes, dim});
  for (std::size_t c = 0; c < classes; ++c) {
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        ds.means[c * dim + d] = rng.normal();
        norm += ds.means[c * dim + d] * ds.means[c * dim + d];
      }
      norm = std::sqrt(norm);
    }
    for (std::size_t d = 0; d < dim; ++d) ds.means[c * dim + d] /= norm;
  }
  ds.train_x = Tensor({n_train, dim});
  ds.train_y.resize(n_train);
  for (std::size_t i = 0; i < n_train; ++i)
    draw_cluster_sample(rng, ds.means, classes, dim, noise,
                        ds.train_x.data() + i * dim, ds.train_y[i]);
  ds.eval_x = Tensor({n_eval, dim});
  ds.eval_y.resize(n_eval);
  for (std::size_t i = 0; i < n_eval; ++i)
    draw_cluster_sample(rng, ds.means, classes, dim, noise,
                        ds.eval_x.data() + i * dim, ds.eval_y[i]);
  return ds;
}

SyntheticDataset gen_symbol_count(std::uint64_t seed, std::size_t n_train,
                                  std::size_t seq_len, std::size_t vocab,
                                  std::size_t classes, std::size_t n_eval) {
  if (seq_len < 2) throw ValueError("gen_symbol_count: seq_len < 2");
  if (vocab < 2) throw ValueError("gen_symbol_count: vocab < 2");
  if (classes < 2) throw ValueError("gen_symbol_count: classes < 2");
  RngStream rng(derive_seed(seed, "symbol-count"));
  SyntheticDataset ds;
  ds.kind = "symbol-count";
  ds.classes = classes;
  ds.feature_dim = seq_len;
  ds.vocab = vocab;
  ds.train_x = Tensor({n_train, seq_len});
  ds.train_y.resize(n_train);
  std::set<std::vector<double>> train_set;
  for (std::size_t i = 0; i < n_train; ++i) {
    std::size_t count;
    std::vector<double> seq = draw_count_sequence(rng, seq_len, vocab, count);
    for (std::size_t t = 0; t < seq_len; ++t)
      ds.train_x[i * seq_len + t] = seq[t];
    ds.train_y[i] = count % classes;
    train_set.insert(std::move(seq));
  }
  ds.eval_x = Tensor({n_eval, seq_len});
  ds.eval_y.resize(n_eval);
  std::size_t attempts_left = 100 + 10 * n_eval;
  for (std::size_t i = 0; i < n_eval; ++i) {
    for (;;) {
      if (attempts_left-- == 0)
        throw ValueError(
            "gen_symbol_count: cannot draw an eval split disjoint from "
            "train; enlarge seq_len or vocab");
      std::size_t count;
      std::vector<double> seq =
          draw_count_sequence(rng, seq_len, vocab, count);
      if (train_set.count(seq)) continue;
      for (std::size_t t = 0; t < seq_len; ++t)
        ds.eval_x[i * seq_len + t] = seq[t];
      ds.eval_y[i] = count % classes;
      break;
    }
  }
  return ds;
}

std::size_t symbol_count_label(const double* seq, std::size_t seq_len,
                               std::size_t classes) {
  std::size_t count = 0;
  for (std::size_t t = 0; t < seq_len; ++t)
    if (seq[t] == 0.0) ++count;
  return count % classes;
}

Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  Tensor t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes)
      throw ValueError("one_hot: label " + std::to_string(labels[i]) +
                       " out of range");
    t[i * classes + labels[i]] = 1.0;
  }
  return t;
}

Batch make_batch(const Tensor& x, const std::vector<std::size_t>& y,
                 const std::vector<std::size_t>& indices,
                 std::size_t classes) {
  std::size_t dim = x.cols();
  Batch b;
  b.x = Tensor({indices.size(), dim});
  b.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::size_t src = indices[i];
    for (std::size_t d = 0; d < dim; ++d)
      b.x[i * dim + d] = x[src * dim + d];
    b.labels[i] = y[src];
  }
  b.targets = one_hot(b.labels, classes);
  return b;
}

BatchSampler::BatchSampler(const SyntheticDataset& ds, std::size_t batch_size,
                           std::uint64_t seed)
    : ds_(&ds), batch_size_(batch_size), rng_(derive_seed(seed, "batches")) {
  if (batch_size == 0) throw ValueError("BatchSampler: batch size 0");
  if (ds.train_y.size() < batch_size)
    throw ValueError("BatchSampler: train split smaller than one batch");
  order_.resize(ds.train_y.size());
  std::iota(order_.begin(), order_.end(), 0);
  pos_ = order_.size();  // force a shuffle on first use
}

Batch BatchSampler::next() {
  if (pos_ + batch_size_ > order_.size()) {
    rng_.shuffle(order_);
    pos_ = 0;
  }
  std::vector<std::size_t> idx(order_.begin() + pos_,
                               order_.begin() + pos_ + batch_size_);
  pos_ += batch_size_;
  return make_batch(ds_->train_x, ds_->train_y, idx, ds_->classes);
}

void dump_split_csv(const Tensor& x, const std::vector<std::size_t>& y,
                    const std::string& features_path,
                    const std::string& labels_path) {
  std::ofstream fx(features_path);
  if (!fx) throw IoError("cannot open " + features_path);
  fx.precision(17);
  std::size_t dim = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      if (d) fx << ",";
      fx << x[i * dim + d];
    }
    fx << "\n";
  }
  std::ofstream fy(labels_path);
  if (!fy) throw IoError("cannot open " + labels_path);
  for (std::size_t label : y) fy << label << "\n";
}

std::pair<Tensor, std::vector<std::size_t>> load_split_csv(
    const std::string& features_path, const std::string& labels_path) {
  std::ifstream fx(features_path);
  if (!fx) throw IoError("cannot open " + features_path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(fx, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t this_cols = 0;
    while (std::getline(ss, cell, ',')) {
      data.push_back(std::stod(cell));
      ++this_cols;
    }
    if (cols == 0)
      cols = this_cols;
    else if (cols != this_cols)
      throw IoError(features_path + ": ragged row " + std::to_string(rows));
    ++rows;
  }
  if (rows == 0) throw IoError(features_path + ": empty");
  std::ifstream fy(labels_path);
  if (!fy) throw IoError("cannot open " + labels_path);
  std::vector<std::size_t> labels;
  while (std::getline(fy, line)) {
    if (line.empty()) continue;
    labels.push_back(static_cast<std::size_t>(std::stoull(line)));
  }
  if (labels.size() != rows)
    throw IoError(labels_path + ": " + std::to_string(labels.size()) +
                  " labels for " + std::to_string(rows) + " rows");
  return {Tensor({rows, cols}, std::move(data)), std::move(labels)};
}

}  // namespace dsnn
