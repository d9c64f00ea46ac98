// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsnn/rng.hpp"
#include "dsnn/tensor.hpp"

namespace dsnn {

// Fully synthetic classification data, reproducible from the seed alone.
// Two generators: "clusters" (Gaussian blobs around unit-sphere means, for
// the MLP) and "symbol-count" (label = count of token 0 mod classes, a
// sequence task for the LSTM). Train and eval splits are drawn separately
// and kept disjoint.
struct SyntheticDataset {
  std::string kind;         // "clusters" | "symbol-count"
  std::size_t classes = 0;
  std::size_t feature_dim = 0;  // clusters: dim; symbol-count: seq_len
  std::size_t vocab = 0;        // symbol-count only
  Tensor train_x;               // [n_train x feature_dim]
  std::vector<std::size_t> train_y;
  Tensor eval_x;                // [n_eval x feature_dim]
  std::vector<std::size_t> eval_y;
  Tensor means;                 // clusters only: [classes x dim]
};

/// Class means are independent Gaussian directions normalized onto the unit
/// hypersphere; samples are mean + noise * N(0, I), labeled by their mean
/// (the nearest mean when noise is 0). Rejects dim < classes - 1.
SyntheticDataset gen_gaussian_clusters(std::uint64_t seed, std::size_t n_train,
                                       std::size_t classes, std::size_t dim,
                                       double noise,
                                       std::size_t n_eval = 1000);

/// Sequences of token ids in [0, vocab). The count of token 0 is uniform on
/// {0..seq_len} (placed at shuffled positions, remaining slots filled from
/// {1..vocab-1}); label = count mod classes. Labels are exactly uniform when
/// (seq_len + 1) is a multiple of classes. Eval sequences are re-drawn until
/// distinct from every train sequence.
SyntheticDataset gen_symbol_count(std::uint64_t seed, std::size_t n_train,
                                  std::size_t seq_len, std::size_t vocab,
                                  std::size_t classes,
                                  std::size_t n_eval = 1000);

/// Label rule of the symbol-count task, usable as an oracle.
std::size_t symbol_count_label(const double* seq, std::size_t seq_len,
                               std::size_t classes);

struct Batch {
  Tensor x;        // [B x feature_dim]
  Tensor targets;  // one-hot [B x classes]
  std::vector<std::size_t> labels;
};

Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes);

Batch make_batch(const Tensor& x, const std::vector<std::size_t>& y,
                 const std::vector<std::size_t>& indices,
                 std::size_t classes);

// Deterministic shuffled mini-batches over the train split. Every epoch is
// one Fisher-Yates shuffle of the index range; a trailing remainder smaller
// than the batch size is dropped so batch boundaries are stable.
class BatchSampler {
 public:
  BatchSampler(const SyntheticDataset& ds, std::size_t batch_size,
               std::uint64_t seed);
  Batch next();

 private:
  const SyntheticDataset* ds_;
  std::size_t batch_size_;
  RngStream rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

/// Debug dump: one CSV row per sample, plus one label per line in a second
/// file.
void dump_split_csv(const Tensor& x, const std::vector<std::size_t>& y,
                    const std::string& features_path,
                    const std::string& labels_path);
std::pair<Tensor, std::vector<std::size_t>> load_split_csv(
    const std::string& features_path, const std::string& labels_path);

}  // namespace dsnn
