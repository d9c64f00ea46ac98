// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "dsnn/config.hpp"
#include "dsnn/trainer.hpp"

namespace dsnn {

// On-disk layout under the checkpoint directory:
//   manifest.json             step, dtype, param table, plan, sampled metric
//                             history, the full experiment config, and an
//                             FNV-1a64 hash per payload file
//   tensors/<param>.bin       raw weight values, little-endian f64 or f32
//   ema/<param>.bin           EMA shadows, same encoding
//   masks/<config>/<w>.mask   bit-packed mask per prunable weight
//   bsr/<config>/<w>.bsr      block-CSR payload for every non-dense config,
//                             packed from the dtype-rounded weights so the
//                             payload always equals the exported dense values
// Optimizer moments and the gradient accumulator are deliberately not
// stored: every training phase starts from a fresh optimizer state.
// Saving the same network twice produces byte-identical directories.

struct LoadedCheckpoint {
  SuperNetwork net;
  ExperimentConfig config;
  std::string trainer;                // which command produced it
  std::map<std::string, BsrSet> bsr;  // config name -> weight -> payload
};

/// Writes `dir` (created if needed; stale checkpoint contents are removed).
/// The dtype comes from the config's checkpoint.dtype (f64 | f32);
/// `trainer` is a free-form label ("pretrain", "dsnn", ...) that comparison
/// reports use as the row type.
void save_checkpoint(const SuperNetwork& net, const ExperimentConfig& cfg,
                     const std::string& dir, const std::string& trainer);

/// Rebuilds the model from the stored config and restores weights, EMA
/// shadows, masks, step counter and history. Every payload is verified
/// against its manifest hash; any mismatch or missing file throws IoError.
LoadedCheckpoint load_checkpoint(const std::string& dir);

}  // namespace dsnn
