// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "dsnn/tensor.hpp"

namespace dsnn {

// Bit-packed keep/prune mask over a [rows x cols] weight, with block
// structure in units of `block_height` consecutive rows within one column.
// Bit value 1 means the entry is kept. Bit index is r * cols + c, packed
// LSB-first into 64-bit words; trailing bits of the last word stay zero so
// that equality and serialization are canonical. Immutable in spirit: the
// library constructs masks and never mutates them afterwards.
class BinaryMask {
 public:
  BinaryMask() = default;
  /// All-kept mask.
  BinaryMask(std::size_t rows, std::size_t cols, std::size_t block_height);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t block_height() const { return block_height_; }
  std::size_t size() const { return rows_ * cols_; }
  /// ceil(rows / block_height): a final partial block counts as one block.
  std::size_t block_rows() const;
  std::size_t block_count() const { return block_rows() * cols_; }

  bool get(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, bool keep);
  /// Sets all rows of block (block_row, col), clipped to the matrix bottom.
  void set_block(std::size_t block_row, std::size_t col, bool keep);
  bool block_kept(std::size_t block_row, std::size_t col) const {
    return get(block_row * block_height_, col);
  }

  std::size_t zero_count() const;
  /// Number of fully pruned blocks (meaningful on block-structured masks).
  std::size_t pruned_block_count() const;
  double sparsity() const {
    return size() == 0 ? 0.0
                       : static_cast<double>(zero_count()) /
                             static_cast<double>(size());
  }

  /// True iff every block is uniformly kept or uniformly pruned.
  bool is_block_structured() const;

  /// 0/1 tensor of the mask's shape.
  Tensor to_tensor() const;

  /// 16-byte header (ndim=2, rows, cols, block height; u32 little-endian)
  /// followed by the packed bits, LSB-first within each byte.
  std::vector<std::uint8_t> serialize() const;
  static BinaryMask deserialize(const std::vector<std::uint8_t>& bytes);

  bool operator==(const BinaryMask& other) const;
  bool operator!=(const BinaryMask& other) const { return !(*this == other); }

 private:
  std::size_t rows_ = 0, cols_ = 0, block_height_ = 1;
  std::vector<std::uint64_t> words_;
};

/// Elementwise OR of kept bits; shapes and block heights must agree.
BinaryMask mask_union(const std::vector<BinaryMask>& masks);

/// Flips every bit (kept <-> pruned).
BinaryMask mask_complement(const BinaryMask& m);

/// True iff everything pruned by `lower` is also pruned by `higher` — the
/// nesting relation between masks computed from one score table at
/// increasing sparsity.
bool zeros_nested(const BinaryMask& lower, const BinaryMask& higher);

}  // namespace dsnn
