// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dsnn/mask.hpp"
#include "dsnn/tensor.hpp"

namespace dsnn {

// Block-CSR matrix over R x 1 blocks: R consecutive rows within one column,
// so a matrix-vector product touches one input element per block and writes
// R contiguous output rows. If R does not divide the row count, the final
// partial block is zero-padded in `values` but still stores R doubles.
// Immutable after construction.
struct BlockCsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t block_height = 1;
  std::vector<std::uint32_t> row_ptr;  // per block-row, size block_rows + 1
  std::vector<std::uint32_t> col_idx;  // strictly increasing per block-row
  std::vector<double> values;          // block-major, R doubles per block

  std::size_t block_rows() const {
    return (rows + block_height - 1) / block_height;
  }
  std::size_t block_count() const { return col_idx.size(); }

  /// Packs the kept blocks of W∘M. The mask must be block-structured; its
  /// block height becomes R.
  static BlockCsrMatrix from_masked_dense(const Tensor& weight,
                                          const BinaryMask& mask);

  /// Dense reconstruction, bit-exact equal to W∘M.
  Tensor to_dense() const;

  /// y = A*x, deterministic: within each block-row, kept columns are
  /// accumulated in ascending order, exactly the order the dense kernel
  /// visits them (pruned columns contribute exact zeros there, so the two
  /// results agree to the last bit up to zero signs).
  void matvec(const double* x, double* y) const;
  Tensor matvec(const Tensor& x) const;

  /// Header (rows, cols, R, block count; u32 LE) + row_ptr + col_idx +
  /// values, all little-endian.
  std::vector<std::uint8_t> serialize() const;
  static BlockCsrMatrix deserialize(const std::vector<std::uint8_t>& bytes);

  bool operator==(const BlockCsrMatrix& other) const = default;
};

/// Reference kernel: y[r] = sum_c W[r, c] * x[c], ascending c.
Tensor dense_matvec(const Tensor& weight, const Tensor& x);
void dense_matvec(const Tensor& weight, const double* x, double* y);

/// Worker budget for the matvec kernels: DSNN_THREADS when set, else 1.
std::size_t kernel_threads();

struct BenchRow {
  std::size_t size = 0;
  double sparsity = 0.0;
  double dense_ns = 0.0;
  double sparse_ns = 0.0;
  double ratio = 0.0;  // dense_ns / sparse_ns
};

/// Times masked-dense vs block-sparse matvec on random square matrices.
/// Each cell reports the median of `reps` timed runs after a warm-up.
std::vector<BenchRow> bench_speedup(const std::vector<std::size_t>& sizes,
                                    const std::vector<double>& sparsities,
                                    std::size_t block_height,
                                    std::size_t reps = 100);

void write_bench_csv(const std::vector<BenchRow>& table, std::ostream& os);

}  // namespace dsnn
