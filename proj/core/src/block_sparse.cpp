// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/block_sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ostream>
#include <string>
#include <thread>

#include "dsnn/errors.hpp"
#include "dsnn/pruning.hpp"
#include "dsnn/rng.hpp"

namespace dsnn {

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

// Runs fn(lo, hi) over a partition of [0, total) using the worker budget;
// each range is written by exactly one worker, so results do not depend on
// the thread count.
template <typename Fn>
void parallel_ranges(std::size_t total, const Fn& fn) {
  std::size_t workers = std::min(kernel_threads(), total);
  if (workers <= 1) {
    fn(std::size_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

std::size_t kernel_threads() {
  const char* env = std::getenv("DSNN_THREADS");
  if (!env || !*env) return 1;
  long v = std::strtol(env, nullptr, 10);
  return v > 1 ? static_cast<std::size_t>(v) : 1;
}

BlockCsrMatrix BlockCsrMatrix::from_masked_dense(const Tensor& weight,
                                                 const BinaryMask& mask) {
  if (weight.ndim() != 2 || weight.rows() != mask.rows() ||
      weight.cols() != mask.cols())
    throw ShapeError("from_masked_dense: weight " + weight.shape_str() +
                     " does not match mask");
  if (!mask.is_block_structured())
    throw ValueError("from_masked_dense: mask is not block-aligned");
  BlockCsrMatrix a;
  a.rows = weight.rows();
  a.cols = weight.cols();
  a.block_height = mask.block_height();
  std::size_t n = a.cols, R = a.block_height;
  a.row_ptr.reserve(a.block_rows() + 1);
  a.row_ptr.push_back(0);
  for (std::size_t br = 0; br < a.block_rows(); ++br) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!mask.block_kept(br, c)) continue;
      a.col_idx.push_back(static_cast<std::uint32_t>(c));
      for (std::size_t i = 0; i < R; ++i) {
        std::size_t r = br * R + i;
        a.values.push_back(r < a.rows ? weight[r * n + c] : 0.0);
      }
    }
    a.row_ptr.push_back(static_cast<std::uint32_t>(a.col_idx.size()));
  }
  return a;
}

Tensor BlockCsrMatrix::to_dense() const {
  Tensor out({rows, cols});
  std::size_t R = block_height;
  for (std::size_t br = 0; br < block_rows(); ++br) {
    for (std::uint32_t k = row_ptr[br]; k < row_ptr[br + 1]; ++k) {
      std::size_t c = col_idx[k];
      for (std::size_t i = 0; i < R; ++i) {
        std::size_t r = br * R + i;
        if (r < rows) out[r * cols + c] = values[k * R + i];
      }
    }
  }
  return out;
}

void BlockCsrMatrix::matvec(const double* x, double* y) const {
  std::size_t R = block_height;
  parallel_ranges(block_rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t br = lo; br < hi; ++br) {
      std::size_t r0 = br * R;
      std::size_t seg = std::min(R, rows - r0);
      for (std::size_t i = 0; i < seg; ++i) y[r0 + i] = 0.0;
      for (std::uint32_t k = row_ptr[br]; k < row_ptr[br + 1]; ++k) {
        double xv = x[col_idx[k]];
        const double* block = values.data() + static_cast<std::size_t>(k) * R;
        for (std::size_t i = 0; i < seg; ++i) y[r0 + i] += block[i] * xv;
      }
    }
  });
}

Tensor BlockCsrMatrix::matvec(const Tensor& x) const {
  if (x.size() != cols)
    throw ShapeError("bsr matvec: x length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(cols));
  Tensor y({rows});
  matvec(x.data(), y.data());
  return y;
}

std::vector<std::uint8_t> BlockCsrMatrix::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * (row_ptr.size() + col_idx.size()) +
              8 * values.size());
  append_u32(out, static_cast<std::uint32_t>(rows));
  append_u32(out, static_cast<std::uint32_t>(cols));
  append_u32(out, static_cast<std::uint32_t>(block_height));
  append_u32(out, static_cast<std::uint32_t>(block_count()));
  for (std::uint32_t v : row_ptr) append_u32(out, v);
  for (std::uint32_t v : col_idx) append_u32(out, v);
  for (double d : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    for (int s = 0; s < 64; s += 8)
      out.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  return out;
}

BlockCsrMatrix BlockCsrMatrix::deserialize(
    const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw IoError("bsr payload: truncated header");
  BlockCsrMatrix a;
  a.rows = read_u32(bytes.data());
  a.cols = read_u32(bytes.data() + 4);
  a.block_height = read_u32(bytes.data() + 8);
  std::uint32_t blocks = read_u32(bytes.data() + 12);
  if (a.rows == 0 || a.cols == 0 || a.block_height == 0)
    throw IoError("bsr payload: bad header");
  std::size_t expect = 16 + 4 * (a.block_rows() + 1) +
                       4 * static_cast<std::size_t>(blocks) +
                       8 * static_cast<std::size_t>(blocks) * a.block_height;
  if (bytes.size() != expect)
    throw IoError("bsr payload: expected " + std::to_string(expect) +
                  " bytes, got " + std::to_string(bytes.size()));
  const std::uint8_t* p = bytes.data() + 16;
  a.row_ptr.resize(a.block_rows() + 1);
  for (auto& v : a.row_ptr) {
    v = read_u32(p);
    p += 4;
  }
  a.col_idx.resize(blocks);
  for (auto& v : a.col_idx) {
    v = read_u32(p);
    p += 4;
  }
  a.values.resize(static_cast<std::size_t>(blocks) * a.block_height);
  for (auto& d : a.values) {
    std::uint64_t bits = 0;
    for (int s = 0; s < 64; s += 8)
      bits |= static_cast<std::uint64_t>(*p++) << s;
    std::memcpy(&d, &bits, 8);
  }
  if (a.row_ptr.front() != 0 || a.row_ptr.back() != blocks)
    throw IoError("bsr payload: inconsistent row pointers");
  return a;
}

Tensor dense_matvec(const Tensor& weight, const Tensor& x) {
  if (x.size() != weight.cols())
    throw ShapeError("dense_matvec: x length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(weight.cols()));
  Tensor y({weight.rows()});
  dense_matvec(weight, x.data(), y.data());
  return y;
}

void dense_matvec(const Tensor& weight, const double* x, double* y) {
  std::size_t m = weight.rows(), n = weight.cols();
  const double* w = weight.data();
  parallel_ranges(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      double acc = 0.0;
      const double* row = w + r * n;
      for (std::size_t c = 0; c < n; ++c) acc += row[c] * x[c];
      y[r] = acc;
    }
  });
}

std::vector<BenchRow> bench_speedup(const std::vector<std::size_t>& sizes,
                                    const std::vector<double>& sparsities,
                                    std::size_t block_height,
                                    std::size_t reps) {
  if (reps < 100) reps = 100;
  std::vector<BenchRow> table;
  RngStream rng(derive_seed(20260815, "bench"));
  for (std::size_t size : sizes) {
    for (double s : sparsities) {
      Tensor w({size, size});
      Tensor g({size, size});
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = rng.normal();
        g[i] = rng.normal();
      }
      BinaryMask mask = get_mask(w, g, s, block_height);
      Tensor masked = apply_mask(w, mask);
      BlockCsrMatrix bsr = BlockCsrMatrix::from_masked_dense(w, mask);
      Tensor x({size});
      for (std::size_t i = 0; i < size; ++i) x[i] = rng.normal();
      Tensor y({size});

      auto time_median = [&](auto&& kernel) {
        for (int i = 0; i < 5; ++i) kernel();  // warm-up
        std::vector<double> ns(reps);
        for (std::size_t i = 0; i < reps; ++i) {
          auto t0 = std::chrono::steady_clock::now();
          kernel();
          auto t1 = std::chrono::steady_clock::now();
          ns[i] = std::chrono::duration<double, std::nano>(t1 - t0).count();
        }
        std::sort(ns.begin(), ns.end());
        return ns[reps / 2];
      };

      BenchRow row;
      row.size = size;
      row.sparsity = s;
      row.dense_ns =
          time_median([&] { dense_matvec(masked, x.data(), y.data()); });
      row.sparse_ns = time_median([&] { bsr.matvec(x.data(), y.data()); });
      row.ratio = row.dense_ns / row.sparse_ns;
      table.push_back(row);
    }
  }
  return table;
}

void write_bench_csv(const std::vector<BenchRow>& table, std::ostream& os) {
  os << "size,sparsity,dense_ns,sparse_ns,ratio\n";
  for (const auto& r : table)
    os << r.size << "," << r.sparsity << "," << r.dense_ns << ","
       << r.sparse_ns << "," << r.ratio << "\n";
}

}  // namespace dsnn
