// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "dsnn/block_sparse.hpp"
#include "dsnn/pruning.hpp"
#include "dsnn/rng.hpp"

namespace {

using namespace dsnn;

struct Fixture {
  Tensor w, x;
  BinaryMask mask;
  BlockCsrMatrix bsr;

  Fixture(std::size_t n, double s, std::size_t r)
      : w({n, n}), x({n}), mask(n, n, r) {
    RngStream rng(derive_seed(42, "bench-fixture"));
    Tensor g({n, n});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.normal();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal();
    mask = get_mask(w, g, s, r);
    bsr = BlockCsrMatrix::from_masked_dense(apply_mask(w, mask), mask);
  }
};

void BM_DenseMatvec(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)),
            static_cast<double>(state.range(1)) / 100.0, 16);
  Tensor masked = apply_mask(f.w, f.mask);
  for (auto _ : state) {
    Tensor y = dense_matvec(masked, f.x);
    benchmark::DoNotOptimize(y.data());
  }
}

void BM_BsrMatvec(benchmark::State& state) {
  Fixture f(static_cast<std::size_t>(state.range(0)),
            static_cast<double>(state.range(1)) / 100.0, 16);
  for (auto _ : state) {
    Tensor y = f.bsr.matvec(f.x);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_DenseMatvec)
    ->ArgsProduct({{256, 512, 1024}, {0, 50, 70, 90}})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BsrMatvec)
    ->ArgsProduct({{256, 512, 1024}, {0, 50, 70, 90}})
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
