// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dsnn {

// Deterministic random stream used everywhere randomness is needed.
//
// The engine is std::mt19937_64, whose output sequence is fully specified by
// the C++ standard. The floating-point mappings below are implemented by hand
// because std::uniform_real_distribution / std::normal_distribution are
// implementation-defined and would break cross-platform reproducibility.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only, one draw per call
  /// consumes exactly two engine outputs).
  double normal();

  /// Unbiased integer in [0, n), n > 0. Rejection sampling on the top range.
  std::uint64_t uniform_int(std::uint64_t n);

  /// Fisher-Yates shuffle driven by uniform_int.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// Derives an independent stream seed from a base seed and a label, so that
/// e.g. weight init and batch order use unrelated streams. FNV-1a over the
/// label, mixed with the base seed through a splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace dsnn
