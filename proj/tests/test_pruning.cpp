// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "dsnn/errors.hpp"
#include "dsnn/mask.hpp"
#include "dsnn/pruning.hpp"
#include "dsnn/rng.hpp"
#include "dsnn/tensor.hpp"

using namespace dsnn;

TEST_CASE("block scores sum |w*g| over R consecutive rows per column") {
  // 4x2 weight, R=2 -> two block rows. Hand-computed saliencies.
  Tensor w({4, 2}, {1.0, 4.0, 1.0, 4.0, 3.0, 0.1, 3.0, 0.1});
  Tensor g = Tensor::full({4, 2}, 1.0);
  Tensor s = block_scores(w, g, 2);
  REQUIRE(s.shape() == std::vector<std::size_t>({2, 2}));
  CHECK(s.at(0, 0) == 2.0);  // |1|+|1|, exact in binary
  CHECK(s.at(0, 1) == 8.0);  // |4|+|4|
  CHECK(s.at(1, 0) == 6.0);  // |3|+|3|
  CHECK(s.at(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("block scores weight gradient magnitudes, signs ignored") {
  Tensor w({2, 2}, {2.0, -0.5, 1.0, -3.0});
  Tensor g({2, 2}, {0.1, 2.0, 0.3, 0.05});
  Tensor s = block_scores(w, g, 1);
  CHECK(s.at(0, 0) == doctest::Approx(0.2));
  CHECK(s.at(0, 1) == doctest::Approx(1.0));
  CHECK(s.at(1, 0) == doctest::Approx(0.3));
  CHECK(s.at(1, 1) == doctest::Approx(0.15));
}

TEST_CASE("partial bottom block scored over its actual rows") {
  // 3 rows, R=2: second block row covers only row 2.
  Tensor w({3, 1}, {1.0, 1.0, 5.0});
  Tensor g = Tensor::full({3, 1}, 1.0);
  Tensor s = block_scores(w, g, 2);
  REQUIRE(s.shape() == std::vector<std::size_t>({2, 1}));
  CHECK(s.at(0, 0) == doctest::Approx(2.0));
  CHECK(s.at(1, 0) == doctest::Approx(5.0));
}

TEST_CASE("mask prunes exactly the lowest-scoring blocks") {
  // Scores {0.2, 1.0, 0.3, 0.15} at S=0.5 over 4 blocks -> prune the two
  // smallest: flat indices 3 (0.15) and 0 (0.2). Kept: (0,1) and (1,0).
  Tensor w({2, 2}, {2.0, -0.5, 1.0, -3.0});
  Tensor g({2, 2}, {0.1, 2.0, 0.3, 0.05});
  BinaryMask m = get_mask(w, g, 0.5, 1);
  CHECK_FALSE(m.get(0, 0));
  CHECK(m.get(0, 1));
  CHECK(m.get(1, 0));
  CHECK_FALSE(m.get(1, 1));
  CHECK(m.pruned_block_count() == 2);
}

TEST_CASE("prune count floors with an epsilon guard") {
  CHECK(prune_count(0.0, 10) == 0);
  CHECK(prune_count(0.5, 10) == 5);
  // 0.7 * 10 = 6.999... in binary; must still count as 7.
  CHECK(prune_count(0.7, 10) == 7);
  CHECK(prune_count(0.9, 10) == 9);
  CHECK(prune_count(0.75, 7) == 5);   // floor(5.25)
  CHECK(prune_count(0.36, 100) == 36);
  CHECK(prune_count(0.999, 1) == 0);  // never prunes the whole tensor at S<1
}

TEST_CASE("ties broken by lower flat block index") {
  // All scores equal: pruning half of a 2x2 score table must drop flat
  // indices 0 and 1 (block row 0), keeping block row 1.
  Tensor w = Tensor::full({2, 2}, 1.0);
  Tensor g = Tensor::full({2, 2}, 1.0);
  BinaryMask m = get_mask(w, g, 0.5, 1);
  CHECK_FALSE(m.get(0, 0));
  CHECK_FALSE(m.get(0, 1));
  CHECK(m.get(1, 0));
  CHECK(m.get(1, 1));
}

TEST_CASE("cubic ramp hits hand-computed waypoints and saturates") {
  const double S = 0.8;
  CHECK(cubic_sparsity(0, 1000, S) == doctest::Approx(0.0));
  // t = T/2: S * (1 - 0.5^3) = 0.875 S.
  CHECK(cubic_sparsity(500, 1000, S) == doctest::Approx(0.875 * S));
  CHECK(cubic_sparsity(1000, 1000, S) == doctest::Approx(S));
  CHECK(cubic_sparsity(5000, 1000, S) == doctest::Approx(S));  // clamped
  // Monotone non-decreasing along the ramp.
  double prev = -1.0;
  for (std::size_t t = 0; t <= 1000; t += 25) {
    double s = cubic_sparsity(t, 1000, S);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("masks from one score table nest as sparsity grows") {
  RngStream rng(derive_seed(7, "nesting"));
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t rows = 1 + rng.uniform_int(24);
    std::size_t cols = 1 + rng.uniform_int(12);
    std::size_t R = 1 + rng.uniform_int(4);
    std::vector<double> wv(rows * cols), gv(rows * cols);
    for (auto& v : wv) v = rng.normal();
    for (auto& v : gv) v = rng.normal();
    Tensor w({rows, cols}, wv);
    Tensor g({rows, cols}, gv);
    double s_lo = rng.uniform(0.0, 0.9);
    double s_hi = rng.uniform(s_lo, 0.999);
    BinaryMask lo = get_mask(w, g, s_lo, R);
    BinaryMask hi = get_mask(w, g, s_hi, R);
    CHECK(zeros_nested(lo, hi));
  }
}

TEST_CASE("refreshed masks can revive blocks pruned earlier") {
  // Step 1: column 0 is weakest and gets pruned. Step 2: new gradients make
  // column 1 the weakest; a fresh mask must bring column 0 back.
  Tensor w({2, 2}, {1.0, 1.0, 1.0, 1.0});
  Tensor g1({2, 2}, {0.1, 5.0, 0.1, 5.0});
  Tensor g2({2, 2}, {5.0, 0.1, 5.0, 0.1});
  BinaryMask m1 = get_mask(w, g1, 0.5, 2);
  BinaryMask m2 = get_mask(w, g2, 0.5, 2);
  CHECK_FALSE(m1.get(0, 0));
  CHECK(m1.get(0, 1));
  CHECK(m2.get(0, 0));  // revived
  CHECK_FALSE(m2.get(0, 1));
}

TEST_CASE("masking a tensor zeroes pruned entries and keeps the rest") {
  Tensor w({2, 2}, {1.0, 2.0, 3.0, 4.0});
  BinaryMask m(2, 2, 1);
  m.set(0, 1, false);
  m.set(1, 0, false);
  Tensor out = apply_mask(w, m);
  CHECK(out.at(0, 0) == 1.0);
  CHECK(out.at(0, 1) == 0.0);
  CHECK(out.at(1, 0) == 0.0);
  CHECK(out.at(1, 1) == 4.0);
}

TEST_CASE("structured keep extent matches scalar evaluation") {
  // round(n * (1-S)^(1/D)), half away from zero.
  CHECK(snn_keep_dim(10, 0.0, 2) == 10);
  CHECK(snn_keep_dim(10, 0.36, 2) == 8);   // 10*0.8
  CHECK(snn_keep_dim(10, 0.75, 2) == 5);   // 10*0.5
  CHECK(snn_keep_dim(4, 0.36, 2) == 3);    // round(3.2)
  CHECK(snn_keep_dim(64, 0.75, 2) == 32);
  CHECK(snn_keep_dim(48, 0.36, 2) == 38);  // round(38.4)
  CHECK(snn_keep_dim(7, 0.875, 1) == 1);   // 1-D rule: 7*(1-S)
}

TEST_CASE("structured mask keeps the top-left rectangle") {
  BinaryMask m = snn_structured_mask(10, 10, 0.36);  // keep 8x8
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 10; ++c)
      CHECK(m.get(r, c) == (r < 8 && c < 8));
  // Structured masks for the same shape nest in S as well.
  BinaryMask tighter = snn_structured_mask(10, 10, 0.75);
  CHECK(zeros_nested(m, tighter));
}

TEST_CASE("pattern matching: exact names and '*' prefixes") {
  CHECK(pattern_matches("fc1.w", "fc1.w"));
  CHECK_FALSE(pattern_matches("fc1.w", "fc1.weight"));
  CHECK(pattern_matches("lstm*", "lstm.w_ih"));
  CHECK(pattern_matches("lstm*", "lstm"));
  CHECK_FALSE(pattern_matches("lstm*", "out.w"));
  CHECK(pattern_matches("*", "anything"));
}

TEST_CASE("config resolves a weight to its unique pattern") {
  SparsityConfig cfg{"Small",
                     {{"lstm*", 0.9}, {"fc*", 0.5}, {"out.w", 0.25}}};
  CHECK(cfg.level_for("lstm.w_hh") == 0.9);
  CHECK(cfg.level_for("fc1.w") == 0.5);
  CHECK(cfg.level_for("out.w") == 0.25);
  CHECK(cfg.mean_level() == doctest::Approx((0.9 + 0.5 + 0.25) / 3.0));
}

TEST_CASE("plan validation rejects malformed plans") {
  SparsityPlan ok;
  ok.configs = {{"Dense", {{"*", 0.0}}}, {"Small", {{"*", 0.5}}}};
  CHECK_NOTHROW(ok.validate());

  SparsityPlan empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);

  SparsityPlan dense_not_zero;
  dense_not_zero.configs = {{"Dense", {{"*", 0.1}}}};
  CHECK_THROWS_AS(dense_not_zero.validate(), ConfigError);

  SparsityPlan out_of_range;
  out_of_range.configs = {{"Dense", {{"*", 0.0}}}, {"Bad", {{"*", 1.0}}}};
  CHECK_THROWS_AS(out_of_range.validate(), ConfigError);

  SparsityPlan descending;
  descending.configs = {{"Dense", {{"*", 0.0}}},
                        {"A", {{"*", 0.9}}},
                        {"B", {{"*", 0.5}}}};
  CHECK_THROWS_AS(descending.validate(), ConfigError);
}

TEST_CASE("plan lookup by name") {
  SparsityPlan plan;
  plan.configs = {{"Dense", {{"*", 0.0}}}, {"Small", {{"*", 0.5}}}};
  CHECK(plan.has_config("Small"));
  CHECK_FALSE(plan.has_config("Tiny"));
  CHECK(plan.config("Small").levels[0].second == 0.5);
  CHECK_THROWS_AS(plan.config("Tiny"), ConfigError);
}
