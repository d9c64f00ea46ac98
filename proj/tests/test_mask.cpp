// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "dsnn/errors.hpp"
#include "dsnn/mask.hpp"

using namespace dsnn;

TEST_CASE("fresh mask keeps everything") {
  BinaryMask m(5, 3, 2);
  CHECK(m.size() == 15);
  CHECK(m.zero_count() == 0);
  CHECK(m.sparsity() == 0.0);
  CHECK(m.block_rows() == 3);  // ceil(5/2), partial bottom block
  CHECK(m.block_count() == 9);
  CHECK(m.is_block_structured());
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(m.get(r, c));
}

TEST_CASE("set and get round-trip across word boundaries") {
  BinaryMask m(9, 17, 1);  // 153 bits spans three words
  m.set(0, 0, false);
  m.set(3, 12, false);
  m.set(8, 16, false);
  CHECK_FALSE(m.get(0, 0));
  CHECK_FALSE(m.get(3, 12));
  CHECK_FALSE(m.get(8, 16));
  CHECK(m.get(3, 13));
  CHECK(m.zero_count() == 3);
  m.set(3, 12, true);
  CHECK(m.zero_count() == 2);
}

TEST_CASE("set_block clears whole blocks and clips at the bottom") {
  BinaryMask m(5, 2, 2);
  m.set_block(2, 1, false);  // rows 4..5 clipped to row 4 only
  CHECK(m.zero_count() == 1);
  CHECK_FALSE(m.get(4, 1));
  CHECK(m.get(4, 0));
  m.set_block(0, 0, false);
  CHECK_FALSE(m.get(0, 0));
  CHECK_FALSE(m.get(1, 0));
  CHECK(m.pruned_block_count() == 2);
  CHECK(m.is_block_structured());
  m.set(0, 0, true);  // half-pruned block
  CHECK_FALSE(m.is_block_structured());
}

TEST_CASE("to_tensor mirrors the bits") {
  BinaryMask m(2, 2, 1);
  m.set(1, 0, false);
  Tensor t = m.to_tensor();
  CHECK(t.at(0, 0) == 1.0);
  CHECK(t.at(1, 0) == 0.0);
  CHECK(t.at(1, 1) == 1.0);
}

TEST_CASE("serialized layout: header plus LSB-first bits") {
  BinaryMask m(2, 2, 1);
  m.set(0, 0, false);  // bit 0 cleared -> first byte 0b1110
  std::vector<std::uint8_t> bytes = m.serialize();
  REQUIRE(bytes.size() == 17);
  std::vector<std::uint8_t> header = {2, 0, 0, 0, 2, 0, 0, 0,
                                      2, 0, 0, 0, 1, 0, 0, 0};
  for (int i = 0; i < 16; ++i) CHECK(bytes[i] == header[i]);
  CHECK(bytes[16] == 0x0e);
}

TEST_CASE("serialize round-trips and rejects damage") {
  BinaryMask m(70, 9, 4);
  for (std::size_t b = 0; b < m.block_rows(); b += 3)
    m.set_block(b, b % 9, false);
  BinaryMask back = BinaryMask::deserialize(m.serialize());
  CHECK(back == m);
  CHECK(back.block_height() == 4);

  std::vector<std::uint8_t> bytes = m.serialize();
  bytes.pop_back();
  CHECK_THROWS_AS(BinaryMask::deserialize(bytes), IoError);

  bytes = m.serialize();
  bytes[0] = 3;  // rank
  CHECK_THROWS_AS(BinaryMask::deserialize(bytes), IoError);

  bytes = m.serialize();
  bytes.back() |= 0x80;  // padding bit beyond 70*9 = 630 bits
  CHECK_THROWS_AS(BinaryMask::deserialize(bytes), IoError);
}

TEST_CASE("equality is canonical") {
  BinaryMask a(3, 3, 1), b(3, 3, 1);
  CHECK(a == b);
  a.set(2, 2, false);
  CHECK(a != b);
  b.set(2, 2, false);
  CHECK(a == b);
  CHECK(BinaryMask(3, 3, 1) != BinaryMask(3, 3, 3));  // block height counts
}

TEST_CASE("union and complement") {
  BinaryMask a(2, 2, 1), b(2, 2, 1);
  a.set(0, 0, false);
  a.set(0, 1, false);
  b.set(0, 1, false);
  b.set(1, 1, false);
  BinaryMask u = mask_union({a, b});
  CHECK(u.get(0, 0));       // kept in b
  CHECK_FALSE(u.get(0, 1));  // pruned in both
  CHECK(u.get(1, 1));       // kept in a
  CHECK(u.zero_count() == 1);

  BinaryMask c = mask_complement(u);
  CHECK(c.zero_count() == 3);
  CHECK(c.get(0, 1));

  CHECK_THROWS_AS(mask_union({}), ValueError);
  CHECK_THROWS_AS(mask_union({a, BinaryMask(3, 2, 1)}), ShapeError);
}

TEST_CASE("zeros_nested") {
  BinaryMask lo(4, 1, 1), hi(4, 1, 1);
  lo.set(1, 0, false);
  hi.set(1, 0, false);
  hi.set(2, 0, false);
  CHECK(zeros_nested(lo, hi));
  CHECK_FALSE(zeros_nested(hi, lo));
  CHECK(zeros_nested(lo, lo));
}
