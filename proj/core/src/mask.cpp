// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/mask.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "dsnn/errors.hpp"

namespace dsnn {

namespace {

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
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

}  // namespace

BinaryMask::BinaryMask(std::size_t rows, std::size_t cols,
                       std::size_t block_height)
    : rows_(rows), cols_(cols), block_height_(block_height) {
  if (rows == 0 || cols == 0)
    throw ShapeError("BinaryMask: empty shape");
  if (block_height == 0)
    throw ValueError("BinaryMask: block height must be positive");
  std::size_t bits = rows * cols;
  words_.assign((bits + 63) / 64, ~std::uint64_t{0});
  if (bits % 64 != 0) words_.back() = (std::uint64_t{1} << (bits % 64)) - 1;
}

std::size_t BinaryMask::block_rows() const {
  return (rows_ + block_height_ - 1) / block_height_;
}

bool BinaryMask::get(std::size_t r, std::size_t c) const {
  std::size_t bit = r * cols_ + c;
  return (words_[bit / 64] >> (bit % 64)) & 1u;
}

void BinaryMask::set(std::size_t r, std::size_t c, bool keep) {
  std::size_t bit = r * cols_ + c;
  std::uint64_t w = std::uint64_t{1} << (bit % 64);
  if (keep)
    words_[bit / 64] |= w;
  else
    words_[bit / 64] &= ~w;
}

void BinaryMask::set_block(std::size_t block_row, std::size_t col, bool keep) {
  std::size_t r1 = std::min(rows_, (block_row + 1) * block_height_);
  for (std::size_t r = block_row * block_height_; r < r1; ++r)
    set(r, col, keep);
}

std::size_t BinaryMask::zero_count() const {
  std::size_t kept = 0;
  for (std::uint64_t w : words_) kept += std::popcount(w);
  return size() - kept;
}

std::size_t BinaryMask::pruned_block_count() const {
  std::size_t pruned = 0;
  for (std::size_t br = 0; br < block_rows(); ++br)
    for (std::size_t c = 0; c < cols_; ++c)
      if (!block_kept(br, c)) ++pruned;
  return pruned;
}

bool BinaryMask::is_block_structured() const {
  for (std::size_t br = 0; br < block_rows(); ++br) {
    std::size_t r0 = br * block_height_;
    std::size_t r1 = std::min(rows_, r0 + block_height_);
    for (std::size_t c = 0; c < cols_; ++c) {
      bool first = get(r0, c);
      for (std::size_t r = r0 + 1; r < r1; ++r)
        if (get(r, c) != first) return false;
    }
  }
  return true;
}

Tensor BinaryMask::to_tensor() const {
  Tensor t({rows_, cols_});
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      t[r * cols_ + c] = get(r, c) ? 1.0 : 0.0;
  return t;
}

std::vector<std::uint8_t> BinaryMask::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(16 + (size() + 7) / 8);
  write_u32(out, 2);
  write_u32(out, static_cast<std::uint32_t>(rows_));
  write_u32(out, static_cast<std::uint32_t>(cols_));
  write_u32(out, static_cast<std::uint32_t>(block_height_));
  std::size_t n_bytes = (size() + 7) / 8;
  for (std::size_t j = 0; j < n_bytes; ++j)
    out.push_back(
        static_cast<std::uint8_t>(words_[j / 8] >> (8 * (j % 8))));
  return out;
}

BinaryMask BinaryMask::deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 16) throw IoError("mask payload truncated header");
  std::uint32_t ndim = read_u32(bytes.data());
  std::uint32_t rows = read_u32(bytes.data() + 4);
  std::uint32_t cols = read_u32(bytes.data() + 8);
  std::uint32_t bh = read_u32(bytes.data() + 12);
  if (ndim != 2) throw IoError("mask payload: unsupported rank " +
                               std::to_string(ndim));
  BinaryMask m(rows, cols, bh);
  std::size_t n_bytes = (m.size() + 7) / 8;
  if (bytes.size() != 16 + n_bytes)
    throw IoError("mask payload: expected " + std::to_string(16 + n_bytes) +
                  " bytes, got " + std::to_string(bytes.size()));
  std::fill(m.words_.begin(), m.words_.end(), 0);
  for (std::size_t j = 0; j < n_bytes; ++j)
    m.words_[j / 8] |= static_cast<std::uint64_t>(bytes[16 + j])
                       << (8 * (j % 8));
  std::size_t bits = m.size();
  if (bits % 64 != 0) {
    std::uint64_t tail = (std::uint64_t{1} << (bits % 64)) - 1;
    if (m.words_.back() & ~tail)
      throw IoError("mask payload: nonzero padding bits");
  }
  return m;
}

bool BinaryMask::operator==(const BinaryMask& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ &&
         block_height_ == other.block_height_ && words_ == other.words_;
}

BinaryMask mask_union(const std::vector<BinaryMask>& masks) {
  if (masks.empty()) throw ValueError("mask_union: empty list");
  BinaryMask out = masks[0];
  for (std::size_t i = 1; i < masks.size(); ++i) {
    const BinaryMask& m = masks[i];
    if (m.rows() != out.rows() || m.cols() != out.cols() ||
        m.block_height() != out.block_height())
      throw ShapeError("mask_union: mismatched masks");
    for (std::size_t r = 0; r < out.rows(); ++r)
      for (std::size_t c = 0; c < out.cols(); ++c)
        if (m.get(r, c)) out.set(r, c, true);
  }
  return out;
}

BinaryMask mask_complement(const BinaryMask& m) {
  BinaryMask out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out.set(r, c, !m.get(r, c));
  return out;
}

bool zeros_nested(const BinaryMask& lower, const BinaryMask& higher) {
  if (lower.rows() != higher.rows() || lower.cols() != higher.cols())
    throw ShapeError("zeros_nested: mismatched masks");
  for (std::size_t r = 0; r < lower.rows(); ++r)
    for (std::size_t c = 0; c < lower.cols(); ++c)
      if (!lower.get(r, c) && higher.get(r, c)) return false;
  return true;
}

}  // namespace dsnn
