// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <new>
#include <string>
#include <vector>

namespace dsnn {

namespace detail {

// Fixed 64-byte alignment for tensor storage. Vectorized kernels peel loops
// based on the alignment of the buffers they walk; pinning every buffer to
// one alignment keeps results bit-identical across runs regardless of where
// the allocator happens to place them.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(
        ::operator new(n * sizeof(T), std::align_val_t(alignment)));
  }
  void deallocate(T* p, std::size_t) {
    ::operator delete(p, std::align_val_t(alignment));
  }

  friend bool operator==(const AlignedAllocator&, const AlignedAllocator&) {
    return true;
  }
  friend bool operator!=(const AlignedAllocator&, const AlignedAllocator&) {
    return false;
  }
};

}  // namespace detail

// Dense row-major tensor of doubles. Rank 1 and rank 2 are the only shapes
// the library ever produces; a rank-1 tensor of length k behaves as a [k x 1]
// column wherever a matrix view is required.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor full(std::vector<std::size_t> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  /// Matrix view: rank-1 [k] canonicalizes to [k x 1].
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  void fill(double value);

  /// Throws NumericError naming `what` if any element is NaN or infinite.
  void check_finite(const std::string& what) const;

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double, detail::AlignedAllocator<double>> data_;
};

/// C = A * B, shapes [m x k] * [k x n] -> [m x n].
Tensor matmul_nn(const Tensor& a, const Tensor& b);
/// C = A * B^T, shapes [m x k] * [n x k] -> [m x n].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// C = A^T * B, shapes [k x m] * [k x n] -> [m x n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);

}  // namespace dsnn
