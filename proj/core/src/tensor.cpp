// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsnn/tensor.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dsnn/errors.hpp"

namespace dsnn {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

using MatMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                   Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

ConstMatMap map_of(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  if (shape_.empty() || shape_.size() > 2)
    throw ShapeError("Tensor: rank must be 1 or 2, got rank " +
                     std::to_string(shape_.size()));
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (shape_.empty() || shape_.size() > 2)
    throw ShapeError("Tensor: rank must be 1 or 2, got rank " +
                     std::to_string(shape_.size()));
  if (data_.size() != shape_product(shape_))
    throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

std::size_t Tensor::rows() const { return shape_.empty() ? 0 : shape_[0]; }

std::size_t Tensor::cols() const {
  return shape_.size() == 2 ? shape_[1] : (shape_.empty() ? 0 : 1);
}

void Tensor::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

void Tensor::check_finite(const std::string& what) const {
  for (double v : data_) {
    if (!std::isfinite(v))
      throw NumericError(what + ": non-finite value encountered");
  }
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << " x ";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

Tensor matmul_nn(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dims mismatch " + a.shape_str() + " * " +
                     b.shape_str());
  Tensor c({a.rows(), b.cols()});
  MatMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols()))
      .noalias() = map_of(a) * map_of(b);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt: inner dims mismatch " + a.shape_str() +
                     " * " + b.shape_str() + "^T");
  Tensor c({a.rows(), b.rows()});
  MatMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols()))
      .noalias() = map_of(a) * map_of(b).transpose();
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn: inner dims mismatch " + a.shape_str() +
                     "^T * " + b.shape_str());
  Tensor c({a.cols(), b.cols()});
  MatMap(c.data(), static_cast<Eigen::Index>(c.rows()),
         static_cast<Eigen::Index>(c.cols()))
      .noalias() = map_of(a).transpose() * map_of(b);
  return c;
}

}  // namespace dsnn
