// Copyright 2026 The dsnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dsnn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are inconsistent (matmul inner dims, mask vs weight, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its documented domain.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf, or training diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Configuration file or experiment setup is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint / dataset file I/O failed or payload is corrupt.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsnn
