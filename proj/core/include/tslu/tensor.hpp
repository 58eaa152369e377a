// Copyright 2026 The tslu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tslu/error.hpp"

namespace tslu {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& dims);

// Dense row-major tensor. Training runs on BasicTensor<float>; gradient
// checks instantiate the same code with double.
template <typename Real>
class BasicTensor {
 public:
  using value_type = Real;

  BasicTensor() = default;

  explicit BasicTensor(Shape dims, Real fill = Real(0)) : dims_(std::move(dims)) {
    check_dims();
    data_.assign(element_count(dims_), fill);
  }

  BasicTensor(Shape dims, std::vector<Real> data) : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims();
    if (element_count(dims_) != data_.size()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(dims_));
    }
  }

  const Shape& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  Real& at(std::size_t i, std::size_t j) { return data_[i * dims_[1] + j]; }
  const Real& at(std::size_t i, std::size_t j) const { return data_[i * dims_[1] + j]; }
  Real& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  const Real& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }

  // Slice along the leading axis.
  std::span<Real> row(std::size_t i) {
    const std::size_t stride = data_.size() / dims_[0];
    return std::span<Real>(data_).subspan(i * stride, stride);
  }
  std::span<const Real> row(std::size_t i) const {
    const std::size_t stride = data_.size() / dims_[0];
    return std::span<const Real>(data_).subspan(i * stride, stride);
  }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (Real v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename To>
  BasicTensor<To> cast() const {
    std::vector<To> out(data_.begin(), data_.end());
    return BasicTensor<To>(dims_, std::move(out));
  }

  BasicTensor& operator+=(const BasicTensor& other) {
    require_same_shape(other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  BasicTensor& operator*=(Real s) {
    for (Real& v : data_) v *= s;
    return *this;
  }

  void require_same_shape(const BasicTensor& other, const char* what) const {
    if (dims_ != other.dims_) {
      throw ShapeError(std::string(what) + ": shape " + shape_string(dims_) + " vs " +
                       shape_string(other.dims_));
    }
  }

  // Bitwise equality of shape and payload.
  friend bool bit_identical(const BasicTensor& a, const BasicTensor& b) {
    return a.dims_ == b.dims_ &&
           (a.data_.empty() ||
            std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(Real)) == 0);
  }

 private:
  static std::size_t element_count(const Shape& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  }

  void check_dims() const {
    if (dims_.empty()) throw ShapeError("tensor must have at least one axis");
    for (std::size_t d : dims_) {
      if (d == 0) throw ShapeError("tensor dims must be positive, got " + shape_string(dims_));
    }
  }

  Shape dims_;
  std::vector<Real> data_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

// Throws NumericError naming `what` if any entry is NaN or infinite.
template <typename Real>
void require_finite(const BasicTensor<Real>& t, const std::string& what) {
  if (!t.all_finite()) throw NumericError(what + ": non-finite value");
}

}  // namespace tslu
