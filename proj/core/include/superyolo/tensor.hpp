/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace superyolo::nn {

/// NCHW extent. Every tensor in the engine is four dimensional; scalars are 1x1x1x1.
struct Shape {
  int64_t n = 1;
  int64_t c = 1;
  int64_t h = 1;
  int64_t w = 1;

  constexpr int64_t numel() const { return n * c * h * w; }
  constexpr int64_t plane() const { return h * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense NCHW tensor with value semantics.
///
/// A meta tensor carries a shape but no storage; ops propagate shapes and
/// record FLOPs without computing. This is how complexity is measured on
/// full-size inputs without paying for a forward pass.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor meta(Shape shape);

  bool defined() const { return defined_; }
  bool is_meta() const { return defined_ && data_.empty() && shape_.numel() > 0; }

  const Shape& shape() const { return shape_; }
  int64_t numel() const { return shape_.numel(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }
  T at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }
  /// Scalar read of a single-element tensor.
  T item() const;

  void fill(T v);
  /// Elementwise `this += other`; shapes must match.
  void add_(const Tensor& other);
  /// Same data with a new shape of equal element count.
  Tensor reshaped(Shape shape) const;

  template <typename U>
  Tensor<U> cast() const {
    if (is_meta()) return Tensor<U>::meta(shape_);
    Tensor<U> out(shape_);
    for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  Shape shape_{0, 0, 0, 0};
  std::vector<T> data_;
  bool defined_ = false;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace superyolo::nn
