/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/tensor.hpp"

#include <algorithm>

#include "superyolo/error.hpp"

namespace superyolo::nn {

std::string to_string(const Shape& s) {
  return "[" + std::to_string(s.n) + ", " + std::to_string(s.c) + ", " + std::to_string(s.h) + ", " +
         std::to_string(s.w) + "]";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill)
    : shape_(shape), data_(static_cast<size_t>(shape.numel()), fill), defined_(true) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0)
    throw ShapeError("negative tensor extent " + to_string(shape));
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(shape), data_(std::move(values)), defined_(true) {
  if (static_cast<int64_t>(data_.size()) != shape.numel())
    throw ShapeError("value count " + std::to_string(data_.size()) + " does not match shape " + to_string(shape));
}

template <typename T>
Tensor<T> Tensor<T>::meta(Shape shape) {
  Tensor t;
  t.shape_ = shape;
  t.defined_ = true;
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1 || data_.empty()) throw ShapeError("item() needs a materialized single-element tensor");
  return data_[0];
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
void Tensor<T>::add_(const Tensor& other) {
  if (other.shape_ != shape_) throw ShapeError("add_: " + to_string(shape_) + " vs " + to_string(other.shape_));
  if (is_meta() || other.is_meta()) return;
  T* dst = data_.data();
  const T* src = other.data_.data();
  const size_t count = data_.size();
  for (size_t i = 0; i < count; ++i) dst[i] += src[i];
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape.numel() != numel()) throw ShapeError("reshape " + to_string(shape_) + " -> " + to_string(shape));
  Tensor out = *this;
  out.shape_ = shape;
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace superyolo::nn
