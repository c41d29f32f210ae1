/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <vector>

#include "superyolo/autograd.hpp"

namespace superyolo::nn {

/// 2-D convolution, weight [Cout, Cin, k, k]. `bias` may be undefined.
/// Output extent is floor((in + 2*padding - k) / stride) + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding);

/// Transposed convolution, weight [Cin, Cout, k, k].
/// Output extent is (in - 1) * stride - 2 * padding + k.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding);

/// Batch normalization over (N, H, W) per channel. In training mode the batch
/// statistics normalize and the running buffers are updated in place
/// (running = (1 - momentum) * running + momentum * batch, unbiased variance).
template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, bool training, double momentum, double eps);

template <typename T>
Var<T> silu(const Var<T>& x);
template <typename T>
Var<T> relu(const Var<T>& x);
template <typename T>
Var<T> sigmoid(const Var<T>& x);

/// Elementwise sum and product with size-1 broadcasting on any axis.
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> scale(const Var<T>& x, T factor);

/// Channel-axis concatenation.
template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts);

/// Stride-1 max pooling with -inf same padding (k odd).
template <typename T>
Var<T> max_pool2d(const Var<T>& x, int kernel);

template <typename T>
Var<T> upsample_nearest(const Var<T>& x, int factor);

/// [N, C, H, W] -> [N, C, 1, 1] spatial mean.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x);

/// Space-to-depth by 2. Channel groups are ordered (even row, even col),
/// (odd row, even col), (even row, odd col), (odd row, odd col).
template <typename T>
Var<T> space_to_depth(const Var<T>& x);

/// Mean absolute / mean squared difference against a constant target.
template <typename T>
Var<T> l1_loss(const Var<T>& x, const Tensor<T>& target);
template <typename T>
Var<T> mse_loss(const Var<T>& x, const Tensor<T>& target);

}  // namespace superyolo::nn
