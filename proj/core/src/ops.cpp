/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#include "superyolo/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "superyolo/error.hpp"
#include "superyolo/flops.hpp"

namespace superyolo::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using MapConstMat = Eigen::Map<const RowMat<T>>;

// col[(c*k + ky)*k + kx][oy*wo + ox] = x[c][oy*s - p + ky][ox*s - p + kx], zero outside.
template <typename T>
void im2col(const T* x, int64_t channels, int64_t height, int64_t width, int k, int s, int p, int64_t ho,
            int64_t wo, T* col) {
  for (int64_t c = 0; c < channels; ++c) {
    const T* plane = x + c * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + ((c * k + ky) * k + kx) * ho * wo;
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * s - p + ky;
          T* row = dst + oy * wo;
          if (iy < 0 || iy >= height) {
            std::fill(row, row + wo, T(0));
            continue;
          }
          const T* src = plane + iy * width;
          if (s == 1) {
            const int64_t lo = std::clamp<int64_t>(p - kx, 0, wo);
            const int64_t hi = std::clamp<int64_t>(width + p - kx, 0, wo);
            std::fill(row, row + lo, T(0));
            for (int64_t ox = lo; ox < hi; ++ox) row[ox] = src[ox - p + kx];
            std::fill(row + std::max(lo, hi), row + wo, T(0));
          } else {
            for (int64_t ox = 0; ox < wo; ++ox) {
              const int64_t ix = ox * s - p + kx;
              row[ox] = (ix >= 0 && ix < width) ? src[ix] : T(0);
            }
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds columns back into the image.
template <typename T>
void col2im(const T* col, int64_t channels, int64_t height, int64_t width, int k, int s, int p, int64_t ho,
            int64_t wo, T* x) {
  for (int64_t c = 0; c < channels; ++c) {
    T* plane = x + c * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + ((c * k + ky) * k + kx) * ho * wo;
        for (int64_t oy = 0; oy < ho; ++oy) {
          const int64_t iy = oy * s - p + ky;
          if (iy < 0 || iy >= height) continue;
          T* dst = plane + iy * width;
          const T* row = src + oy * wo;
          for (int64_t ox = 0; ox < wo; ++ox) {
            const int64_t ix = ox * s - p + kx;
            if (ix >= 0 && ix < width) dst[ix] += row[ox];
          }
        }
      }
    }
  }
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
bool is_meta(const Var<T>& v) {
  return v.value().is_meta();
}

template <typename T>
std::vector<Var<T>> with_optional(std::vector<Var<T>> inputs, const Var<T>& maybe) {
  if (maybe.defined()) inputs.push_back(maybe);
  return inputs;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
  auto dim = [](int64_t x, int64_t y) {
    if (x == y || y == 1) return x;
    if (x == 1) return y;
    throw ShapeError("cannot broadcast extents " + std::to_string(x) + " and " + std::to_string(y));
  };
  return {dim(a.n, b.n), dim(a.c, b.c), dim(a.h, b.h), dim(a.w, b.w)};
}

struct Strides {
  int64_t n, c, h, w;
};

// Element strides of `s` when viewed with the extents of `out`; broadcast axes get stride 0.
Strides broadcast_strides(const Shape& s) {
  return {s.n == 1 ? 0 : s.c * s.h * s.w, s.c == 1 ? 0 : s.h * s.w, s.h == 1 ? 0 : s.w, s.w == 1 ? 0 : 1};
}

template <typename F>
void for_each_broadcast(const Shape& out, const Shape& a, const Shape& b, F&& f) {
  const Strides sa = broadcast_strides(a);
  const Strides sb = broadcast_strides(b);
  int64_t io = 0;
  for (int64_t n = 0; n < out.n; ++n)
    for (int64_t c = 0; c < out.c; ++c)
      for (int64_t h = 0; h < out.h; ++h) {
        const int64_t base_a = n * sa.n + c * sa.c + h * sa.h;
        const int64_t base_b = n * sb.n + c * sb.c + h * sb.h;
        for (int64_t w = 0; w < out.w; ++w, ++io) f(io, base_a + w * sa.w, base_b + w * sb.w);
      }
}

template <typename T, typename Fwd, typename Deriv>
Var<T> unary(const Var<T>& x, Fwd fwd, Deriv deriv) {
  const Shape shape = x.shape();
  FlopCounter::record(static_cast<double>(shape.numel()));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(shape));
  Tensor<T> out(shape);
  const T* in = x.value().data();
  T* o = out.data();
  const int64_t count = shape.numel();
  for (int64_t i = 0; i < count; ++i) o[i] = fwd(in[i]);
  return make_result<T>(std::move(out), {x}, [deriv](Node<T>& node) {
    auto& input = *node.inputs[0];
    const T* xv = input.value.data();
    const T* yv = node.value.data();
    const T* g = node.grad.data();
    T* dx = input.grad_buffer().data();
    const int64_t count = node.value.numel();
    for (int64_t i = 0; i < count; ++i) dx[i] += g[i] * deriv(xv[i], yv[i]);
  });
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  require(ws.c == xs.c, "conv2d: input has " + std::to_string(xs.c) + " channels, weight expects " +
                            std::to_string(ws.c));
  require(ws.h == ws.w, "conv2d: square kernels only");
  require(stride >= 1 && padding >= 0, "conv2d: bad stride/padding");
  const int k = static_cast<int>(ws.h);
  const int64_t ho = (xs.h + 2 * padding - k) / stride + 1;
  const int64_t wo = (xs.w + 2 * padding - k) / stride + 1;
  require(ho > 0 && wo > 0, "conv2d: kernel larger than padded input " + to_string(xs));
  if (bias.defined()) require(bias.shape().numel() == ws.n, "conv2d: bias size mismatch");
  const Shape out_shape{xs.n, ws.n, ho, wo};
  const int64_t out_pixels = ho * wo;
  const int64_t kdim = xs.c * k * k;
  FlopCounter::record(2.0 * static_cast<double>(kdim) * static_cast<double>(ws.n * out_pixels * xs.n) +
                      (bias.defined() ? static_cast<double>(out_shape.numel()) : 0.0));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(out_shape));

  const bool direct = (k == 1 && stride == 1 && padding == 0);
  Tensor<T> out(out_shape);
  std::vector<T> col(direct ? 0 : static_cast<size_t>(kdim * out_pixels));
  MapConstMat<T> wmat(weight.value().data(), ws.n, kdim);
  for (int64_t n = 0; n < xs.n; ++n) {
    const T* xn = x.value().data() + n * xs.c * xs.plane();
    const T* colp = xn;
    if (!direct) {
      im2col(xn, xs.c, xs.h, xs.w, k, stride, padding, ho, wo, col.data());
      colp = col.data();
    }
    MapMat<T> y(out.data() + n * ws.n * out_pixels, ws.n, out_pixels);
    y.noalias() = wmat * MapConstMat<T>(colp, kdim, out_pixels);
    if (bias.defined()) {
      const T* b = bias.value().data();
      for (int64_t o = 0; o < ws.n; ++o) y.row(o).array() += b[o];
    }
  }

  return make_result<T>(
      std::move(out), with_optional<T>({x, weight}, bias),
      [stride, padding, k, ho, wo, kdim, direct](Node<T>& node) {
        auto& xin = *node.inputs[0];
        auto& win = *node.inputs[1];
        Node<T>* bin = node.inputs.size() > 2 ? node.inputs[2].get() : nullptr;
        const Shape xs = xin.value.shape();
        const int64_t cout = win.value.shape().n;
        const int64_t out_pixels = ho * wo;
        MapConstMat<T> wmat(win.value.data(), cout, kdim);
        std::vector<T> col(direct ? 0 : static_cast<size_t>(kdim * out_pixels));
        std::vector<T> dcol(static_cast<size_t>(kdim * out_pixels));
        for (int64_t n = 0; n < xs.n; ++n) {
          MapConstMat<T> gy(node.grad.data() + n * cout * out_pixels, cout, out_pixels);
          const T* xn = xin.value.data() + n * xs.c * xs.plane();
          if (win.requires_grad) {
            const T* colp = xn;
            if (!direct) {
              im2col(xn, xs.c, xs.h, xs.w, k, stride, padding, ho, wo, col.data());
              colp = col.data();
            }
            MapMat<T> gw(win.grad_buffer().data(), cout, kdim);
            gw.noalias() += gy * MapConstMat<T>(colp, kdim, out_pixels).transpose();
          }
          if (bin && bin->requires_grad) {
            T* gb = bin->grad_buffer().data();
            // Fixed summation order: Eigen's vectorized sum depends on the
            // buffer alignment, which breaks run-to-run reproducibility.
            for (int64_t o = 0; o < cout; ++o) {
              const T* row = node.grad.data() + (n * cout + o) * out_pixels;
              T acc = 0;
              for (int64_t i = 0; i < out_pixels; ++i) acc += row[i];
              gb[o] += acc;
            }
          }
          if (xin.requires_grad) {
            T* gx = xin.grad_buffer().data() + n * xs.c * xs.plane();
            if (direct) {
              MapMat<T> gxm(gx, kdim, out_pixels);
              gxm.noalias() += wmat.transpose() * gy;
            } else {
              MapMat<T>(dcol.data(), kdim, out_pixels).noalias() = wmat.transpose() * gy;
              col2im(dcol.data(), xs.c, xs.h, xs.w, k, stride, padding, ho, wo, gx);
            }
          }
        }
      });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int padding) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  require(ws.n == xs.c, "conv_transpose2d: input has " + std::to_string(xs.c) + " channels, weight expects " +
                            std::to_string(ws.n));
  require(ws.h == ws.w, "conv_transpose2d: square kernels only");
  const int k = static_cast<int>(ws.h);
  const int64_t cout = ws.c;
  const int64_t ho = (xs.h - 1) * stride - 2 * padding + k;
  const int64_t wo = (xs.w - 1) * stride - 2 * padding + k;
  require(ho > 0 && wo > 0, "conv_transpose2d: empty output");
  if (bias.defined()) require(bias.shape().numel() == cout, "conv_transpose2d: bias size mismatch");
  const Shape out_shape{xs.n, cout, ho, wo};
  const int64_t in_pixels = xs.plane();
  const int64_t kdim = cout * k * k;
  FlopCounter::record(2.0 * static_cast<double>(xs.c) * static_cast<double>(kdim) *
                          static_cast<double>(in_pixels * xs.n) +
                      (bias.defined() ? static_cast<double>(out_shape.numel()) : 0.0));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(out_shape));

  Tensor<T> out(out_shape);
  std::vector<T> col(static_cast<size_t>(kdim * in_pixels));
  MapConstMat<T> wmat(weight.value().data(), xs.c, kdim);
  for (int64_t n = 0; n < xs.n; ++n) {
    MapConstMat<T> xn(x.value().data() + n * xs.c * in_pixels, xs.c, in_pixels);
    MapMat<T>(col.data(), kdim, in_pixels).noalias() = wmat.transpose() * xn;
    T* yn = out.data() + n * cout * ho * wo;
    col2im(col.data(), cout, ho, wo, k, stride, padding, xs.h, xs.w, yn);
    if (bias.defined()) {
      const T* b = bias.value().data();
      for (int64_t o = 0; o < cout; ++o) {
        T* plane = yn + o * ho * wo;
        for (int64_t i = 0; i < ho * wo; ++i) plane[i] += b[o];
      }
    }
  }

  return make_result<T>(
      std::move(out), with_optional<T>({x, weight}, bias), [stride, padding, k, kdim](Node<T>& node) {
        auto& xin = *node.inputs[0];
        auto& win = *node.inputs[1];
        Node<T>* bin = node.inputs.size() > 2 ? node.inputs[2].get() : nullptr;
        const Shape xs = xin.value.shape();
        const Shape ys = node.value.shape();
        const int64_t in_pixels = xs.plane();
        MapConstMat<T> wmat(win.value.data(), xs.c, kdim);
        std::vector<T> dcol(static_cast<size_t>(kdim * in_pixels));
        for (int64_t n = 0; n < xs.n; ++n) {
          const T* gy = node.grad.data() + n * ys.c * ys.plane();
          im2col(gy, ys.c, ys.h, ys.w, k, stride, padding, xs.h, xs.w, dcol.data());
          MapConstMat<T> dcm(dcol.data(), kdim, in_pixels);
          if (win.requires_grad) {
            MapConstMat<T> xn(xin.value.data() + n * xs.c * in_pixels, xs.c, in_pixels);
            MapMat<T>(win.grad_buffer().data(), xs.c, kdim).noalias() += xn * dcm.transpose();
          }
          if (xin.requires_grad) {
            MapMat<T>(xin.grad_buffer().data() + n * xs.c * in_pixels, xs.c, in_pixels).noalias() += wmat * dcm;
          }
          if (bin && bin->requires_grad) {
            T* gb = bin->grad_buffer().data();
            for (int64_t o = 0; o < ys.c; ++o) {
              const T* plane = gy + o * ys.plane();
              T acc = 0;
              for (int64_t i = 0; i < ys.plane(); ++i) acc += plane[i];
              gb[o] += acc;
            }
          }
        }
      });
}

template <typename T>
Var<T> batch_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, Tensor<T>& running_mean,
                  Tensor<T>& running_var, bool training, double momentum, double eps) {
  const Shape xs = x.shape();
  require(gamma.shape().numel() == xs.c && beta.shape().numel() == xs.c, "batch_norm: parameter size mismatch");
  FlopCounter::record(2.0 * static_cast<double>(xs.numel()));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(xs));

  const int64_t plane = xs.plane();
  const int64_t count = xs.n * plane;
  std::vector<T> mean(static_cast<size_t>(xs.c));
  std::vector<T> invstd(static_cast<size_t>(xs.c));
  const T* xv = x.value().data();
  for (int64_t c = 0; c < xs.c; ++c) {
    if (training) {
      double sum = 0.0;
      for (int64_t n = 0; n < xs.n; ++n) {
        const T* p = xv + (n * xs.c + c) * plane;
        for (int64_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double mu = sum / static_cast<double>(count);
      double sq = 0.0;
      for (int64_t n = 0; n < xs.n; ++n) {
        const T* p = xv + (n * xs.c + c) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          const double d = p[i] - mu;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(count);
      mean[c] = static_cast<T>(mu);
      invstd[c] = static_cast<T>(1.0 / std::sqrt(var + eps));
      const double unbiased = count > 1 ? var * static_cast<double>(count) / static_cast<double>(count - 1) : var;
      running_mean.data()[c] = static_cast<T>((1.0 - momentum) * running_mean.data()[c] + momentum * mu);
      running_var.data()[c] = static_cast<T>((1.0 - momentum) * running_var.data()[c] + momentum * unbiased);
    } else {
      mean[c] = running_mean.data()[c];
      invstd[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running_var.data()[c]) + eps));
    }
  }

  Tensor<T> out(xs);
  const T* g = gamma.value().data();
  const T* b = beta.value().data();
  for (int64_t n = 0; n < xs.n; ++n)
    for (int64_t c = 0; c < xs.c; ++c) {
      const T* p = xv + (n * xs.c + c) * plane;
      T* o = out.data() + (n * xs.c + c) * plane;
      const T a = g[c] * invstd[c];
      const T shift = b[c] - a * mean[c];
      for (int64_t i = 0; i < plane; ++i) o[i] = a * p[i] + shift;
    }

  return make_result<T>(std::move(out), {x, gamma, beta},
                        [mean = std::move(mean), invstd = std::move(invstd), training](Node<T>& node) {
                          auto& xin = *node.inputs[0];
                          auto& gin = *node.inputs[1];
                          auto& bin = *node.inputs[2];
                          const Shape xs = xin.value.shape();
                          const int64_t plane = xs.plane();
                          const double count = static_cast<double>(xs.n * plane);
                          const T* xv = xin.value.data();
                          const T* gy = node.grad.data();
                          const T* gamma = gin.value.data();
                          for (int64_t c = 0; c < xs.c; ++c) {
                            double sum_dy = 0.0;
                            double sum_dy_xhat = 0.0;
                            for (int64_t n = 0; n < xs.n; ++n) {
                              const int64_t off = (n * xs.c + c) * plane;
                              for (int64_t i = 0; i < plane; ++i) {
                                const double xhat = (xv[off + i] - mean[c]) * invstd[c];
                                sum_dy += gy[off + i];
                                sum_dy_xhat += gy[off + i] * xhat;
                              }
                            }
                            if (gin.requires_grad) gin.grad_buffer().data()[c] += static_cast<T>(sum_dy_xhat);
                            if (bin.requires_grad) bin.grad_buffer().data()[c] += static_cast<T>(sum_dy);
                            if (!xin.requires_grad) continue;
                            T* gx = xin.grad_buffer().data();
                            const double a = static_cast<double>(gamma[c]) * invstd[c];
                            for (int64_t n = 0; n < xs.n; ++n) {
                              const int64_t off = (n * xs.c + c) * plane;
                              for (int64_t i = 0; i < plane; ++i) {
                                if (training) {
                                  const double xhat = (xv[off + i] - mean[c]) * invstd[c];
                                  gx[off + i] += static_cast<T>(
                                      a * (gy[off + i] - sum_dy / count - xhat * sum_dy_xhat / count));
                                } else {
                                  gx[off + i] += static_cast<T>(a * gy[off + i]);
                                }
                              }
                            }
                          }
                        });
}

template <typename T>
Var<T> silu(const Var<T>& x) {
  return unary<T>(
      x, [](T v) { return v / (T(1) + std::exp(-v)); },
      [](T v, T) {
        const T s = T(1) / (T(1) + std::exp(-v));
        return s * (T(1) + v * (T(1) - s));
      });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  return unary<T>(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary<T>(
      x, [](T v) { return T(1) / (T(1) + std::exp(-v)); }, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  FlopCounter::record(static_cast<double>(out_shape.numel()));
  if (is_meta(a) || is_meta(b)) return Var<T>(Tensor<T>::meta(out_shape));
  Tensor<T> out(out_shape);
  const T* av = a.value().data();
  const T* bv = b.value().data();
  T* o = out.data();
  if (a.shape() == b.shape()) {
    for (int64_t i = 0; i < out_shape.numel(); ++i) o[i] = av[i] + bv[i];
  } else {
    for_each_broadcast(out_shape, a.shape(), b.shape(),
                       [&](int64_t io, int64_t ia, int64_t ib) { o[io] = av[ia] + bv[ib]; });
  }
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& node) {
    auto& an = *node.inputs[0];
    auto& bn = *node.inputs[1];
    const T* g = node.grad.data();
    const Shape os = node.value.shape();
    if (an.value.shape() == os && bn.value.shape() == os) {
      if (an.requires_grad) an.grad_buffer().add_(node.grad);
      if (bn.requires_grad) bn.grad_buffer().add_(node.grad);
      return;
    }
    T* ga = an.requires_grad ? an.grad_buffer().data() : nullptr;
    T* gb = bn.requires_grad ? bn.grad_buffer().data() : nullptr;
    for_each_broadcast(os, an.value.shape(), bn.value.shape(), [&](int64_t io, int64_t ia, int64_t ib) {
      if (ga) ga[ia] += g[io];
      if (gb) gb[ib] += g[io];
    });
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  FlopCounter::record(static_cast<double>(out_shape.numel()));
  if (is_meta(a) || is_meta(b)) return Var<T>(Tensor<T>::meta(out_shape));
  Tensor<T> out(out_shape);
  const T* av = a.value().data();
  const T* bv = b.value().data();
  T* o = out.data();
  for_each_broadcast(out_shape, a.shape(), b.shape(),
                     [&](int64_t io, int64_t ia, int64_t ib) { o[io] = av[ia] * bv[ib]; });
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& node) {
    auto& an = *node.inputs[0];
    auto& bn = *node.inputs[1];
    const T* g = node.grad.data();
    const T* av = an.value.data();
    const T* bv = bn.value.data();
    T* ga = an.requires_grad ? an.grad_buffer().data() : nullptr;
    T* gb = bn.requires_grad ? bn.grad_buffer().data() : nullptr;
    for_each_broadcast(node.value.shape(), an.value.shape(), bn.value.shape(),
                       [&](int64_t io, int64_t ia, int64_t ib) {
                         if (ga) ga[ia] += g[io] * bv[ib];
                         if (gb) gb[ib] += g[io] * av[ia];
                       });
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  FlopCounter::record(static_cast<double>(x.shape().numel()));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(x.shape()));
  Tensor<T> out(x.shape());
  const T* in = x.value().data();
  for (int64_t i = 0; i < out.numel(); ++i) out.data()[i] = in[i] * factor;
  return make_result<T>(std::move(out), {x}, [factor](Node<T>& node) {
    T* gx = node.inputs[0]->grad_buffer().data();
    const T* g = node.grad.data();
    for (int64_t i = 0; i < node.value.numel(); ++i) gx[i] += g[i] * factor;
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat: no inputs");
  Shape out_shape = parts.front().shape();
  out_shape.c = 0;
  bool meta = false;
  for (const auto& p : parts) {
    const Shape s = p.shape();
    require(s.n == out_shape.n && s.h == out_shape.h && s.w == out_shape.w,
            "concat: spatial/batch mismatch " + to_string(s) + " vs " + to_string(parts.front().shape()));
    out_shape.c += s.c;
    meta = meta || is_meta(p);
  }
  if (meta) return Var<T>(Tensor<T>::meta(out_shape));
  Tensor<T> out(out_shape);
  const int64_t plane = out_shape.plane();
  for (int64_t n = 0; n < out_shape.n; ++n) {
    T* dst = out.data() + n * out_shape.c * plane;
    for (const auto& p : parts) {
      const int64_t span = p.shape().c * plane;
      const T* src = p.value().data() + n * span;
      std::copy(src, src + span, dst);
      dst += span;
    }
  }
  return make_result<T>(std::move(out), parts, [](Node<T>& node) {
    const Shape os = node.value.shape();
    const int64_t plane = os.plane();
    for (int64_t n = 0; n < os.n; ++n) {
      const T* src = node.grad.data() + n * os.c * plane;
      for (auto& in : node.inputs) {
        const int64_t span = in->value.shape().c * plane;
        if (in->requires_grad) {
          T* dst = in->grad_buffer().data() + n * span;
          for (int64_t i = 0; i < span; ++i) dst[i] += src[i];
        }
        src += span;
      }
    }
  });
}

template <typename T>
Var<T> max_pool2d(const Var<T>& x, int kernel) {
  require(kernel % 2 == 1, "max_pool2d: kernel must be odd");
  const Shape xs = x.shape();
  FlopCounter::record(static_cast<double>(kernel) * kernel * static_cast<double>(xs.numel()));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(xs));
  const int r = kernel / 2;
  Tensor<T> out(xs);
  std::vector<int32_t> argmax(static_cast<size_t>(xs.numel()));
  const int64_t planes = xs.n * xs.c;
  // Separable: row maxima first, then column maxima over them; the
  // index of the winning input element is tracked through both passes.
  std::vector<T> rowmax(static_cast<size_t>(xs.plane()));
  std::vector<int32_t> rowarg(static_cast<size_t>(xs.plane()));
  for (int64_t p = 0; p < planes; ++p) {
    const T* src = x.value().data() + p * xs.plane();
    for (int64_t h = 0; h < xs.h; ++h)
      for (int64_t w = 0; w < xs.w; ++w) {
        T best = -std::numeric_limits<T>::infinity();
        int32_t arg = static_cast<int32_t>(h * xs.w + w);
        for (int64_t ww = std::max<int64_t>(0, w - r); ww <= std::min<int64_t>(xs.w - 1, w + r); ++ww) {
          if (src[h * xs.w + ww] > best) {
            best = src[h * xs.w + ww];
            arg = static_cast<int32_t>(h * xs.w + ww);
          }
        }
        rowmax[h * xs.w + w] = best;
        rowarg[h * xs.w + w] = arg;
      }
    T* dst = out.data() + p * xs.plane();
    int32_t* am = argmax.data() + p * xs.plane();
    for (int64_t h = 0; h < xs.h; ++h)
      for (int64_t w = 0; w < xs.w; ++w) {
        T best = -std::numeric_limits<T>::infinity();
        int32_t arg = rowarg[h * xs.w + w];
        for (int64_t hh = std::max<int64_t>(0, h - r); hh <= std::min<int64_t>(xs.h - 1, h + r); ++hh) {
          if (rowmax[hh * xs.w + w] > best) {
            best = rowmax[hh * xs.w + w];
            arg = rowarg[hh * xs.w + w];
          }
        }
        dst[h * xs.w + w] = best;
        am[h * xs.w + w] = arg;
      }
  }
  return make_result<T>(std::move(out), {x}, [argmax = std::move(argmax)](Node<T>& node) {
    const Shape xs = node.value.shape();
    T* gx = node.inputs[0]->grad_buffer().data();
    const T* g = node.grad.data();
    for (int64_t p = 0; p < xs.n * xs.c; ++p) {
      const int64_t off = p * xs.plane();
      for (int64_t i = 0; i < xs.plane(); ++i) gx[off + argmax[off + i]] += g[off + i];
    }
  });
}

template <typename T>
Var<T> upsample_nearest(const Var<T>& x, int factor) {
  require(factor >= 1, "upsample_nearest: factor must be >= 1");
  const Shape xs = x.shape();
  const Shape os{xs.n, xs.c, xs.h * factor, xs.w * factor};
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(os));
  Tensor<T> out(os);
  for (int64_t p = 0; p < xs.n * xs.c; ++p) {
    const T* src = x.value().data() + p * xs.plane();
    T* dst = out.data() + p * os.plane();
    for (int64_t h = 0; h < os.h; ++h)
      for (int64_t w = 0; w < os.w; ++w) dst[h * os.w + w] = src[(h / factor) * xs.w + w / factor];
  }
  return make_result<T>(std::move(out), {x}, [factor](Node<T>& node) {
    auto& in = *node.inputs[0];
    const Shape xs = in.value.shape();
    const Shape os = node.value.shape();
    T* gx = in.grad_buffer().data();
    for (int64_t p = 0; p < xs.n * xs.c; ++p) {
      const T* g = node.grad.data() + p * os.plane();
      T* dst = gx + p * xs.plane();
      for (int64_t h = 0; h < os.h; ++h)
        for (int64_t w = 0; w < os.w; ++w) dst[(h / factor) * xs.w + w / factor] += g[h * os.w + w];
    }
  });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const Shape xs = x.shape();
  const Shape os{xs.n, xs.c, 1, 1};
  FlopCounter::record(static_cast<double>(xs.numel()));
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(os));
  Tensor<T> out(os);
  for (int64_t p = 0; p < xs.n * xs.c; ++p) {
    const T* src = x.value().data() + p * xs.plane();
    double acc = 0.0;
    for (int64_t i = 0; i < xs.plane(); ++i) acc += src[i];
    out.data()[p] = static_cast<T>(acc / static_cast<double>(xs.plane()));
  }
  return make_result<T>(std::move(out), {x}, [](Node<T>& node) {
    auto& in = *node.inputs[0];
    const Shape xs = in.value.shape();
    T* gx = in.grad_buffer().data();
    const T inv = T(1) / static_cast<T>(xs.plane());
    for (int64_t p = 0; p < xs.n * xs.c; ++p) {
      const T g = node.grad.data()[p] * inv;
      T* dst = gx + p * xs.plane();
      for (int64_t i = 0; i < xs.plane(); ++i) dst[i] += g;
    }
  });
}

template <typename T>
Var<T> space_to_depth(const Var<T>& x) {
  const Shape xs = x.shape();
  if (xs.h % 2 != 0 || xs.w % 2 != 0) throw ShapeError("space_to_depth: odd spatial extent " + to_string(xs));
  const Shape os{xs.n, xs.c * 4, xs.h / 2, xs.w / 2};
  if (is_meta(x)) return Var<T>(Tensor<T>::meta(os));
  static constexpr int kDy[4] = {0, 1, 0, 1};
  static constexpr int kDx[4] = {0, 0, 1, 1};
  Tensor<T> out(os);
  for (int64_t n = 0; n < xs.n; ++n)
    for (int g = 0; g < 4; ++g)
      for (int64_t c = 0; c < xs.c; ++c)
        for (int64_t i = 0; i < os.h; ++i)
          for (int64_t j = 0; j < os.w; ++j)
            out.at(n, g * xs.c + c, i, j) = x.value().at(n, c, 2 * i + kDy[g], 2 * j + kDx[g]);
  return make_result<T>(std::move(out), {x}, [](Node<T>& node) {
    auto& in = *node.inputs[0];
    const Shape xs = in.value.shape();
    const Shape os = node.value.shape();
    auto& gx = in.grad_buffer();
    for (int64_t n = 0; n < xs.n; ++n)
      for (int g = 0; g < 4; ++g)
        for (int64_t c = 0; c < xs.c; ++c)
          for (int64_t i = 0; i < os.h; ++i)
            for (int64_t j = 0; j < os.w; ++j)
              gx.at(n, c, 2 * i + kDy[g], 2 * j + kDx[g]) += node.grad.at(n, g * xs.c + c, i, j);
  });
}

template <typename T>
Var<T> l1_loss(const Var<T>& x, const Tensor<T>& target) {
  if (x.shape() != target.shape())
    throw ShapeError("l1_loss: " + to_string(x.shape()) + " vs target " + to_string(target.shape()));
  const int64_t count = x.shape().numel();
  double acc = 0.0;
  for (int64_t i = 0; i < count; ++i) acc += std::abs(static_cast<double>(x.value().data()[i]) - target.data()[i]);
  Tensor<T> out(Shape{}, static_cast<T>(acc / static_cast<double>(count)));
  return make_result<T>(std::move(out), {x}, [target](Node<T>& node) {
    auto& in = *node.inputs[0];
    const int64_t count = in.value.numel();
    const T g = node.grad.item() / static_cast<T>(count);
    T* gx = in.grad_buffer().data();
    for (int64_t i = 0; i < count; ++i) {
      const T d = in.value.data()[i] - target.data()[i];
      gx[i] += d > T(0) ? g : (d < T(0) ? -g : T(0));
    }
  });
}

template <typename T>
Var<T> mse_loss(const Var<T>& x, const Tensor<T>& target) {
  if (x.shape() != target.shape())
    throw ShapeError("mse_loss: " + to_string(x.shape()) + " vs target " + to_string(target.shape()));
  const int64_t count = x.shape().numel();
  double acc = 0.0;
  for (int64_t i = 0; i < count; ++i) {
    const double d = static_cast<double>(x.value().data()[i]) - target.data()[i];
    acc += d * d;
  }
  Tensor<T> out(Shape{}, static_cast<T>(acc / static_cast<double>(count)));
  return make_result<T>(std::move(out), {x}, [target](Node<T>& node) {
    auto& in = *node.inputs[0];
    const int64_t count = in.value.numel();
    const T g = T(2) * node.grad.item() / static_cast<T>(count);
    T* gx = in.grad_buffer().data();
    for (int64_t i = 0; i < count; ++i) gx[i] += g * (in.value.data()[i] - target.data()[i]);
  });
}

#define SUPERYOLO_INSTANTIATE_OPS(T)                                                                         \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);                           \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Var<T>&, int, int);                 \
  template Var<T> batch_norm(const Var<T>&, const Var<T>&, const Var<T>&, Tensor<T>&, Tensor<T>&, bool,    \
                             double, double);                                                              \
  template Var<T> silu(const Var<T>&);                                                                     \
  template Var<T> relu(const Var<T>&);                                                                     \
  template Var<T> sigmoid(const Var<T>&);                                                                  \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                       \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                       \
  template Var<T> scale(const Var<T>&, T);                                                                 \
  template Var<T> concat(const std::vector<Var<T>>&);                                                      \
  template Var<T> max_pool2d(const Var<T>&, int);                                                          \
  template Var<T> upsample_nearest(const Var<T>&, int);                                                    \
  template Var<T> global_avg_pool(const Var<T>&);                                                          \
  template Var<T> space_to_depth(const Var<T>&);                                                           \
  template Var<T> l1_loss(const Var<T>&, const Tensor<T>&);                                                \
  template Var<T> mse_loss(const Var<T>&, const Tensor<T>&);

SUPERYOLO_INSTANTIATE_OPS(float)
SUPERYOLO_INSTANTIATE_OPS(double)

#undef SUPERYOLO_INSTANTIATE_OPS

}  // namespace superyolo::nn
