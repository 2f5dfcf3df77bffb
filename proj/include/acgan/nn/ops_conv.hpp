#pragma once

#include <array>
#include <cstdint>

#include "acgan/nn/ops_linear.hpp"

namespace acgan::nn {

using Pair = std::array<std::size_t, 2>;

/// Sliding-window geometry of a cross-correlation from an [n, c, h, w] input
/// to an [n, *, out_h, out_w] output.
struct ConvGeometry {
  std::size_t n, c, h, w;
  Pair kernel, stride, padding;
  std::size_t out_h, out_w;

  std::size_t rows() const { return c * kernel[0] * kernel[1]; }
  std::size_t cols() const { return n * out_h * out_w; }
};

inline std::size_t conv_output_size(std::size_t in, std::size_t k, std::size_t s, std::size_t p) {
  acgan::detail::require(s > 0, "convolution stride must be positive");
  acgan::detail::require(in + 2 * p >= k, "kernel " + std::to_string(k) + " larger than padded input " +
                                              std::to_string(in + 2 * p));
  return (in + 2 * p - k) / s + 1;
}

/// Output size of a transposed convolution: (in - 1) * s - 2p + k + output_padding.
inline std::size_t transposed_conv_output_size(std::size_t in, std::size_t k, std::size_t s, std::size_t p,
                                               std::size_t output_padding) {
  const auto size = static_cast<std::int64_t>((in - 1) * s + k + output_padding) - 2 * static_cast<std::int64_t>(p);
  acgan::detail::require(size > 0, "transposed convolution output size is not positive");
  return static_cast<std::size_t>(size);
}

namespace impl {

/// Output columns j whose input column j * s + k - p lies inside [0, w).
struct ValidRange {
  std::size_t lo, hi;
};

inline ValidRange valid_range(std::size_t out, std::size_t w, std::size_t s, std::size_t k, std::size_t p) {
  const auto lo_num = static_cast<std::int64_t>(p) - static_cast<std::int64_t>(k);
  const std::size_t lo = lo_num > 0 ? static_cast<std::size_t>((lo_num + static_cast<std::int64_t>(s) - 1) /
                                                               static_cast<std::int64_t>(s))
                                    : 0;
  const auto hi_num = static_cast<std::int64_t>(w) - 1 + lo_num;
  const std::size_t hi = hi_num < 0 ? 0 : std::min(out, static_cast<std::size_t>(hi_num) / s + 1);
  return {std::min(lo, out), std::max(std::min(lo, out), hi)};
}

/// col[(c, ki, kj), (n, i, j)] = x[n, c, i*s + ki - p, j*s + kj - p], zero outside the image.
template <class T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const std::size_t cols = g.cols();
  const std::size_t kh = g.kernel[0], kw = g.kernel[1], sw = g.stride[1];
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < kh; ++ki) {
      const ValidRange ri = valid_range(g.out_h, g.h, g.stride[0], ki, g.padding[0]);
      for (std::size_t kj = 0; kj < kw; ++kj) {
        const ValidRange rj = valid_range(g.out_w, g.w, sw, kj, g.padding[1]);
        const auto shift = static_cast<std::ptrdiff_t>(kj) - static_cast<std::ptrdiff_t>(g.padding[1]);
        T* dst = col + ((c * kh + ki) * kw + kj) * cols;
        for (std::size_t n = 0; n < g.n; ++n) {
          const T* plane = x + (n * g.c + c) * g.h * g.w;
          for (std::size_t i = 0; i < g.out_h; ++i, dst += g.out_w) {
            if (i < ri.lo || i >= ri.hi) {
              std::fill_n(dst, g.out_w, T(0));
              continue;
            }
            const T* row = plane + (i * g.stride[0] + ki - g.padding[0]) * g.w + shift;
            std::fill_n(dst, rj.lo, T(0));
            if (sw == 1) {
              std::copy(row + rj.lo, row + rj.hi, dst + rj.lo);
            } else {
              for (std::size_t j = rj.lo; j < rj.hi; ++j) dst[j] = row[j * sw];
            }
            std::fill(dst + rj.hi, dst + g.out_w, T(0));
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-and-adds columns back into an [n, c, h, w] buffer.
template <class T>
void col2im(const T* col, const ConvGeometry& g, T* x) {
  const std::size_t cols = g.cols();
  const std::size_t kh = g.kernel[0], kw = g.kernel[1], sw = g.stride[1];
  for (std::size_t c = 0; c < g.c; ++c) {
    for (std::size_t ki = 0; ki < kh; ++ki) {
      const ValidRange ri = valid_range(g.out_h, g.h, g.stride[0], ki, g.padding[0]);
      for (std::size_t kj = 0; kj < kw; ++kj) {
        const ValidRange rj = valid_range(g.out_w, g.w, sw, kj, g.padding[1]);
        const auto shift = static_cast<std::ptrdiff_t>(kj) - static_cast<std::ptrdiff_t>(g.padding[1]);
        const T* src = col + ((c * kh + ki) * kw + kj) * cols;
        for (std::size_t n = 0; n < g.n; ++n) {
          T* plane = x + (n * g.c + c) * g.h * g.w;
          for (std::size_t i = 0; i < g.out_h; ++i, src += g.out_w) {
            if (i < ri.lo || i >= ri.hi) continue;
            T* row = plane + (i * g.stride[0] + ki - g.padding[0]) * g.w + shift;
            if (sw == 1) {
              for (std::size_t j = rj.lo; j < rj.hi; ++j) row[j] += src[j];
            } else {
              for (std::size_t j = rj.lo; j < rj.hi; ++j) row[j * sw] += src[j];
            }
          }
        }
      }
    }
  }
}

/// [n, c, hw] <-> [c, n * hw] layout changes used around the GEMMs.
template <class T>
void nchw_to_cm(const T* x, std::size_t n, std::size_t c, std::size_t hw, T* out) {
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) std::copy_n(x + (b * c + ch) * hw, hw, out + ch * n * hw + b * hw);
}

template <class T>
void cm_to_nchw(const T* x, std::size_t n, std::size_t c, std::size_t hw, T* out) {
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t b = 0; b < n; ++b) std::copy_n(x + ch * n * hw + b * hw, hw, out + (b * c + ch) * hw);
}

}  // namespace impl

/// 2-D cross-correlation (no kernel flip). x: [N, C, H, W], kernel: [F, C, kh, kw].
template <class T>
Tensor<T> conv2d(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& kernel, Pair stride, Pair padding) {
  acgan::detail::require(x.rank() == 4 && kernel.rank() == 4 && kernel.dim(1) == x.dim(1),
                         "conv2d: shapes do not conform: x " + to_string(x.shape()) + ", kernel " +
                             to_string(kernel.shape()));
  ConvGeometry geo{x.dim(0), x.dim(1), x.dim(2), x.dim(3), {kernel.dim(2), kernel.dim(3)}, stride, padding, 0, 0};
  geo.out_h = conv_output_size(geo.h, geo.kernel[0], stride[0], padding[0]);
  geo.out_w = conv_output_size(geo.w, geo.kernel[1], stride[1], padding[1]);
  const std::size_t f = kernel.dim(0), rows = geo.rows(), cols = geo.cols(), ohw = geo.out_h * geo.out_w;

  std::vector<T> col(rows * cols);
  impl::im2col(x.data().data(), geo, col.data());
  std::vector<T> out_cm(f * cols);
  impl::as_matrix(std::span<T>(out_cm), f, cols).noalias() =
      impl::as_matrix(kernel.data(), f, rows) * impl::as_matrix(std::span<const T>(col), rows, cols);
  std::vector<T> out(f * cols);
  impl::cm_to_nchw(out_cm.data(), geo.n, f, ohw, out.data());

  const bool tracked = tracks(g, {&x, &kernel});
  auto y = impl::make_output({geo.n, f, geo.out_h, geo.out_w}, std::move(out), tracked);
  if (tracked) {
    // The column buffer is kept for the weight gradient; frozen kernels drop it.
    if (!kernel.requires_grad()) col = {};
    g.record({x, kernel}, y, [x, kernel, y, geo, f, rows, cols, ohw, col = std::move(col)]() mutable {
      std::vector<T> gy_cm(f * cols);
      impl::nchw_to_cm(y.grad().data(), geo.n, f, ohw, gy_cm.data());
      const auto gy = impl::as_matrix(std::span<const T>(gy_cm), f, cols);
      if (kernel.requires_grad()) {
        if (col.empty()) {
          col.resize(rows * cols);
          impl::im2col(x.data().data(), geo, col.data());
        }
        impl::as_matrix(kernel.grad(), f, rows).noalias() +=
            gy * impl::as_matrix(std::span<const T>(col), rows, cols).transpose();
      }
      if (x.requires_grad()) {
        std::vector<T> dcol(rows * cols);
        impl::as_matrix(std::span<T>(dcol), rows, cols).noalias() =
            impl::as_matrix(kernel.data(), f, rows).transpose() * gy;
        impl::col2im(dcol.data(), geo, x.grad().data());
      }
    });
  }
  return y;
}

/// Transposed convolution, the linear adjoint of conv2d with the same window.
/// x: [N, C, H, W], kernel: [C, F, kh, kw] -> [N, F, H', W'] with
/// H' = (H - 1) * s - 2p + kh + output_padding.
template <class T>
Tensor<T> transposed_conv2d(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& kernel, Pair stride, Pair padding,
                            Pair output_padding = {0, 0}) {
  acgan::detail::require(x.rank() == 4 && kernel.rank() == 4 && kernel.dim(0) == x.dim(1),
                         "transposed_conv2d: shapes do not conform: x " + to_string(x.shape()) + ", kernel " +
                             to_string(kernel.shape()));
  acgan::detail::require(output_padding[0] < stride[0] && output_padding[1] < stride[1],
                         "transposed_conv2d: output padding must be smaller than the stride");
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3), f = kernel.dim(1);
  const std::size_t out_h = transposed_conv_output_size(h, kernel.dim(2), stride[0], padding[0], output_padding[0]);
  const std::size_t out_w = transposed_conv_output_size(w, kernel.dim(3), stride[1], padding[1], output_padding[1]);
  // Geometry of the forward convolution this op is the adjoint of: [N, F, H', W'] -> [N, C, H, W].
  ConvGeometry geo{n, f, out_h, out_w, {kernel.dim(2), kernel.dim(3)}, stride, padding, h, w};
  acgan::detail::require(conv_output_size(out_h, geo.kernel[0], stride[0], padding[0]) == h &&
                             conv_output_size(out_w, geo.kernel[1], stride[1], padding[1]) == w,
                         "transposed_conv2d: inconsistent geometry");
  const std::size_t rows = geo.rows(), cols = geo.cols(), hw = h * w;

  std::vector<T> x_cm(c * cols);
  impl::nchw_to_cm(x.data().data(), n, c, hw, x_cm.data());
  std::vector<T> col(rows * cols);
  impl::as_matrix(std::span<T>(col), rows, cols).noalias() =
      impl::as_matrix(kernel.data(), c, rows).transpose() * impl::as_matrix(std::span<const T>(x_cm), c, cols);
  std::vector<T> out(n * f * out_h * out_w, T(0));
  impl::col2im(col.data(), geo, out.data());

  const bool tracked = tracks(g, {&x, &kernel});
  auto y = impl::make_output({n, f, out_h, out_w}, std::move(out), tracked);
  if (tracked) {
    g.record({x, kernel}, y, [x, kernel, y, geo, c, rows, cols, hw, x_cm = std::move(x_cm)]() mutable {
      std::vector<T> dcol(rows * cols);
      impl::im2col(y.grad().data(), geo, dcol.data());
      const auto dcol_m = impl::as_matrix(std::span<const T>(dcol), rows, cols);
      if (kernel.requires_grad())
        impl::as_matrix(kernel.grad(), c, rows).noalias() +=
            impl::as_matrix(std::span<const T>(x_cm), c, cols) * dcol_m.transpose();
      if (x.requires_grad()) {
        std::vector<T> dx_cm(c * cols);
        impl::as_matrix(std::span<T>(dx_cm), c, cols).noalias() = impl::as_matrix(kernel.data(), c, rows) * dcol_m;
        std::vector<T> dx(c * cols);
        impl::cm_to_nchw(dx_cm.data(), geo.n, c, hw, dx.data());
        auto gx = x.grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += dx[i];
      }
    });
  }
  return y;
}

/// Adds a per-channel bias to [N, C, ...] (or [N, C]).
template <class T>
Tensor<T> add_channel_bias(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& bias) {
  acgan::detail::require(x.rank() >= 2 && bias.rank() == 1 && bias.dim(0) == x.dim(1),
                         "add_channel_bias: bias " + to_string(bias.shape()) + " does not match " +
                             to_string(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1), inner = x.size() / (n * c);
  std::vector<T> out(x.values());
  const auto b = bias.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      T* p = out.data() + (i * c + ch) * inner;
      for (std::size_t k = 0; k < inner; ++k) p[k] += b[ch];
    }
  const bool tracked = tracks(g, {&x, &bias});
  auto y = impl::make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x, bias}, y, [x, bias, y, n, c, inner]() mutable {
      const auto gy = y.grad();
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const T* p = gy.data() + (i * c + ch) * inner;
            T acc = 0;
            for (std::size_t k = 0; k < inner; ++k) acc += p[k];
            gb[ch] += acc;
          }
      }
    });
  }
  return y;
}

}  // namespace acgan::nn
