#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "acgan/nn/graph.hpp"

namespace acgan::nn {

namespace impl {

template <class T>
Tensor<T> make_output(Shape shape, std::vector<T> values, bool tracked) {
  return Tensor<T>(std::move(shape), std::move(values), tracked);
}

/// Elementwise map y = f(x) with dy/dx = df(x, y).
template <class T, class F, class DF>
Tensor<T> unary(Graph<T>& g, const Tensor<T>& x, F f, DF df) {
  std::vector<T> out(x.size());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  const bool tracked = tracks(g, {&x});
  auto y = make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y, df]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      const auto xv = x.data();
      const auto yv = y.data();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
    });
  }
  return y;
}

inline void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) acgan::detail::fail(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
}

}  // namespace impl

template <class T>
Tensor<T> add(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  impl::require_same_shape(a.shape(), b.shape(), "add");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  const bool tracked = tracks(g, {&a, &b});
  auto y = impl::make_output(a.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({a, b}, y, [a, b, y]() mutable {
      const auto gy = y.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i];
      }
    });
  }
  return y;
}

template <class T>
Tensor<T> mul(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  impl::require_same_shape(a.shape(), b.shape(), "mul");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  const bool tracked = tracks(g, {&a, &b});
  auto y = impl::make_output(a.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({a, b}, y, [a, b, y]() mutable {
      const auto gy = y.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * b.data()[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * a.data()[i];
      }
    });
  }
  return y;
}

template <class T>
Tensor<T> scale(Graph<T>& g, const Tensor<T>& x, T factor) {
  return impl::unary(
      g, x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <class T>
Tensor<T> add_scalar(Graph<T>& g, const Tensor<T>& x, T offset) {
  return impl::unary(
      g, x, [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <class T>
Tensor<T> square(Graph<T>& g, const Tensor<T>& x) {
  return impl::unary(
      g, x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

/// 1 - x, elementwise.
template <class T>
Tensor<T> one_minus(Graph<T>& g, const Tensor<T>& x) {
  return impl::unary(
      g, x, [](T v) { return T(1) - v; }, [](T, T) { return T(-1); });
}

/// log(clamp(x, lo, hi)). The gradient is zero wherever the clamp is active.
template <class T>
Tensor<T> clamped_log(Graph<T>& g, const Tensor<T>& x, T lo, T hi) {
  return impl::unary(
      g, x, [lo, hi](T v) { return std::log(std::clamp(v, lo, hi)); },
      [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) / v : T(0); });
}

template <class T>
Tensor<T> sum(Graph<T>& g, const Tensor<T>& x) {
  double acc = 0;
  for (T v : x.data()) acc += v;
  const bool tracked = tracks(g, {&x});
  auto y = Tensor<T>::scalar(static_cast<T>(acc), tracked);
  if (tracked) {
    g.record({x}, y, [x, y]() mutable {
      const T gy = y.grad()[0];
      for (auto& v : x.grad()) v += gy;
    });
  }
  return y;
}

template <class T>
Tensor<T> mean(Graph<T>& g, const Tensor<T>& x) {
  return scale(g, sum(g, x), T(1) / static_cast<T>(x.size()));
}

/// Same values under a new shape with equal element count.
template <class T>
Tensor<T> reshape(Graph<T>& g, const Tensor<T>& x, Shape shape) {
  acgan::detail::require(numel(shape) == x.size(),
                         "reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output(std::move(shape), x.values(), tracked);
  if (tracked) {
    g.record({x}, y, [x, y]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

/// [N, A] ++ [N, B] -> [N, A + B].
template <class T>
Tensor<T> concat_cols(Graph<T>& g, const Tensor<T>& a, const Tensor<T>& b) {
  acgan::detail::require(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0),
                         "concat_cols: need matching [N, *] inputs, got " + to_string(a.shape()) + " and " +
                             to_string(b.shape()));
  const std::size_t n = a.dim(0), wa = a.dim(1), wb = b.dim(1), w = wa + wb;
  std::vector<T> out(n * w);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(a.data().begin() + r * wa, wa, out.begin() + r * w);
    std::copy_n(b.data().begin() + r * wb, wb, out.begin() + r * w + wa);
  }
  const bool tracked = tracks(g, {&a, &b});
  auto y = impl::make_output({n, w}, std::move(out), tracked);
  if (tracked) {
    g.record({a, b}, y, [a, b, y, n, wa, wb, w]() mutable {
      const auto gy = y.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < wa; ++c) ga[r * wa + c] += gy[r * w + c];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < wb; ++c) gb[r * wb + c] += gy[r * w + wa + c];
      }
    });
  }
  return y;
}

/// Column range [begin, end) of an [N, M] tensor.
template <class T>
Tensor<T> columns(Graph<T>& g, const Tensor<T>& x, std::size_t begin, std::size_t end) {
  acgan::detail::require(x.rank() == 2 && begin < end && end <= x.dim(1),
                         "columns: invalid range for shape " + to_string(x.shape()));
  const std::size_t n = x.dim(0), m = x.dim(1), w = end - begin;
  std::vector<T> out(n * w);
  for (std::size_t r = 0; r < n; ++r)
    std::copy_n(x.data().begin() + r * m + begin, w, out.begin() + r * w);
  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output({n, w}, std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y, n, m, w, begin]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) gx[r * m + begin + c] += gy[r * w + c];
    });
  }
  return y;
}

/// Row-wise gather: out[i] = x[i, index[i]].
template <class T>
Tensor<T> pick(Graph<T>& g, const Tensor<T>& x, std::span<const int> index) {
  acgan::detail::require(x.rank() == 2 && index.size() == x.dim(0),
                         "pick: need [N, K] input and N indices, got " + to_string(x.shape()));
  const std::size_t n = x.dim(0), k = x.dim(1);
  std::vector<std::size_t> idx(n);
  for (std::size_t r = 0; r < n; ++r) {
    acgan::detail::require(index[r] >= 0 && static_cast<std::size_t>(index[r]) < k,
                           "pick: index " + std::to_string(index[r]) + " outside [0, " + std::to_string(k) + ")");
    idx[r] = static_cast<std::size_t>(index[r]);
  }
  std::vector<T> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = x.data()[r * k + idx[r]];
  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output({n}, std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y, idx = std::move(idx), k]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      for (std::size_t r = 0; r < idx.size(); ++r) gx[r * k + idx[r]] += gy[r];
    });
  }
  return y;
}

}  // namespace acgan::nn
