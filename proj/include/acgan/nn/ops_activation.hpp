#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "acgan/nn/ops_basic.hpp"

namespace acgan::nn {

template <class T>
Tensor<T> relu(Graph<T>& g, const Tensor<T>& x) {
  return impl::unary(
      g, x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

/// Leaky ReLU. At exactly zero the derivative is taken from the positive side (1).
template <class T>
Tensor<T> leaky_relu(Graph<T>& g, const Tensor<T>& x, T slope) {
  return impl::unary(
      g, x, [slope](T v) { return v >= T(0) ? v : slope * v; },
      [slope](T v, T) { return v >= T(0) ? T(1) : slope; });
}

template <class T>
Tensor<T> tanh(Graph<T>& g, const Tensor<T>& x) {
  return impl::unary(
      g, x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> sigmoid(Graph<T>& g, const Tensor<T>& x) {
  return impl::unary(
      g, x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

/// Softmax normalized along `axis`.
template <class T>
Tensor<T> softmax(Graph<T>& g, const Tensor<T>& x, std::size_t axis) {
  acgan::detail::require(axis < x.rank(), "softmax: axis " + std::to_string(axis) + " invalid for shape " +
                                              to_string(x.shape()));
  if (!x.all_finite()) throw NumericError("softmax: non-finite input");
  const auto& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];

  std::vector<T> out(x.size());
  const auto in = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * len * inner + i;
      T mx = in[base];
      for (std::size_t k = 1; k < len; ++k) mx = std::max(mx, in[base + k * inner]);
      double total = 0;
      for (std::size_t k = 0; k < len; ++k) {
        const T e = std::exp(in[base + k * inner] - mx);
        out[base + k * inner] = e;
        total += e;
      }
      const T inv = static_cast<T>(1.0 / total);
      for (std::size_t k = 0; k < len; ++k) out[base + k * inner] *= inv;
    }
  }

  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y, outer, inner, len]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      const auto yv = y.data();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
          const std::size_t base = o * len * inner + i;
          T dot = 0;
          for (std::size_t k = 0; k < len; ++k) dot += gy[base + k * inner] * yv[base + k * inner];
          for (std::size_t k = 0; k < len; ++k) {
            const std::size_t j = base + k * inner;
            gx[j] += yv[j] * (gy[j] - dot);
          }
        }
      }
    });
  }
  return y;
}

struct Relu {};
struct LeakyRelu {
  double slope = 0.2;
};
struct Tanh {};
struct Sigmoid {};
struct Softmax {
  std::size_t axis = 1;
};
struct Identity {};

using Activation = std::variant<Identity, Relu, LeakyRelu, Tanh, Sigmoid, Softmax>;

template <class T>
Tensor<T> activation(Graph<T>& g, const Tensor<T>& x, const Activation& kind) {
  if (!x.all_finite()) throw NumericError("activation: non-finite input");
  return std::visit(
      [&](const auto& k) -> Tensor<T> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Identity>) return x;
        else if constexpr (std::is_same_v<K, Relu>) return relu(g, x);
        else if constexpr (std::is_same_v<K, LeakyRelu>) return leaky_relu(g, x, static_cast<T>(k.slope));
        else if constexpr (std::is_same_v<K, Tanh>) return tanh(g, x);
        else if constexpr (std::is_same_v<K, Sigmoid>) return sigmoid(g, x);
        else return softmax(g, x, k.axis);
      },
      kind);
}

inline std::string activation_name(const Activation& a) {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Identity>) return "identity";
        else if constexpr (std::is_same_v<K, Relu>) return "relu";
        else if constexpr (std::is_same_v<K, LeakyRelu>) return "leaky_relu";
        else if constexpr (std::is_same_v<K, Tanh>) return "tanh";
        else if constexpr (std::is_same_v<K, Sigmoid>) return "sigmoid";
        else return "softmax";
      },
      a);
}

}  // namespace acgan::nn
