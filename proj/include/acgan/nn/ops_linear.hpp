#pragma once

#include <Eigen/Core>

#include "acgan/nn/ops_basic.hpp"

namespace acgan::nn {

namespace impl {

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMatrix<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMatrix<T>>;

template <class T>
ConstMatMap<T> as_matrix(std::span<const T> s, std::size_t rows, std::size_t cols) {
  return ConstMatMap<T>(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <class T>
MatMap<T> as_matrix(std::span<T> s, std::size_t rows, std::size_t cols) {
  return MatMap<T>(s.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace impl

/// y = x * weight + bias for x: [batch, in], weight: [in, out], bias: [out].
template <class T>
Tensor<T> linear(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  acgan::detail::require(x.rank() == 2 && weight.rank() == 2 && bias.rank() == 1 && x.dim(1) == weight.dim(0) &&
                             bias.dim(0) == weight.dim(1),
                         "linear: shapes do not conform: x " + to_string(x.shape()) + ", weight " +
                             to_string(weight.shape()) + ", bias " + to_string(bias.shape()));
  const std::size_t n = x.dim(0), in = x.dim(1), out = weight.dim(1);
  std::vector<T> values(n * out);
  auto y_mat = impl::as_matrix<T>(std::span<T>(values), n, out);
  y_mat.noalias() = impl::as_matrix(x.data(), n, in) * impl::as_matrix(weight.data(), in, out);
  const auto b = bias.data();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < out; ++c) values[r * out + c] += b[c];

  const bool tracked = tracks(g, {&x, &weight, &bias});
  auto y = impl::make_output({n, out}, std::move(values), tracked);
  if (tracked) {
    g.record({x, weight, bias}, y, [x, weight, bias, y, n, in, out]() mutable {
      const auto gy = impl::as_matrix(std::span<const T>(y.grad()), n, out);
      if (x.requires_grad())
        impl::as_matrix(x.grad(), n, in).noalias() += gy * impl::as_matrix(weight.data(), in, out).transpose();
      if (weight.requires_grad())
        impl::as_matrix(weight.grad(), in, out).noalias() += impl::as_matrix(x.data(), n, in).transpose() * gy;
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t c = 0; c < out; ++c) gb[c] += gy(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    });
  }
  return y;
}

}  // namespace acgan::nn
