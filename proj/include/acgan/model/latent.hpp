#pragma once

#include <optional>
#include <span>
#include <vector>

#include "acgan/core/rng.hpp"
#include "acgan/nn/tensor.hpp"

namespace acgan {

/// Generator input: noise z, class labels, and their one-hot encoding.
template <class T = float>
struct LatentBatch {
  nn::Tensor<T> z;        // [N, z_dim]
  std::vector<int> labels;
  nn::Tensor<T> one_hot;  // [N, K]

  std::size_t size() const { return labels.size(); }

  /// [z | one_hot], width z_dim + K.
  nn::Tensor<T> input() const {
    const std::size_t n = size(), zd = z.dim(1), k = one_hot.dim(1);
    std::vector<T> v(n * (zd + k));
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(z.data().begin() + static_cast<std::ptrdiff_t>(i * zd), zd, v.begin() + static_cast<std::ptrdiff_t>(i * (zd + k)));
      std::copy_n(one_hot.data().begin() + static_cast<std::ptrdiff_t>(i * k), k,
                  v.begin() + static_cast<std::ptrdiff_t>(i * (zd + k) + zd));
    }
    return nn::Tensor<T>({n, zd + k}, std::move(v));
  }
};

template <class T = float>
nn::Tensor<T> one_hot(std::span<const int> labels, std::size_t classes) {
  detail::require(!labels.empty(), "one_hot: no labels");
  std::vector<T> v(labels.size() * classes, T(0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    detail::require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
                    "label " + std::to_string(labels[i]) + " out of range for " + std::to_string(classes) + " classes");
    v[i * classes + static_cast<std::size_t>(labels[i])] = T(1);
  }
  return nn::Tensor<T>({labels.size(), classes}, std::move(v));
}

/// Pairs given noise rows with labels.
template <class T = float>
LatentBatch<T> make_latent(nn::Tensor<T> z, std::vector<int> labels, std::size_t classes) {
  detail::require(z.rank() == 2 && z.dim(0) == labels.size(), "make_latent: need one label per noise row");
  auto oh = one_hot<T>(labels, classes);
  return {std::move(z), std::move(labels), std::move(oh)};
}

/// z ~ N(0, 1); labels uniform over [0, K) unless given explicitly.
template <class T = float>
LatentBatch<T> sample_latent(std::size_t n, std::size_t classes, std::size_t z_dim, Rng& rng,
                             std::optional<std::span<const int>> labels = std::nullopt) {
  detail::require(n >= 1 && classes >= 1 && z_dim >= 1, "sample_latent: n, K and z_dim must be >= 1");
  std::vector<int> c;
  if (labels) {
    detail::require(labels->size() == n, "sample_latent: expected " + std::to_string(n) + " labels");
    c.assign(labels->begin(), labels->end());
  } else {
    c.resize(n);
    for (auto& v : c) v = static_cast<int>(rng.below(classes));
  }
  std::vector<T> zv(n * z_dim);
  rng.fill_normal(std::span<T>(zv));
  return make_latent<T>(nn::Tensor<T>({n, z_dim}, std::move(zv)), std::move(c), classes);
}

}  // namespace acgan
