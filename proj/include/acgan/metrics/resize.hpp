#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "acgan/nn/tensor.hpp"

namespace acgan::metrics {

namespace impl {

/// Source taps for one output coordinate with half-pixel-centre alignment:
/// src = (d + 0.5) * in / out - 0.5, clamped to [0, in - 1].
struct Tap {
  std::size_t i0, i1;
  double f;  // weight of i1
};

inline std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t d = 0; d < out; ++d) {
    const double src = std::clamp((static_cast<double>(d) + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    t[d] = {i0, std::min(i0 + 1, in - 1), src - static_cast<double>(i0)};
  }
  return t;
}

template <class T>
void resize_plane(const T* src, std::size_t h, std::size_t w, T* dst, std::size_t h2, std::size_t w2) {
  if (h == h2 && w == w2) {
    std::copy_n(src, h * w, dst);
    return;
  }
  const auto tx = taps(w, w2), ty = taps(h, h2);
  std::vector<double> rows(h * w2);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w2; ++x) {
      const auto& t = tx[x];
      rows[y * w2 + x] = (1.0 - t.f) * src[y * w + t.i0] + t.f * src[y * w + t.i1];
    }
  for (std::size_t y = 0; y < h2; ++y) {
    const auto& t = ty[y];
    for (std::size_t x = 0; x < w2; ++x)
      dst[y * w2 + x] = static_cast<T>((1.0 - t.f) * rows[t.i0 * w2 + x] + t.f * rows[t.i1 * w2 + x]);
  }
}

}  // namespace impl

/// Separable bilinear resize of every channel plane of a [C, H, W] or
/// [N, C, H, W] tensor. Same-size resizes return an exact copy.
template <class T>
nn::Tensor<T> bilinear_resize(const nn::Tensor<T>& images, std::size_t out_h, std::size_t out_w) {
  detail::require(out_h >= 1 && out_w >= 1, "bilinear_resize: target size must be at least 1x1");
  detail::require(images.rank() == 3 || images.rank() == 4,
                  "bilinear_resize: expected [C, H, W] or [N, C, H, W], got " + nn::to_string(images.shape()));
  const std::size_t r = images.rank(), h = images.dim(r - 2), w = images.dim(r - 1);
  const std::size_t planes = images.size() / (h * w);
  std::vector<T> out(planes * out_h * out_w);
  const T* src = images.data().data();
  for (std::size_t p = 0; p < planes; ++p)
    impl::resize_plane(src + p * h * w, h, w, out.data() + p * out_h * out_w, out_h, out_w);
  nn::Shape shape = images.shape();
  shape[r - 2] = out_h;
  shape[r - 1] = out_w;
  return nn::Tensor<T>(std::move(shape), std::move(out));
}

/// Bilinear down to low_res x low_res, then back up to final_res x final_res.
template <class T>
nn::Tensor<T> reduce_then_restore(const nn::Tensor<T>& images, std::size_t low_res, std::size_t final_res) {
  detail::require(low_res >= 1 && low_res <= final_res,
                  "reduce_then_restore: need 1 <= low_res (" + std::to_string(low_res) + ") <= final_res (" +
                      std::to_string(final_res) + ")");
  const std::size_t r = images.rank();
  detail::require(r >= 3, "reduce_then_restore: expected image tensor");
  if (low_res == final_res && images.dim(r - 2) == final_res && images.dim(r - 1) == final_res) return images;
  return bilinear_resize(bilinear_resize(images, low_res, low_res), final_res, final_res);
}

}  // namespace acgan::metrics
