#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "acgan/nn/tensor.hpp"

namespace acgan::metrics {

/// Grayscale image in the [0, L] range, row-major.
struct Plane {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

struct SSIMParams {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  std::array<double, 5> weights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  /// Normalized 1-D Gaussian; the 2-D window is its outer product.
  std::vector<double> kernel() const {
    std::vector<double> k(window);
    const double centre = (static_cast<double>(window) - 1.0) / 2.0;
    double total = 0;
    for (std::size_t i = 0; i < window; ++i) {
      const double d = static_cast<double>(i) - centre;
      k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      total += k[i];
    }
    for (auto& v : k) v /= total;
    return k;
  }

  /// Deepest pyramid (at most weights.size() scales) whose coarsest level still
  /// fits one window; 0 if even the full image is too small.
  std::size_t scales_for(std::size_t h, std::size_t w) const {
    std::size_t m = 0, side = std::min(h, w);
    while (m < weights.size() && side >= window) {
      ++m;
      side /= 2;
    }
    return m;
  }
};

/// Luma (0.299 R + 0.587 G + 0.114 B) of one [C, H, W] image in (-1, 1),
/// mapped to [0, 255]. Single-channel input is mapped directly.
template <class T>
Plane to_luma(std::span<const T> chw, std::size_t channels, std::size_t h, std::size_t w) {
  detail::require(channels == 1 || channels == 3, "luma: expected 1 or 3 channels");
  detail::require(chw.size() == channels * h * w, "luma: size mismatch");
  Plane p{h, w, std::vector<double>(h * w)};
  const std::size_t hw = h * w;
  for (std::size_t i = 0; i < hw; ++i) {
    const double y = channels == 1 ? static_cast<double>(chw[i])
                                   : 0.299 * static_cast<double>(chw[i]) + 0.587 * static_cast<double>(chw[hw + i]) +
                                         0.114 * static_cast<double>(chw[2 * hw + i]);
    p.v[i] = (y + 1.0) * 127.5;
  }
  return p;
}

/// Luma planes of every image in an [N, C, H, W] batch.
template <class T>
std::vector<Plane> to_luma(const nn::Tensor<T>& images) {
  detail::require(images.rank() == 4, "luma: expected [N, C, H, W], got " + nn::to_string(images.shape()));
  const std::size_t n = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
  std::vector<Plane> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_luma(images.data().subspan(i * c * h * w, c * h * w), c, h, w));
  return out;
}

/// Mean SSIM and mean contrast-structure term over all valid window positions.
struct SSIMTerms {
  double ssim = 0;
  double cs = 0;
};

namespace impl {

/// 'Valid' separable filtering with kernel k.
inline Plane filter_valid(const Plane& p, const std::vector<double>& k) {
  const std::size_t n = k.size(), oh = p.h - n + 1, ow = p.w - n + 1;
  std::vector<double> tmp(p.h * ow);
  for (std::size_t y = 0; y < p.h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * p.v[y * p.w + x + i];
      tmp[y * ow + x] = s;
    }
  Plane out{oh, ow, std::vector<double>(oh * ow)};
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * tmp[(y + i) * ow + x];
      out.v[y * ow + x] = s;
    }
  return out;
}

inline Plane product(const Plane& a, const Plane& b) {
  Plane out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

/// 2x2 average pooling (odd trailing rows/columns dropped).
inline Plane downsample(const Plane& p) {
  Plane out{p.h / 2, p.w / 2, {}};
  out.v.resize(out.h * out.w);
  for (std::size_t y = 0; y < out.h; ++y)
    for (std::size_t x = 0; x < out.w; ++x)
      out.v[y * out.w + x] =
          0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1));
  return out;
}

}  // namespace impl

inline SSIMTerms ssim_terms(const Plane& x, const Plane& y, const SSIMParams& params = {}) {
  detail::require(x.h == y.h && x.w == y.w, "ssim: images differ in size");
  detail::require(x.h >= params.window && x.w >= params.window,
                  "ssim: image " + std::to_string(x.h) + "x" + std::to_string(x.w) + " smaller than the " +
                      std::to_string(params.window) + "x" + std::to_string(params.window) + " window");
  const auto k = params.kernel();
  const Plane mx = impl::filter_valid(x, k), my = impl::filter_valid(y, k);
  const Plane sxx = impl::filter_valid(impl::product(x, x), k);
  const Plane syy = impl::filter_valid(impl::product(y, y), k);
  const Plane sxy = impl::filter_valid(impl::product(x, y), k);
  const double c1 = params.c1(), c2 = params.c2();
  double total_ssim = 0, total_cs = 0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double ux = mx.v[i], uy = my.v[i];
    const double vx = sxx.v[i] - ux * ux, vy = syy.v[i] - uy * uy, cov = sxy.v[i] - ux * uy;
    const double cs = (2.0 * cov + c2) / (vx + vy + c2);
    const double l = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
    total_ssim += l * cs;
    total_cs += cs;
  }
  const double count = static_cast<double>(mx.v.size());
  return {total_ssim / count, total_cs / count};
}

/// Mean local SSIM over valid window positions.
inline double ssim(const Plane& x, const Plane& y, const SSIMParams& params = {}) {
  return ssim_terms(x, y, params).ssim;
}

/// Multi-scale SSIM in [0, 1]. The pyramid depth is the largest feasible for
/// the image size (see SSIMParams::scales_for); weights of the used scales are
/// renormalized to sum to 1. Negative per-scale terms clamp to 0.
inline double ms_ssim(const Plane& x, const Plane& y, const SSIMParams& params = {}) {
  detail::require(x.h == y.h && x.w == y.w, "ms_ssim: images differ in size");
  const std::size_t m = params.scales_for(x.h, x.w);
  detail::require(m >= 1, "ms_ssim: image smaller than the " + std::to_string(params.window) + "-pixel window");
  double weight_total = 0;
  for (std::size_t j = 0; j < m; ++j) weight_total += params.weights[j];
  double score = 1.0;
  Plane a = x, b = y;
  for (std::size_t j = 0; j < m; ++j) {
    const auto t = ssim_terms(a, b, params);
    const double term = j + 1 == m ? t.ssim : t.cs;
    score *= std::pow(std::max(term, 0.0), params.weights[j] / weight_total);
    if (j + 1 < m) {
      a = impl::downsample(a);
      b = impl::downsample(b);
    }
  }
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace acgan::metrics
