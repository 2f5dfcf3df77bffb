#pragma once

#include <cmath>
#include <numbers>
#include <type_traits>

#include <Eigen/Core>

#include "acgan/core/rng.hpp"
#include "acgan/nn/ops_basic.hpp"

namespace acgan::nn {

namespace impl {

/// N(0, sigma^2) samples for float tensors: Box-Muller on two 24-bit uniforms
/// cut from each 64-bit draw, evaluated with Eigen's vectorized log/sin/cos.
/// Double tensors go through Rng::fill_normal at full precision.
template <class T>
void fill_noise(Rng& rng, std::span<T> out, double sigma) {
  if constexpr (!std::is_same_v<T, float>) {
    rng.fill_normal(out, sigma);
  } else {
    constexpr std::size_t chunk = 2048;
    std::vector<std::uint64_t> raw(chunk);
    Eigen::ArrayXf u1(chunk), u2(chunk);
    for (std::size_t off = 0; off < out.size(); off += 2 * chunk) {
      const std::size_t pairs = std::min(chunk, (out.size() - off + 1) / 2);
      rng.fill_u64(std::span<std::uint64_t>(raw.data(), pairs));
      for (std::size_t i = 0; i < pairs; ++i) {
        u1[static_cast<Eigen::Index>(i)] = static_cast<float>((raw[i] >> 40) + 1) * 0x1.0p-24f;  // (0, 1]
        u2[static_cast<Eigen::Index>(i)] = static_cast<float>(raw[i] & 0xffffff) * 0x1.0p-24f;   // [0, 1)
      }
      const auto n = static_cast<Eigen::Index>(pairs);
      const Eigen::ArrayXf r = (-2.0f * u1.head(n).log()).sqrt() * static_cast<float>(sigma);
      const Eigen::ArrayXf theta = (2.0f * std::numbers::pi_v<float>) * u2.head(n) - std::numbers::pi_v<float>;
      const Eigen::ArrayXf a = r * theta.cos(), b = r * theta.sin();
      const std::size_t first = std::min(pairs, out.size() - off);
      std::copy_n(a.data(), first, out.data() + off);
      const std::size_t second = std::min(pairs, out.size() - off - first);
      std::copy_n(b.data(), second, out.data() + off + first);
    }
  }
}

}  // namespace impl

/// Running statistics of a batch-norm layer, one entry per channel.
template <class T>
struct BatchNormStats {
  std::vector<T> mean;
  std::vector<T> var;

  static BatchNormStats fresh(std::size_t channels) {
    return {std::vector<T>(channels, T(0)), std::vector<T>(channels, T(1))};
  }

  bool operator==(const BatchNormStats&) const = default;
};

/// Per-channel batch normalization over [N, C] or [N, C, H, W].
///
/// Train mode normalizes with the (biased) batch statistics, differentiates
/// through them, and folds them into `running` with
/// running = (1 - momentum) * running + momentum * batch (unbiased variance).
/// Eval mode normalizes with `running` and leaves it untouched.
template <class T>
Tensor<T> batch_norm(Graph<T>& g, const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, Mode mode,
                     BatchNormStats<T>& running, T momentum, T eps) {
  acgan::detail::require(x.rank() >= 2, "batch_norm: need [N, C, ...] input, got " + to_string(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1), inner = x.size() / (n * c), count = n * inner;
  acgan::detail::require(gamma.size() == c && beta.size() == c && running.mean.size() == c && running.var.size() == c,
                         "batch_norm: parameter size does not match channel count " + std::to_string(c));
  acgan::detail::require(eps > T(0), "batch_norm: eps must be positive");
  acgan::detail::require(mode == Mode::eval || n >= 2, "batch_norm: train mode needs a batch of at least 2");

  std::vector<T> mu(c), inv_std(c);
  if (mode == Mode::train) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = 0, s2 = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x.data().data() + (i * c + ch) * inner;
        for (std::size_t k = 0; k < inner; ++k) s += p[k];
      }
      const double m = s / static_cast<double>(count);
      for (std::size_t i = 0; i < n; ++i) {
        const T* p = x.data().data() + (i * c + ch) * inner;
        for (std::size_t k = 0; k < inner; ++k) {
          const double d = p[k] - m;
          s2 += d * d;
        }
      }
      const double var = s2 / static_cast<double>(count);
      mu[ch] = static_cast<T>(m);
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      const double unbiased = count > 1 ? s2 / static_cast<double>(count - 1) : var;
      running.mean[ch] = static_cast<T>((1.0 - momentum) * running.mean[ch] + momentum * m);
      running.var[ch] = static_cast<T>((1.0 - momentum) * running.var[ch] + momentum * unbiased);
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mu[ch] = running.mean[ch];
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(running.var[ch]) + eps));
    }
  }

  std::vector<T> xhat(x.size()), out(x.size());
  const auto gm = gamma.data();
  const auto bt = beta.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t base = (i * c + ch) * inner;
      for (std::size_t k = 0; k < inner; ++k) {
        const T v = (x.data()[base + k] - mu[ch]) * inv_std[ch];
        xhat[base + k] = v;
        out[base + k] = gm[ch] * v + bt[ch];
      }
    }

  const bool tracked = tracks(g, {&x, &gamma, &beta});
  auto y = impl::make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x, gamma, beta}, y,
             [x, gamma, beta, y, mode, n, c, inner, count, inv_std = std::move(inv_std),
              xhat = std::move(xhat)]() mutable {
               const auto gy = y.grad();
               std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
               for (std::size_t i = 0; i < n; ++i)
                 for (std::size_t ch = 0; ch < c; ++ch) {
                   const std::size_t base = (i * c + ch) * inner;
                   for (std::size_t k = 0; k < inner; ++k) {
                     sum_dy[ch] += gy[base + k];
                     sum_dy_xhat[ch] += gy[base + k] * xhat[base + k];
                   }
                 }
               if (gamma.requires_grad()) {
                 auto gg = gamma.grad();
                 for (std::size_t ch = 0; ch < c; ++ch) gg[ch] += static_cast<T>(sum_dy_xhat[ch]);
               }
               if (beta.requires_grad()) {
                 auto gb = beta.grad();
                 for (std::size_t ch = 0; ch < c; ++ch) gb[ch] += static_cast<T>(sum_dy[ch]);
               }
               if (!x.requires_grad()) return;
               auto gx = x.grad();
               const auto gm = gamma.data();
               const double inv_count = 1.0 / static_cast<double>(count);
               for (std::size_t i = 0; i < n; ++i)
                 for (std::size_t ch = 0; ch < c; ++ch) {
                   const std::size_t base = (i * c + ch) * inner;
                   const T scale = gm[ch] * inv_std[ch];
                   if (mode == Mode::eval) {
                     for (std::size_t k = 0; k < inner; ++k) gx[base + k] += scale * gy[base + k];
                     continue;
                   }
                   const T mean_dy = static_cast<T>(sum_dy[ch] * inv_count);
                   const T mean_dy_xhat = static_cast<T>(sum_dy_xhat[ch] * inv_count);
                   for (std::size_t k = 0; k < inner; ++k)
                     gx[base + k] += scale * (gy[base + k] - mean_dy - xhat[base + k] * mean_dy_xhat);
                 }
             });
  }
  return y;
}

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate). Eval mode is the identity.
template <class T>
Tensor<T> dropout(Graph<T>& g, const Tensor<T>& x, double rate, Mode mode, Rng& rng) {
  acgan::detail::require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
  if (mode == Mode::eval || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.size());
  std::vector<std::uint64_t> raw(x.size());
  rng.fill_u64(std::span<std::uint64_t>(raw));
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(rate, 53));
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (raw[i] >> 11) < threshold ? T(0) : keep_scale;
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * mask[i];
  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y, mask = std::move(mask)]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * mask[i];
    });
  }
  return y;
}

/// Additive N(0, sigma^2) activation noise in train mode; identity in eval mode.
template <class T>
Tensor<T> gaussian_noise(Graph<T>& g, const Tensor<T>& x, double sigma, Mode mode, Rng& rng) {
  acgan::detail::require(sigma >= 0.0, "gaussian_noise: sigma must be non-negative");
  if (mode == Mode::eval || sigma == 0.0) return x;
  std::vector<T> out(x.size());
  impl::fill_noise(rng, std::span<T>(out), sigma);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += x.data()[i];
  const bool tracked = tracks(g, {&x});
  auto y = impl::make_output(x.shape(), std::move(out), tracked);
  if (tracked) {
    g.record({x}, y, [x, y]() mutable {
      auto gx = x.grad();
      const auto gy = y.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

}  // namespace acgan::nn
