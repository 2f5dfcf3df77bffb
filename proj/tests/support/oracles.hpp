#pragma once

// Independent reference implementations used only by the tests. None of these
// share code paths with the library implementations they check.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Direct sliding-window cross-correlation for a single image.
/// x: [c][h][w], k: [f][c][kh][kw] -> [f][ho][wo].
inline std::vector<double> conv2d(const std::vector<double>& x, std::size_t c, std::size_t h, std::size_t w,
                                  const std::vector<double>& k, std::size_t f, std::size_t kh, std::size_t kw,
                                  std::size_t s, std::size_t p, std::size_t& ho, std::size_t& wo) {
  ho = (h + 2 * p - kh) / s + 1;
  wo = (w + 2 * p - kw) / s + 1;
  std::vector<double> out(f * ho * wo, 0.0);
  for (std::size_t o = 0; o < f; ++o)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        double acc = 0;
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t a = 0; a < kh; ++a)
            for (std::size_t b = 0; b < kw; ++b) {
              const long r = static_cast<long>(i * s + a) - static_cast<long>(p);
              const long q = static_cast<long>(j * s + b) - static_cast<long>(p);
              if (r < 0 || q < 0 || r >= static_cast<long>(h) || q >= static_cast<long>(w)) continue;
              acc += x[(ch * h + r) * w + q] * k[((o * c + ch) * kh + a) * kw + b];
            }
        out[(o * ho + i) * wo + j] = acc;
      }
  return out;
}

/// Dense matrix of the convolution operator, built column by column from basis images.
/// Returns rows = f*ho*wo, cols = c*h*w, row-major.
inline std::vector<double> conv_matrix(std::size_t c, std::size_t h, std::size_t w, const std::vector<double>& k,
                                       std::size_t f, std::size_t kh, std::size_t kw, std::size_t s, std::size_t p,
                                       std::size_t& rows, std::size_t& cols) {
  cols = c * h * w;
  std::size_t ho = 0, wo = 0;
  std::vector<double> basis(cols, 0.0);
  std::vector<std::vector<double>> columns;
  for (std::size_t i = 0; i < cols; ++i) {
    basis.assign(cols, 0.0);
    basis[i] = 1.0;
    columns.push_back(conv2d(basis, c, h, w, k, f, kh, kw, s, p, ho, wo));
  }
  rows = f * ho * wo;
  std::vector<double> m(rows * cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m[i * cols + j] = columns[j][i];
  return m;
}

/// Scalar Adam with bias correction.
struct ScalarAdam {
  double alpha, beta1, beta2, eps;
  double m = 0, v = 0;
  int t = 0;
  double step(double param, double grad) {
    ++t;
    m = beta1 * m + (1 - beta1) * grad;
    v = beta2 * v + (1 - beta2) * grad * grad;
    const double mh = m / (1 - std::pow(beta1, t));
    const double vh = v / (1 - std::pow(beta2, t));
    return param - alpha * mh / (std::sqrt(vh) + eps);
  }
};

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace oracle
