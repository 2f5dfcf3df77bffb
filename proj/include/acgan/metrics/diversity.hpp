#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <unordered_set>
#include <utility>
#include <vector>

#include "acgan/core/rng.hpp"
#include "acgan/metrics/ssim.hpp"
#include "acgan/model/training.hpp"

namespace acgan::metrics {

/// Classes whose mean pairwise MS-SSIM reaches this are flagged as low-diversity.
inline constexpr double kDiversityThreshold = 0.25;

/// Population mean and standard deviation.
struct MeanStd {
  double mean = 0;
  double std = 0;
};

inline MeanStd mean_std(std::span<const double> v) {
  if (v.empty()) return {};
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

/// Index k in [0, n(n-1)/2) of the row-major enumeration of pairs i < j.
inline std::pair<std::size_t, std::size_t> pair_at(std::size_t n, std::size_t k) {
  std::size_t i = 0;
  while (k >= n - 1 - i) {
    k -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + k};
}

/// `count` distinct unordered pairs of distinct indices below n, drawn
/// uniformly without replacement (Floyd's algorithm). If fewer pairs exist,
/// all of them are returned in enumeration order.
inline std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t count, Rng& rng) {
  detail::require(n >= 2, "sample_pairs: need at least two images, got " + std::to_string(n));
  const std::size_t total = n * (n - 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (count >= total) {
    for (std::size_t k = 0; k < total; ++k) out.push_back(pair_at(n, k));
    return out;
  }
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = total - count; j < total; ++j) {
    std::size_t t = rng.below(j + 1);
    if (!seen.insert(t).second) {
      t = j;
      seen.insert(t);
    }
    out.push_back(pair_at(n, t));
  }
  return out;
}

struct DiversityRow {
  int cls = 0;
  double mean = 0;
  double std = 0;
  std::size_t pairs = 0;
  bool flagged = false;  // mean >= threshold
};

struct DiversityReport {
  double threshold = kDiversityThreshold;
  std::size_t scales = 0;  // MS-SSIM pyramid depth actually used
  std::vector<DiversityRow> rows;

  const DiversityRow& row(int cls) const {
    for (const auto& r : rows)
      if (r.cls == cls) return r;
    throw InvalidArgument("diversity report has no class " + std::to_string(cls));
  }
};

/// Mean and std of pairwise MS-SSIM within one set of luma planes.
inline DiversityRow pairwise_ms_ssim(const std::vector<Plane>& planes, std::size_t pairs, Rng& rng,
                                     const SSIMParams& params = {}) {
  const auto chosen = sample_pairs(planes.size(), pairs, rng);
  std::vector<double> scores;
  scores.reserve(chosen.size());
  for (const auto& [i, j] : chosen) scores.push_back(ms_ssim(planes[i], planes[j], params));
  const auto ms = mean_std(scores);
  DiversityRow r;
  r.mean = ms.mean;
  r.std = ms.std;
  r.pairs = chosen.size();
  r.flagged = r.mean >= kDiversityThreshold;
  return r;
}

/// Per-class diversity. Class c (the position in `images_by_class`, or
/// `class_ids[c]` when given) draws its pairs from rng.split(class id).
inline DiversityReport intra_class_diversity(const std::vector<std::vector<Plane>>& images_by_class,
                                             std::size_t pairs_per_class, const Rng& rng,
                                             std::span<const int> class_ids = {}, const SSIMParams& params = {}) {
  detail::require(pairs_per_class >= 1, "intra_class_diversity: pairs_per_class must be >= 1");
  detail::require(class_ids.empty() || class_ids.size() == images_by_class.size(),
                  "intra_class_diversity: class id count does not match image groups");
  DiversityReport rep;
  for (std::size_t c = 0; c < images_by_class.size(); ++c) {
    const int id = class_ids.empty() ? static_cast<int>(c) : class_ids[c];
    const auto& planes = images_by_class[c];
    detail::require(planes.size() >= 2, "intra_class_diversity: class " + std::to_string(id) + " has " +
                                            std::to_string(planes.size()) + " image(s), need at least 2");
    if (rep.scales == 0) rep.scales = params.scales_for(planes[0].h, planes[0].w);
    Rng r = rng.split(static_cast<std::uint64_t>(id));
    auto row = pairwise_ms_ssim(planes, pairs_per_class, r, params);
    row.cls = id;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Groups an [N, C, H, W] batch by label (classes 0..K-1) and scores each class.
template <class T>
DiversityReport intra_class_diversity(const nn::Tensor<T>& images, std::span<const int> labels, std::size_t classes,
                                      std::size_t pairs_per_class, const Rng& rng, const SSIMParams& params = {}) {
  detail::require(images.rank() == 4 && images.dim(0) == labels.size(),
                  "intra_class_diversity: image/label count mismatch");
  auto planes = to_luma(images);
  std::vector<std::vector<Plane>> grouped(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    detail::require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < classes,
                    "intra_class_diversity: label " + std::to_string(labels[i]) + " out of range");
    grouped[static_cast<std::size_t>(labels[i])].push_back(std::move(planes[i]));
  }
  return intra_class_diversity(grouped, pairs_per_class, rng, {}, params);
}

// ------------------------------------------------------------------ collapse

/// First index i >= 1 where the series has risen by at least `rise` above its
/// earlier minimum and never falls back more than `tolerance` afterwards.
inline std::optional<std::size_t> detect_collapse(std::span<const double> values, double rise = 0.2,
                                                  double tolerance = 0.05) {
  double lowest = values.empty() ? 0.0 : values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - lowest >= rise) {
      bool sustained = true;
      for (std::size_t j = i + 1; j < values.size() && sustained; ++j) sustained = values[j] >= values[i] - tolerance;
      if (sustained) return i;
    }
    lowest = std::min(lowest, values[i]);
  }
  return std::nullopt;
}

struct CollapseTrajectory {
  int cls = 0;
  std::vector<std::uint64_t> iterations;
  std::vector<double> mean;
  std::vector<double> std;
  std::optional<std::size_t> collapse_index;
};

/// Maps a latent batch to images [N, C, H, W] in [-1, 1].
template <class T>
using SampleFn = std::function<nn::Tensor<T>(const LatentBatch<T>&)>;

/// Mean pairwise MS-SSIM of class `cls` samples at every point of a series.
/// The same latent batch and the same pairs are used at every point, so the
/// trajectory reflects the generators rather than sampling noise.
template <class T>
CollapseTrajectory collapse_trajectory(const std::vector<std::pair<std::uint64_t, SampleFn<T>>>& series, int cls,
                                       std::size_t classes, std::size_t z_dim, std::size_t n_samples,
                                       std::size_t pairs, const Rng& rng, const SSIMParams& params = {}) {
  detail::require(!series.empty(), "collapse_trajectory: empty checkpoint series");
  detail::require(n_samples >= 2, "collapse_trajectory: need at least two samples");
  Rng latent_rng = rng.split("latent");
  const std::vector<int> labels(n_samples, cls);
  const auto latent = sample_latent<T>(n_samples, classes, z_dim, latent_rng, std::span<const int>(labels));
  CollapseTrajectory out;
  out.cls = cls;
  for (const auto& [iteration, fn] : series) {
    Rng pair_rng = rng.split("pairs");
    const auto row = pairwise_ms_ssim(to_luma(fn(latent)), pairs, pair_rng, params);
    out.iterations.push_back(iteration);
    out.mean.push_back(row.mean);
    out.std.push_back(row.std);
  }
  out.collapse_index = detect_collapse(out.mean);
  return out;
}

/// Convenience overload over generator snapshots (sampled in eval mode).
template <class T>
CollapseTrajectory collapse_trajectory(std::vector<std::pair<std::uint64_t, Generator<T>>>& series, int cls,
                                       std::size_t n_samples, std::size_t pairs, const Rng& rng,
                                       const SSIMParams& params = {}) {
  detail::require(!series.empty(), "collapse_trajectory: empty checkpoint series");
  std::vector<std::pair<std::uint64_t, SampleFn<T>>> fns;
  for (auto& [it, g] : series) fns.emplace_back(it, [&g](const LatentBatch<T>& l) { return sample(g, l); });
  const auto& spec = series.front().second.spec();
  return collapse_trajectory<T>(fns, cls, spec.classes, spec.z_dim, n_samples, pairs, rng, params);
}

}  // namespace acgan::metrics
