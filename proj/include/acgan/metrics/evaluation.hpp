#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "acgan/data/dataset.hpp"
#include "acgan/metrics/diversity.hpp"
#include "acgan/metrics/resize.hpp"
#include "acgan/model/classifier.hpp"

namespace acgan::metrics {

// ------------------------------------------------------- discriminability

struct CurvePoint {
  std::size_t resolution = 0;
  double accuracy = 0;  // over all images
  double std = 0;       // sample std of per-subset accuracy
  std::vector<double> per_class;
};

struct DiscriminabilityCurve {
  std::size_t native = 0;
  std::size_t subsets = 0;
  std::vector<CurvePoint> points;  // strictly increasing resolution

  const CurvePoint& at(std::size_t resolution) const {
    for (const auto& p : points)
      if (p.resolution == resolution) return p;
    throw InvalidArgument("curve has no point at resolution " + std::to_string(resolution));
  }
};

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_std(v).mean;
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Classifier accuracy on images reduced to each resolution and restored to
/// native size. Images are split once into `subsets` equal random parts (the
/// remainder only counts towards the overall accuracy); the same split serves
/// every resolution, so the result does not depend on evaluation order.
template <class T>
DiscriminabilityCurve discriminability_curve(ClassifierModel<T>& classifier, const nn::Tensor<T>& images,
                                             std::span<const int> labels, std::vector<std::size_t> resolutions,
                                             std::size_t subsets, Rng rng) {
  detail::require(images.rank() == 4 && images.dim(0) == labels.size() && !labels.empty(),
                  "discriminability_curve: image/label count mismatch");
  detail::require(images.dim(2) == images.dim(3), "discriminability_curve: images must be square");
  detail::require(!resolutions.empty(), "discriminability_curve: no resolutions");
  detail::require(subsets >= 1 && subsets <= labels.size(),
                  "discriminability_curve: subsets must be in [1, " + std::to_string(labels.size()) + "]");
  const std::size_t native = images.dim(2), n = labels.size();
  std::sort(resolutions.begin(), resolutions.end());
  resolutions.erase(std::unique(resolutions.begin(), resolutions.end()), resolutions.end());
  detail::require(resolutions.front() >= 1, "discriminability_curve: resolution must be >= 1");
  detail::require(resolutions.back() <= native, "discriminability_curve: resolution " +
                                                    std::to_string(resolutions.back()) + " exceeds native " +
                                                    std::to_string(native));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order), rng);
  const std::size_t per_subset = n / subsets;

  DiscriminabilityCurve curve{native, subsets, {}};
  for (std::size_t r : resolutions) {
    const auto restored = reduce_then_restore(images, r, native);
    const auto dist = predict_dist(classifier, restored);
    const auto report = accuracy_from_dist(dist, labels);
    const std::size_t k = dist.dim(1);
    std::vector<double> subset_acc;
    for (std::size_t s = 0; s < subsets; ++s) {
      std::size_t hits = 0;
      for (std::size_t j = s * per_subset; j < (s + 1) * per_subset; ++j) {
        const std::size_t i = order[j];
        hits += argmax(dist.data().subspan(i * k, k)) == static_cast<std::size_t>(labels[i]) ? 1 : 0;
      }
      subset_acc.push_back(static_cast<double>(hits) / static_cast<double>(per_subset));
    }
    curve.points.push_back({r, report.overall, sample_std(subset_acc), report.per_class});
  }
  return curve;
}

// ------------------------------------------------------------ inception score

inline constexpr double kProbClamp = 1e-12;

struct InceptionScoreReport {
  std::vector<double> scores;  // one per group
  double mean = 0;
  double std = 0;  // population std across groups
  std::size_t groups = 0;
  std::size_t samples = 0;  // rows actually used
  std::size_t dropped = 0;  // remainder rows left out so groups are equal
};

/// exp(mean_x KL(p(y|x) || p(y))) per group of rows of an [N, K] row-stochastic
/// matrix. With an rng the rows are shuffled before grouping; otherwise groups
/// are contiguous.
template <class T>
InceptionScoreReport inception_score(const nn::Tensor<T>& dist, std::size_t groups,
                                     std::optional<Rng> rng = std::nullopt) {
  detail::require(dist.rank() == 2, "inception_score: expected [N, K], got " + nn::to_string(dist.shape()));
  const std::size_t n = dist.dim(0), k = dist.dim(1);
  detail::require(groups >= 1 && groups <= n, "inception_score: groups must be in [1, N]");
  const auto v = dist.data();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = static_cast<double>(v[i * k + j]);
      if (!std::isfinite(p) || p < 0) throw NumericError("inception_score: row " + std::to_string(i) + " is not a distribution");
      sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-3, "inception_score: row " + std::to_string(i) + " sums to " +
                                                     format_double(sum) + ", expected 1");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (rng) shuffle(std::span<std::size_t>(order), *rng);

  InceptionScoreReport rep;
  rep.groups = groups;
  const std::size_t per = n / groups;
  rep.samples = per * groups;
  rep.dropped = n - rep.samples;
  std::vector<double> marginal(k);
  for (std::size_t g = 0; g < groups; ++g) {
    std::fill(marginal.begin(), marginal.end(), 0.0);
    for (std::size_t j = g * per; j < (g + 1) * per; ++j)
      for (std::size_t c = 0; c < k; ++c) marginal[c] += static_cast<double>(v[order[j] * k + c]);
    for (auto& m : marginal) m = std::max(m / static_cast<double>(per), kProbClamp);
    double kl = 0;
    for (std::size_t j = g * per; j < (g + 1) * per; ++j)
      for (std::size_t c = 0; c < k; ++c) {
        const double p = std::max(static_cast<double>(v[order[j] * k + c]), kProbClamp);
        kl += p * (std::log(p) - std::log(marginal[c]));
      }
    rep.scores.push_back(std::exp(kl / static_cast<double>(per)));
  }
  const auto ms = mean_std(rep.scores);
  rep.mean = ms.mean;
  rep.std = ms.std;
  return rep;
}

// ----------------------------------------------------------- nearest neighbor

struct Neighbor {
  std::size_t index = 0;
  double distance = 0;
};

/// For every sample, the reference image with the smallest L1 distance
/// (summed over all pixels and channels); ties go to the lowest index.
template <class T>
std::vector<Neighbor> nearest_neighbor_l1(const nn::Tensor<T>& samples, const nn::Tensor<T>& reference) {
  detail::require(samples.rank() == 4 && reference.rank() == 4, "nearest_neighbor_l1: expected [N, C, H, W] tensors");
  detail::require(reference.dim(0) >= 1, "nearest_neighbor_l1: empty training set");
  detail::require(std::equal(samples.shape().begin() + 1, samples.shape().end(), reference.shape().begin() + 1),
                  "nearest_neighbor_l1: image shapes differ: " + nn::to_string(samples.shape()) + " vs " +
                      nn::to_string(reference.shape()));
  const std::size_t per = samples.size() / std::max<std::size_t>(samples.dim(0), 1);
  const auto s = samples.data(), r = reference.data();
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < samples.dim(0); ++i) {
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < reference.dim(0); ++j) {
      double d = 0;
      for (std::size_t p = 0; p < per && d < best.distance; ++p)
        d += std::abs(static_cast<double>(s[i * per + p]) - static_cast<double>(r[j * per + p]));
      if (d < best.distance) best = {j, d};
    }
    out.push_back(best);
  }
  return out;
}

/// Same, against a stored dataset whose pixels are converted to the sample range.
template <class T>
std::vector<Neighbor> nearest_neighbor_l1(const nn::Tensor<T>& samples, const data::LabeledImageDataset& train) {
  detail::require(train.size() >= 1, "nearest_neighbor_l1: empty training set");
  std::vector<std::size_t> all(train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return nearest_neighbor_l1(samples, data::images_to_tensor<T>(train, all));
}

// -------------------------------------------------------- joint report

struct JointRow {
  int cls = 0;
  double msssim = 0;
  double accuracy = 0;
};

struct JointReport {
  std::vector<JointRow> rows;
  double r = 0;                 // Pearson correlation; 0 when undefined
  double r_squared = 0;
  bool r_defined = false;       // false if either column is constant
  double accuracy_cutoff = 0.01;
  std::size_t low_diversity = 0;   // classes with msssim >= threshold
  std::size_t high_diversity = 0;  // classes with msssim < threshold
  std::optional<double> low_diversity_low_accuracy;    // share of low-diversity classes with accuracy <= cutoff
  std::optional<double> high_diversity_high_accuracy;  // share of high-diversity classes with accuracy > cutoff
};

inline double pearson(std::span<const double> x, std::span<const double> y, bool* defined = nullptr) {
  detail::require(x.size() == y.size(), "pearson: length mismatch");
  const double mx = mean_std(x).mean, my = mean_std(y).mean;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const bool ok = x.size() >= 2 && sxx > 0 && syy > 0;
  if (defined) *defined = ok;
  return ok ? sxy / std::sqrt(sxx * syy) : 0.0;
}

/// Per-class (MS-SSIM, accuracy) table with their correlation and the
/// conditional accuracy shares for the two diversity groups.
inline JointReport diversity_vs_discriminability(const DiversityReport& diversity, const AccuracyReport& accuracy,
                                                 double accuracy_cutoff = 0.01) {
  detail::require(diversity.rows.size() == accuracy.per_class.size(),
                  "diversity_vs_discriminability: diversity covers " + std::to_string(diversity.rows.size()) +
                      " classes, accuracy covers " + std::to_string(accuracy.per_class.size()));
  JointReport rep;
  rep.accuracy_cutoff = accuracy_cutoff;
  std::vector<double> xs, ys;
  std::size_t low_hits = 0, high_hits = 0;
  for (const auto& d : diversity.rows) {
    detail::require(d.cls >= 0 && static_cast<std::size_t>(d.cls) < accuracy.per_class.size(),
                    "diversity_vs_discriminability: class " + std::to_string(d.cls) + " missing from accuracy report");
    const double acc = accuracy.per_class[static_cast<std::size_t>(d.cls)];
    rep.rows.push_back({d.cls, d.mean, acc});
    xs.push_back(d.mean);
    ys.push_back(acc);
    if (d.mean >= diversity.threshold) {
      ++rep.low_diversity;
      low_hits += acc <= accuracy_cutoff ? 1 : 0;
    } else {
      ++rep.high_diversity;
      high_hits += acc > accuracy_cutoff ? 1 : 0;
    }
  }
  rep.r = pearson(xs, ys, &rep.r_defined);
  rep.r_squared = rep.r * rep.r;
  if (rep.low_diversity)
    rep.low_diversity_low_accuracy = static_cast<double>(low_hits) / static_cast<double>(rep.low_diversity);
  if (rep.high_diversity)
    rep.high_diversity_high_accuracy = static_cast<double>(high_hits) / static_cast<double>(rep.high_diversity);
  return rep;
}

}  // namespace acgan::metrics
