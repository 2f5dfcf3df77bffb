#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "acgan/data/dataset.hpp"

namespace acgan::data {

enum class ShapeKind {
  circle,
  square,
  triangle_up,
  plus,
  ring,
  diamond,
  x_cross,
  hollow_square,
  triangle_down,
  h_bar,
  v_bar,
  half_disk,
  bowtie,
  t_shape,
  l_shape,
  two_dots,
};

inline constexpr std::size_t kShapeKindCount = 16;

inline const char* shape_name(ShapeKind k) {
  static constexpr std::array<const char*, kShapeKindCount> names{
      "circle", "square", "triangle_up", "plus",   "ring",  "diamond", "x_cross", "hollow_square",
      "triangle_down", "h_bar", "v_bar", "half_disk", "bowtie", "t_shape", "l_shape", "two_dots"};
  return names[static_cast<std::size_t>(k)];
}

/// Membership test in shape-local coordinates: u to the right, v down, the
/// shape fits inside [-1, 1]^2.
inline bool shape_contains(ShapeKind k, double u, double v) {
  const double au = std::abs(u), av = std::abs(v), r2 = u * u + v * v;
  switch (k) {
    case ShapeKind::circle: return r2 <= 1.0;
    case ShapeKind::square: return au <= 0.8 && av <= 0.8;
    case ShapeKind::triangle_up: return v <= 0.8 && v >= -0.9 && au <= 0.9 * (v + 0.9) / 1.7;
    case ShapeKind::plus: return (au <= 0.3 && av <= 0.9) || (av <= 0.3 && au <= 0.9);
    case ShapeKind::ring: return r2 <= 1.0 && r2 >= 0.55 * 0.55;
    case ShapeKind::diamond: return au + av <= 1.0;
    case ShapeKind::x_cross:
      return au <= 0.85 && av <= 0.85 && (std::abs(u - v) <= 0.32 || std::abs(u + v) <= 0.32);
    case ShapeKind::hollow_square: return au <= 0.85 && av <= 0.85 && !(au <= 0.5 && av <= 0.5);
    case ShapeKind::triangle_down: return v >= -0.8 && v <= 0.9 && au <= 0.9 * (0.9 - v) / 1.7;
    case ShapeKind::h_bar: return av <= 0.3 && au <= 0.95;
    case ShapeKind::v_bar: return au <= 0.3 && av <= 0.95;
    case ShapeKind::half_disk: return r2 <= 1.0 && v >= -0.2;
    case ShapeKind::bowtie: return av <= au && au <= 0.9;
    case ShapeKind::t_shape: return (std::abs(v + 0.65) <= 0.25 && au <= 0.9) || (au <= 0.25 && av <= 0.9);
    case ShapeKind::l_shape: return (std::abs(u + 0.65) <= 0.25 && av <= 0.9) || (std::abs(v - 0.65) <= 0.25 && au <= 0.9);
    case ShapeKind::two_dots: return (u + 0.5) * (u + 0.5) + v * v <= 0.16 || (u - 0.5) * (u - 0.5) + v * v <= 0.16;
  }
  return false;
}

/// Base foreground colour of each kind; classes differ in shape and hue.
inline std::array<double, 3> shape_color(ShapeKind k) {
  static constexpr std::array<std::array<double, 3>, kShapeKindCount> palette{{
      {230, 60, 60},  {60, 200, 80},  {70, 110, 235}, {235, 205, 60}, {200, 80, 220}, {60, 210, 210},
      {240, 140, 50}, {160, 230, 90}, {120, 90, 230}, {235, 100, 160}, {200, 200, 200}, {150, 110, 60},
      {90, 170, 140}, {230, 170, 130}, {110, 160, 240}, {190, 60, 110},
  }};
  return palette[static_cast<std::size_t>(k)];
}

/// Jitter amplitudes. Positions and scales are fractions of the image size,
/// colours are fractions of the 0..255 range, noise is a pixel std in u8 units.
struct ShapeJitter {
  double position = 0.12;
  double scale = 0.2;
  double color = 0.25;
  double background = 0.15;
  double noise = 4.0;

  static ShapeJitter none() { return {0, 0, 0, 0, 0}; }
};

struct ShapesConfig {
  std::size_t classes = 4;
  std::size_t resolution = 32;
  std::size_t channels = 3;
  std::size_t samples_per_class = 1000;
  std::vector<ShapeKind> kinds;  // per class; empty = the first K kinds in enum order
  double base_radius = 0.3;      // fraction of the image size
  ShapeJitter jitter;
  std::uint64_t seed = 1;
  SplitTag split = SplitTag::train;

  std::vector<ShapeKind> resolved_kinds() const {
    if (!kinds.empty()) return kinds;
    std::vector<ShapeKind> out;
    for (std::size_t i = 0; i < classes && i < kShapeKindCount; ++i) out.push_back(static_cast<ShapeKind>(i));
    return out;
  }

  void validate() const {
    detail::require(classes >= 1 && classes <= kShapeKindCount,
                    "shapes: K=" + std::to_string(classes) + " exceeds the " + std::to_string(kShapeKindCount) +
                        " available shape kinds");
    detail::require(kinds.empty() || kinds.size() == classes, "shapes: need exactly one shape kind per class");
    detail::require(resolution >= 4 && (channels == 1 || channels == 3) && samples_per_class >= 1,
                    "shapes: resolution >= 4, 1 or 3 channels and at least one sample per class required");
    const auto& j = jitter;
    detail::require(j.position >= 0 && j.scale >= 0 && j.scale < 1 && j.color >= 0 && j.background >= 0 && j.noise >= 0,
                    "shapes: jitter amplitudes must be non-negative (scale < 1)");
    // The largest shape, pushed to the largest offset, must stay inside the frame.
    const double reach = base_radius * (1.0 + j.scale) + j.position;
    detail::require(base_radius > 0 && reach <= 0.5,
                    "shapes: base radius plus position/scale jitter would push shapes outside the frame");
  }
};

namespace impl {

inline double clamp_byte(double v) { return std::clamp(v, 0.0, 255.0); }

}  // namespace impl

/// Renders one image into `out` (C x R x R). Each image draws from its own
/// stream so any image can be regenerated in isolation.
inline void render_shape(const ShapesConfig& cfg, ShapeKind kind, Rng rng, std::span<std::uint8_t> out) {
  const auto& j = cfg.jitter;
  const double res = static_cast<double>(cfg.resolution);
  auto sym = [&] { return 2.0 * rng.uniform() - 1.0; };
  const double cx = 0.5 * res + sym() * j.position * res;
  const double cy = 0.5 * res + sym() * j.position * res;
  const double radius = cfg.base_radius * res * (1.0 + sym() * j.scale);
  auto fg = shape_color(kind);
  for (auto& c : fg) c = impl::clamp_byte(c + sym() * j.color * 255.0);
  std::array<double, 3> bg{};
  const double bg_level = 35.0;
  for (auto& c : bg) c = impl::clamp_byte(bg_level + sym() * j.background * 255.0);

  const std::size_t r = cfg.resolution;
  std::vector<double> noise(cfg.channels * r * r, 0.0);
  if (j.noise > 0) rng.fill_normal(std::span<double>(noise), j.noise);

  for (std::size_t y = 0; y < r; ++y)
    for (std::size_t x = 0; x < r; ++x) {
      // 2x2 supersampling for anti-aliased edges.
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          const double px = static_cast<double>(x) + 0.25 + 0.5 * sx;
          const double py = static_cast<double>(y) + 0.25 + 0.5 * sy;
          hits += shape_contains(kind, (px - cx) / radius, (py - cy) / radius) ? 1 : 0;
        }
      const double a = hits / 4.0;
      std::array<double, 3> rgb;
      for (int c = 0; c < 3; ++c) rgb[c] = a * fg[c] + (1.0 - a) * bg[c];
      if (cfg.channels == 1) {
        const double luma = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
        out[y * r + x] = static_cast<std::uint8_t>(std::lround(impl::clamp_byte(luma + noise[y * r + x])));
      } else {
        for (std::size_t c = 0; c < 3; ++c) {
          const std::size_t at = (c * r + y) * r + x;
          out[at] = static_cast<std::uint8_t>(std::lround(impl::clamp_byte(rgb[c] + noise[at])));
        }
      }
    }
}

/// Balanced synthetic dataset: class k is drawn as shape kinds[k]; images are
/// ordered class-major.
inline LabeledImageDataset generate_shapes(const ShapesConfig& cfg) {
  cfg.validate();
  const auto kinds = cfg.resolved_kinds();
  LabeledImageDataset ds;
  ds.height = ds.width = cfg.resolution;
  ds.channels = cfg.channels;
  ds.split = cfg.split;
  for (auto k : kinds) ds.class_names.emplace_back(shape_name(k));
  const std::size_t per = ds.image_size(), n = cfg.classes * cfg.samples_per_class;
  ds.pixels.resize(n * per);
  ds.labels.resize(n);
  const Rng root = Rng(cfg.seed).split("shapes").split(static_cast<std::uint64_t>(cfg.split));
  for (std::size_t c = 0; c < cfg.classes; ++c)
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
      const std::size_t idx = c * cfg.samples_per_class + i;
      ds.labels[idx] = static_cast<std::uint16_t>(c);
      render_shape(cfg, kinds[c], root.split(c).split(i), std::span<std::uint8_t>(ds.pixels).subspan(idx * per, per));
    }
  return ds;
}

}  // namespace acgan::data
