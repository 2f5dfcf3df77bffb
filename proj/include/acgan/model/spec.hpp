#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "acgan/core/error.hpp"
#include "acgan/nn/ops_activation.hpp"

namespace acgan {

enum class LayerKind { linear, conv, transposed_conv };

/// One row of an architecture table.
struct LayerSpec {
  LayerKind kind = LayerKind::conv;
  std::size_t kernel = 0;  // square kernel; 0 for linear
  std::size_t stride = 1;
  std::size_t features = 0;
  bool batch_norm = false;
  double dropout = 0.0;
  nn::Activation activation = nn::Identity{};
};

/// Generator stack: a linear projection to features x s x s, reshaped, followed
/// by stride-2 transposed convolutions that double the spatial size each time.
struct GeneratorSpec {
  std::size_t classes = 10;
  std::size_t z_dim = 100;
  std::size_t resolution = 32;
  std::size_t channels = 3;
  std::vector<LayerSpec> layers;

  std::size_t input_width() const { return z_dim + classes; }

  /// Spatial size right after the linear layer. Throws when the transposed
  /// convolution stack cannot reach `resolution` from an integer size.
  std::size_t initial_size() const {
    detail::require(layers.size() >= 2 && layers.front().kind == LayerKind::linear,
                    "generator: first layer must be linear, followed by at least one transposed convolution");
    std::size_t factor = 1;
    for (std::size_t i = 1; i < layers.size(); ++i) {
      detail::require(layers[i].kind == LayerKind::transposed_conv, "generator: layers after the first must be "
                                                                    "transposed convolutions");
      factor *= layers[i].stride;
    }
    detail::require(resolution % factor == 0 && resolution / factor >= 1,
                    "generator: resolution " + std::to_string(resolution) + " is unreachable with a total stride of " +
                        std::to_string(factor));
    detail::require(layers.back().features == channels,
                    "generator: last layer must emit " + std::to_string(channels) + " channels");
    return resolution / factor;
  }

  void validate() const {
    detail::require(classes >= 1 && z_dim >= 1 && channels >= 1, "generator: classes, z_dim and channels must be >= 1");
    (void)initial_size();
  }
};

enum class HeadKind {
  soft_sigmoid,  // K class units under softmax plus one source unit under sigmoid
  softmax,       // K class units only (surrogate classifier)
};

/// Convolutional discriminator / classifier stack ending in one linear layer.
struct DiscriminatorSpec {
  std::size_t classes = 10;
  std::size_t resolution = 32;
  std::size_t channels = 3;
  std::vector<LayerSpec> layers;  // convolutions, then the final linear layer
  HeadKind head = HeadKind::soft_sigmoid;
  double noise_sigma = 0.1;       // activation noise on every layer input, train mode only

  std::size_t head_width() const { return head == HeadKind::soft_sigmoid ? classes + 1 : classes; }

  void validate() const {
    detail::require(classes >= 1 && channels >= 1 && resolution >= 1, "discriminator: invalid dimensions");
    detail::require(layers.size() >= 2 && layers.back().kind == LayerKind::linear,
                    "discriminator: need convolutions followed by a final linear layer");
    for (std::size_t i = 0; i + 1 < layers.size(); ++i)
      detail::require(layers[i].kind == LayerKind::conv, "discriminator: only convolutions before the final layer");
    detail::require(layers.back().features == head_width(),
                    "discriminator: final linear width must be " + std::to_string(head_width()));
    detail::require(noise_sigma >= 0.0, "discriminator: noise sigma must be non-negative");
  }
};

namespace arch {

inline LayerSpec linear(std::size_t features, nn::Activation act, bool bn = false, double dropout = 0.0) {
  return {LayerKind::linear, 0, 1, features, bn, dropout, act};
}
inline LayerSpec tconv(std::size_t features, bool bn, nn::Activation act) {
  return {LayerKind::transposed_conv, 5, 2, features, bn, 0.0, act};
}
inline LayerSpec conv(std::size_t stride, std::size_t features, bool bn, double dropout = 0.5) {
  return {LayerKind::conv, 3, stride, features, bn, dropout, nn::LeakyRelu{0.2}};
}

inline std::size_t scaled(std::size_t features, std::size_t divisor) { return std::max<std::size_t>(1, features / divisor); }

/// CIFAR-scale generator: 110-wide input -> linear 384 -> tconv 192, 96, 3 -> 32x32.
/// `width_divisor` shrinks every hidden width for quick experiments.
inline GeneratorSpec cifar_generator(std::size_t classes, std::size_t z_dim = 100, std::size_t channels = 3,
                                     std::size_t width_divisor = 1) {
  GeneratorSpec s;
  s.classes = classes;
  s.z_dim = z_dim;
  s.resolution = 32;
  s.channels = channels;
  s.layers = {linear(scaled(384, width_divisor), nn::Relu{}), tconv(scaled(192, width_divisor), true, nn::Relu{}),
              tconv(scaled(96, width_divisor), true, nn::Relu{}), tconv(channels, false, nn::Tanh{})};
  return s;
}

/// ImageNet-scale generator: linear 768 -> tconv 384, 256, 192, 3 -> 128x128.
inline GeneratorSpec imagenet_generator(std::size_t classes, std::size_t z_dim = 100, std::size_t channels = 3,
                                        std::size_t width_divisor = 1) {
  GeneratorSpec s;
  s.classes = classes;
  s.z_dim = z_dim;
  s.resolution = 128;
  s.channels = channels;
  s.layers = {linear(scaled(768, width_divisor), nn::Relu{}), tconv(scaled(384, width_divisor), true, nn::Relu{}),
              tconv(scaled(256, width_divisor), true, nn::Relu{}), tconv(scaled(192, width_divisor), true, nn::Relu{}),
              tconv(channels, false, nn::Tanh{})};
  return s;
}

/// The six-convolution discriminator stack shared by both table scales.
inline DiscriminatorSpec discriminator(std::size_t classes, std::size_t resolution, std::size_t channels = 3,
                                       HeadKind head = HeadKind::soft_sigmoid, double noise_sigma = 0.1,
                                       std::size_t width_divisor = 1, double dropout = 0.5) {
  DiscriminatorSpec s;
  s.classes = classes;
  s.resolution = resolution;
  s.channels = channels;
  s.head = head;
  s.noise_sigma = noise_sigma;
  const std::size_t d = width_divisor;
  s.layers = {conv(2, scaled(16, d), false, dropout),  conv(1, scaled(32, d), true, dropout),
              conv(2, scaled(64, d), true, dropout),  conv(1, scaled(128, d), true, dropout),
              conv(2, scaled(256, d), true, dropout), conv(1, scaled(512, d), true, dropout),
              linear(s.head_width(), nn::Identity{})};
  return s;
}

inline DiscriminatorSpec cifar_discriminator(std::size_t classes, std::size_t channels = 3, double noise_sigma = 0.1,
                                             std::size_t width_divisor = 1) {
  return discriminator(classes, 32, channels, HeadKind::soft_sigmoid, noise_sigma, width_divisor);
}

inline DiscriminatorSpec imagenet_discriminator(std::size_t classes, std::size_t channels = 3,
                                                double noise_sigma = 0.1, std::size_t width_divisor = 1) {
  return discriminator(classes, 128, channels, HeadKind::soft_sigmoid, noise_sigma, width_divisor);
}

}  // namespace arch
}  // namespace acgan
