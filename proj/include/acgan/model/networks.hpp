#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acgan/model/spec.hpp"
#include "acgan/nn.hpp"

namespace acgan {

inline constexpr double kBatchNormMomentum = 0.1;
inline constexpr double kBatchNormEps = 1e-5;

template <class T>
using BatchNormBuffers = std::map<std::string, nn::BatchNormStats<T>>;

namespace impl {

inline std::string layer_name(std::size_t i, const char* what) { return "layer" + std::to_string(i) + "." + what; }

template <class T>
nn::Tensor<T> bias_or_norm(nn::Graph<T>& g, const nn::Tensor<T>& x, std::size_t i, const LayerSpec& layer,
                           const nn::ParamSet<T>& params, BatchNormBuffers<T>& buffers, nn::Mode mode) {
  if (layer.batch_norm)
    return nn::batch_norm(g, x, params.at(layer_name(i, "bn_gamma")), params.at(layer_name(i, "bn_beta")), mode,
                          buffers.at(layer_name(i, "bn")), static_cast<T>(kBatchNormMomentum),
                          static_cast<T>(kBatchNormEps));
  return nn::add_channel_bias(g, x, params.at(layer_name(i, "bias")));
}

inline void add_bias_or_norm(std::vector<nn::ParamSpec>& specs, std::size_t i, const LayerSpec& layer) {
  const nn::Shape c{layer.features};
  if (layer.batch_norm) {
    specs.push_back({layer_name(i, "bn_gamma"), c, nn::ParamRole::bn_gamma});
    specs.push_back({layer_name(i, "bn_beta"), c, nn::ParamRole::bn_beta});
  } else {
    specs.push_back({layer_name(i, "bias"), c, nn::ParamRole::bias});
  }
}

template <class T>
BatchNormBuffers<T> fresh_buffers(const std::vector<LayerSpec>& layers) {
  BatchNormBuffers<T> out;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].batch_norm) out.emplace(layer_name(i, "bn"), nn::BatchNormStats<T>::fresh(layers[i].features));
  return out;
}

}  // namespace impl

/// Conditional generator: [N, z_dim + classes] -> images [N, C, R, R] in (-1, 1).
template <class T = float>
class Generator {
 public:
  Generator(GeneratorSpec spec, const Rng& init_rng) : spec_(std::move(spec)) {
    spec_.validate();
    params_ = nn::init_params<T>(param_specs(spec_), init_rng);
    buffers_ = impl::fresh_buffers<T>(spec_.layers);
  }

  static std::vector<nn::ParamSpec> param_specs(const GeneratorSpec& spec) {
    const std::size_t s = spec.initial_size();
    std::vector<nn::ParamSpec> out;
    const auto& first = spec.layers.front();
    out.push_back({impl::layer_name(0, "weight"), {spec.input_width(), first.features * s * s}, nn::ParamRole::weight});
    if (first.batch_norm) {
      impl::add_bias_or_norm(out, 0, first);
    } else {
      out.push_back({impl::layer_name(0, "bias"), {first.features * s * s}, nn::ParamRole::bias});
    }
    for (std::size_t i = 1; i < spec.layers.size(); ++i) {
      const auto& l = spec.layers[i];
      out.push_back({impl::layer_name(i, "weight"),
                     {spec.layers[i - 1].features, l.features, l.kernel, l.kernel},
                     nn::ParamRole::weight});
      impl::add_bias_or_norm(out, i, l);
    }
    return out;
  }

  nn::Tensor<T> forward(nn::Graph<T>& g, const nn::Tensor<T>& input, nn::Mode mode) {
    detail::require(input.rank() == 2 && input.dim(1) == spec_.input_width(),
                    "generator: expected input [N, " + std::to_string(spec_.input_width()) + "], got " +
                        nn::to_string(input.shape()));
    const std::size_t n = input.dim(0), s = spec_.initial_size();
    const auto& first = spec_.layers.front();
    nn::Tensor<T> h;
    if (first.batch_norm) {
      auto zero = nn::Tensor<T>::zeros({first.features * s * s});
      h = nn::linear(g, input, params_.at(impl::layer_name(0, "weight")), zero);
      h = nn::reshape(g, h, {n, first.features, s, s});
      h = impl::bias_or_norm(g, h, 0, first, params_, buffers_, mode);
    } else {
      h = nn::linear(g, input, params_.at(impl::layer_name(0, "weight")), params_.at(impl::layer_name(0, "bias")));
      h = nn::reshape(g, h, {n, first.features, s, s});
    }
    h = nn::activation(g, h, first.activation);
    for (std::size_t i = 1; i < spec_.layers.size(); ++i) {
      const auto& l = spec_.layers[i];
      const std::size_t pad = l.kernel / 2, op = l.stride - 1;
      h = nn::transposed_conv2d(g, h, params_.at(impl::layer_name(i, "weight")), {l.stride, l.stride}, {pad, pad},
                                {op, op});
      h = impl::bias_or_norm(g, h, i, l, params_, buffers_, mode);
      h = nn::activation(g, h, l.activation);
    }
    return h;
  }

  const GeneratorSpec& spec() const { return spec_; }
  nn::ParamSet<T>& params() { return params_; }
  const nn::ParamSet<T>& params() const { return params_; }
  BatchNormBuffers<T>& buffers() { return buffers_; }
  const BatchNormBuffers<T>& buffers() const { return buffers_; }

 private:
  GeneratorSpec spec_;
  nn::ParamSet<T> params_;
  BatchNormBuffers<T> buffers_;
};

/// Output of the discriminator / classifier head.
template <class T>
struct HeadOutput {
  nn::Tensor<T> logits;                      // [N, head_width]
  nn::Tensor<T> class_probs;                 // [N, K], rows sum to 1
  std::optional<nn::Tensor<T>> source_prob;  // [N], P(real); soft-sigmoid head only
};

/// Strided-convolution stack with a soft-sigmoid (discriminator) or softmax
/// (classifier) head. Activation noise and dropout are active in train mode only.
template <class T = float>
class Discriminator {
 public:
  Discriminator(DiscriminatorSpec spec, const Rng& init_rng) : spec_(std::move(spec)) {
    spec_.validate();
    params_ = nn::init_params<T>(param_specs(spec_), init_rng);
    buffers_ = impl::fresh_buffers<T>(spec_.layers);
  }

  /// Spatial size after the convolution stack.
  static std::size_t final_size(const DiscriminatorSpec& spec) {
    std::size_t s = spec.resolution;
    for (std::size_t i = 0; i + 1 < spec.layers.size(); ++i) {
      const auto& l = spec.layers[i];
      s = nn::conv_output_size(s, l.kernel, l.stride, l.kernel / 2);
    }
    return s;
  }

  static std::vector<nn::ParamSpec> param_specs(const DiscriminatorSpec& spec) {
    std::vector<nn::ParamSpec> out;
    std::size_t in_c = spec.channels;
    for (std::size_t i = 0; i + 1 < spec.layers.size(); ++i) {
      const auto& l = spec.layers[i];
      out.push_back({impl::layer_name(i, "weight"), {l.features, in_c, l.kernel, l.kernel}, nn::ParamRole::weight});
      impl::add_bias_or_norm(out, i, l);
      in_c = l.features;
    }
    const std::size_t last = spec.layers.size() - 1, s = final_size(spec);
    out.push_back({impl::layer_name(last, "weight"), {in_c * s * s, spec.head_width()}, nn::ParamRole::weight});
    out.push_back({impl::layer_name(last, "bias"), {spec.head_width()}, nn::ParamRole::bias});
    return out;
  }

  HeadOutput<T> forward(nn::Graph<T>& g, const nn::Tensor<T>& images, nn::Mode mode, Rng& rng) {
    detail::require(images.rank() == 4 && images.dim(1) == spec_.channels && images.dim(2) == spec_.resolution &&
                        images.dim(3) == spec_.resolution,
                    "discriminator: expected images [N, " + std::to_string(spec_.channels) + ", " +
                        std::to_string(spec_.resolution) + ", " + std::to_string(spec_.resolution) + "], got " +
                        nn::to_string(images.shape()));
    const std::size_t n = images.dim(0), last = spec_.layers.size() - 1;
    nn::Tensor<T> h = images;
    for (std::size_t i = 0; i < last; ++i) {
      const auto& l = spec_.layers[i];
      const std::size_t pad = l.kernel / 2;
      h = nn::gaussian_noise(g, h, spec_.noise_sigma, mode, rng);
      h = nn::conv2d(g, h, params_.at(impl::layer_name(i, "weight")), {l.stride, l.stride}, {pad, pad});
      h = impl::bias_or_norm(g, h, i, l, params_, buffers_, mode);
      h = nn::activation(g, h, l.activation);
      h = nn::dropout(g, h, l.dropout, mode, rng);
    }
    h = nn::reshape(g, h, {n, h.size() / n});
    h = nn::gaussian_noise(g, h, spec_.noise_sigma, mode, rng);
    HeadOutput<T> out;
    out.logits = nn::linear(g, h, params_.at(impl::layer_name(last, "weight")),
                            params_.at(impl::layer_name(last, "bias")));
    const std::size_t k = spec_.classes;
    if (spec_.head == HeadKind::soft_sigmoid) {
      out.class_probs = nn::softmax(g, nn::columns(g, out.logits, 0, k), 1);
      out.source_prob = nn::reshape(g, nn::sigmoid(g, nn::columns(g, out.logits, k, k + 1)), {n});
    } else {
      out.class_probs = nn::softmax(g, out.logits, 1);
    }
    return out;
  }

  const DiscriminatorSpec& spec() const { return spec_; }
  nn::ParamSet<T>& params() { return params_; }
  const nn::ParamSet<T>& params() const { return params_; }
  BatchNormBuffers<T>& buffers() { return buffers_; }
  const BatchNormBuffers<T>& buffers() const { return buffers_; }

 private:
  DiscriminatorSpec spec_;
  nn::ParamSet<T> params_;
  BatchNormBuffers<T> buffers_;
};

}  // namespace acgan
