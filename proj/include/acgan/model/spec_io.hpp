#pragma once

#include <sstream>
#include <string>

#include "acgan/core/meta.hpp"
#include "acgan/model/spec.hpp"

namespace acgan {

inline std::string encode_activation(const nn::Activation& a) {
  if (const auto* l = std::get_if<nn::LeakyRelu>(&a)) return "leaky_relu:" + format_double(l->slope);
  if (const auto* s = std::get_if<nn::Softmax>(&a)) return "softmax:" + std::to_string(s->axis);
  return nn::activation_name(a);
}

inline nn::Activation decode_activation(const std::string& s) {
  if (s == "identity") return nn::Identity{};
  if (s == "relu") return nn::Relu{};
  if (s == "tanh") return nn::Tanh{};
  if (s == "sigmoid") return nn::Sigmoid{};
  const auto colon = s.find(':');
  if (colon != std::string::npos) {
    const auto head = s.substr(0, colon), arg = s.substr(colon + 1);
    Meta m;
    m.set("v", arg);
    if (head == "leaky_relu") return nn::LeakyRelu{m.f64("v")};
    if (head == "softmax") return nn::Softmax{m.size_value("v")};
  }
  throw FormatError("unknown activation '" + s + "'");
}

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::linear: return "linear";
    case LayerKind::conv: return "conv";
    case LayerKind::transposed_conv: return "tconv";
  }
  return "?";
}

/// "kind kernel stride features bn dropout activation"
inline std::string encode_layer(const LayerSpec& l) {
  std::ostringstream os;
  os << layer_kind_name(l.kind) << ' ' << l.kernel << ' ' << l.stride << ' ' << l.features << ' '
     << (l.batch_norm ? 1 : 0) << ' ' << format_double(l.dropout) << ' ' << encode_activation(l.activation);
  return os.str();
}

inline LayerSpec decode_layer(const std::string& s) {
  std::istringstream is(s);
  std::string kind, dropout, act;
  LayerSpec l;
  int bn = 0;
  if (!(is >> kind >> l.kernel >> l.stride >> l.features >> bn >> dropout >> act))
    throw FormatError("malformed layer descriptor '" + s + "'");
  if (kind == "linear") l.kind = LayerKind::linear;
  else if (kind == "conv") l.kind = LayerKind::conv;
  else if (kind == "tconv") l.kind = LayerKind::transposed_conv;
  else throw FormatError("unknown layer kind '" + kind + "'");
  l.batch_norm = bn != 0;
  Meta m;
  m.set("d", dropout);
  l.dropout = m.f64("d");
  l.activation = decode_activation(act);
  return l;
}

inline void write_layers(Meta& m, const std::string& prefix, const std::vector<LayerSpec>& layers) {
  m.set(prefix + ".layers", static_cast<std::uint64_t>(layers.size()));
  for (std::size_t i = 0; i < layers.size(); ++i) m.set(prefix + ".layer" + std::to_string(i), encode_layer(layers[i]));
}

inline std::vector<LayerSpec> read_layers(const Meta& m, const std::string& prefix) {
  std::vector<LayerSpec> out;
  const auto n = m.size_value(prefix + ".layers");
  for (std::size_t i = 0; i < n; ++i) out.push_back(decode_layer(m.str(prefix + ".layer" + std::to_string(i))));
  return out;
}

inline void write_spec(Meta& m, const std::string& prefix, const GeneratorSpec& s) {
  m.set(prefix + ".classes", static_cast<std::uint64_t>(s.classes));
  m.set(prefix + ".z_dim", static_cast<std::uint64_t>(s.z_dim));
  m.set(prefix + ".resolution", static_cast<std::uint64_t>(s.resolution));
  m.set(prefix + ".channels", static_cast<std::uint64_t>(s.channels));
  write_layers(m, prefix, s.layers);
}

inline GeneratorSpec read_generator_spec(const Meta& m, const std::string& prefix) {
  GeneratorSpec s;
  s.classes = m.size_value(prefix + ".classes");
  s.z_dim = m.size_value(prefix + ".z_dim");
  s.resolution = m.size_value(prefix + ".resolution");
  s.channels = m.size_value(prefix + ".channels");
  s.layers = read_layers(m, prefix);
  return s;
}

inline void write_spec(Meta& m, const std::string& prefix, const DiscriminatorSpec& s) {
  m.set(prefix + ".classes", static_cast<std::uint64_t>(s.classes));
  m.set(prefix + ".resolution", static_cast<std::uint64_t>(s.resolution));
  m.set(prefix + ".channels", static_cast<std::uint64_t>(s.channels));
  m.set(prefix + ".head", s.head == HeadKind::soft_sigmoid ? "soft_sigmoid" : "softmax");
  m.set(prefix + ".noise_sigma", s.noise_sigma);
  write_layers(m, prefix, s.layers);
}

inline DiscriminatorSpec read_discriminator_spec(const Meta& m, const std::string& prefix) {
  DiscriminatorSpec s;
  s.classes = m.size_value(prefix + ".classes");
  s.resolution = m.size_value(prefix + ".resolution");
  s.channels = m.size_value(prefix + ".channels");
  const auto& head = m.str(prefix + ".head");
  if (head == "soft_sigmoid") s.head = HeadKind::soft_sigmoid;
  else if (head == "softmax") s.head = HeadKind::softmax;
  else throw FormatError("unknown head kind '" + head + "'");
  s.noise_sigma = m.f64(prefix + ".noise_sigma");
  s.layers = read_layers(m, prefix);
  return s;
}

}  // namespace acgan
