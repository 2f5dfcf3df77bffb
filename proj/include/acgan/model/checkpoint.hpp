#pragma once

#include <filesystem>

#include "acgan/model/container.hpp"
#include "acgan/model/spec_io.hpp"
#include "acgan/model/training.hpp"

namespace acgan {

inline constexpr const char* kAcganTag = "acgan";

namespace impl {

template <class T>
std::vector<float> to_f32(std::span<const T> v) {
  return std::vector<float>(v.begin(), v.end());
}

template <class T>
void copy_from(const ckpt::Entry& e, std::span<T> dst) {
  std::copy(e.values.begin(), e.values.end(), dst.begin());
}

/// Writes/reads the tensors of one network in a fixed order: parameters,
/// batch-norm running statistics, then optimizer moments (if any).
template <class T>
void put_network(ckpt::Container& c, const std::string& prefix, const nn::ParamSet<T>& params,
                 const BatchNormBuffers<T>& buffers, const nn::AdamState<T>* opt) {
  for (const auto& [name, p] : params) c.entries.push_back({prefix + "/param/" + name, p.shape(), to_f32(p.data())});
  for (const auto& [name, b] : buffers) {
    c.entries.push_back({prefix + "/bn/" + name + "/mean", {b.mean.size()}, to_f32(std::span<const T>(b.mean))});
    c.entries.push_back({prefix + "/bn/" + name + "/var", {b.var.size()}, to_f32(std::span<const T>(b.var))});
  }
  if (!opt) return;
  c.meta.set(prefix + ".adam.t", opt->t);
  for (const auto& [name, p] : params)
    c.entries.push_back({prefix + "/adam_m/" + name, p.shape(), to_f32(std::span<const T>(opt->m.at(name)))});
  for (const auto& [name, p] : params)
    c.entries.push_back({prefix + "/adam_v/" + name, p.shape(), to_f32(std::span<const T>(opt->v.at(name)))});
}

template <class T>
void get_network(const ckpt::Container& c, std::size_t& at, const std::string& prefix, nn::ParamSet<T>& params,
                 BatchNormBuffers<T>& buffers, nn::AdamState<T>* opt) {
  for (auto& [name, p] : params) copy_from(c.entry(at++, prefix + "/param/" + name, p.shape()), p.mutable_data());
  for (auto& [name, b] : buffers) {
    copy_from(c.entry(at++, prefix + "/bn/" + name + "/mean", {b.mean.size()}), std::span<T>(b.mean));
    copy_from(c.entry(at++, prefix + "/bn/" + name + "/var", {b.var.size()}), std::span<T>(b.var));
  }
  if (!opt) return;
  opt->t = c.meta.u64(prefix + ".adam.t");
  for (auto& [name, p] : params)
    copy_from(c.entry(at++, prefix + "/adam_m/" + name, p.shape()), std::span<T>(opt->m.at(name)));
  for (auto& [name, p] : params)
    copy_from(c.entry(at++, prefix + "/adam_v/" + name, p.shape()), std::span<T>(opt->v.at(name)));
}

inline void write_adam(Meta& m, const std::string& prefix, const nn::AdamConfig& a) {
  m.set(prefix + ".alpha", a.alpha);
  m.set(prefix + ".beta1", a.beta1);
  m.set(prefix + ".beta2", a.beta2);
  m.set(prefix + ".epsilon", a.epsilon);
}

inline nn::AdamConfig read_adam(const Meta& m, const std::string& prefix) {
  return {m.f64(prefix + ".alpha"), m.f64(prefix + ".beta1"), m.f64(prefix + ".beta2"), m.f64(prefix + ".epsilon")};
}

}  // namespace impl

inline void write_train_config(Meta& m, const TrainConfig& c) {
  m.set("train.batch_size", static_cast<std::uint64_t>(c.batch_size));
  m.set("train.iterations", static_cast<std::uint64_t>(c.iterations));
  impl::write_adam(m, "train.g_adam", c.g_adam);
  impl::write_adam(m, "train.d_adam", c.d_adam);
  m.set("train.noise_sigma", c.noise_sigma);
  m.set("train.seed", c.seed);
  m.set("train.checkpoint_every", static_cast<std::uint64_t>(c.checkpoint_every));
  m.set("train.metrics_every", static_cast<std::uint64_t>(c.metrics_every));
  m.set("train.resolution", static_cast<std::uint64_t>(c.resolution));
  m.set("train.classes", static_cast<std::uint64_t>(c.classes));
  m.set("train.z_dim", static_cast<std::uint64_t>(c.z_dim));
  m.set("train.channels", static_cast<std::uint64_t>(c.channels));
  m.set("train.width_divisor", static_cast<std::uint64_t>(c.width_divisor));
  m.set("train.d_steps", static_cast<std::uint64_t>(c.d_steps));
  m.set("train.g_loss", generator_loss_name(c.g_loss));
}

inline TrainConfig read_train_config(const Meta& m) {
  TrainConfig c;
  c.batch_size = m.size_value("train.batch_size");
  c.iterations = m.size_value("train.iterations");
  c.g_adam = impl::read_adam(m, "train.g_adam");
  c.d_adam = impl::read_adam(m, "train.d_adam");
  c.noise_sigma = m.f64("train.noise_sigma");
  c.seed = m.u64("train.seed");
  c.checkpoint_every = m.size_value("train.checkpoint_every");
  c.metrics_every = m.size_value("train.metrics_every");
  c.resolution = m.size_value("train.resolution");
  c.classes = m.size_value("train.classes");
  c.z_dim = m.size_value("train.z_dim");
  c.channels = m.size_value("train.channels");
  c.width_divisor = m.size_value("train.width_divisor");
  c.d_steps = m.size_value("train.d_steps");
  const auto& loss = m.str("train.g_loss");
  if (loss == "non_saturating") c.g_loss = GeneratorLoss::non_saturating;
  else if (loss == "minimax") c.g_loss = GeneratorLoss::minimax;
  else throw FormatError("unknown generator loss '" + loss + "'");
  return c;
}

template <class T>
ckpt::Container to_container(const Checkpoint<T>& s) {
  ckpt::Container c;
  c.tag = kAcganTag;
  c.iteration = s.iteration;
  c.rng = s.rng;
  write_train_config(c.meta, s.config);
  write_spec(c.meta, "generator", s.generator.spec());
  write_spec(c.meta, "discriminator", s.discriminator.spec());
  impl::put_network(c, "generator", s.generator.params(), s.generator.buffers(), &s.g_opt);
  impl::put_network(c, "discriminator", s.discriminator.params(), s.discriminator.buffers(), &s.d_opt);
  return c;
}

template <class T = float>
Checkpoint<T> from_container(const ckpt::Container& c) {
  if (c.tag != kAcganTag) throw ArtifactMismatch("checkpoint tag '" + c.tag + "' is not '" + kAcganTag + "'");
  const auto config = read_train_config(c.meta);
  auto s = Checkpoint<T>::initial(config, read_generator_spec(c.meta, "generator"),
                                  read_discriminator_spec(c.meta, "discriminator"));
  std::size_t at = 0;
  impl::get_network(c, at, "generator", s.generator.params(), s.generator.buffers(), &s.g_opt);
  impl::get_network(c, at, "discriminator", s.discriminator.params(), s.discriminator.buffers(), &s.d_opt);
  if (at != c.entries.size()) throw ArtifactMismatch("checkpoint has unexpected extra entries");
  s.iteration = c.iteration;
  s.rng = c.rng;
  return s;
}

template <class T>
void save_checkpoint(const Checkpoint<T>& s, const std::filesystem::path& path) {
  ckpt::save(to_container(s), path);
}

template <class T = float>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  return from_container<T>(ckpt::load(path, kAcganTag));
}

}  // namespace acgan
