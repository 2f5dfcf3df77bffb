#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acgan/data/dataset.hpp"
#include "acgan/model/latent.hpp"
#include "acgan/model/objective.hpp"

namespace acgan {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t iterations = 3000;
  nn::AdamConfig g_adam;
  nn::AdamConfig d_adam;
  double noise_sigma = 0.1;
  std::uint64_t seed = 1;
  std::size_t checkpoint_every = 500;  // 0: only at the end
  std::size_t metrics_every = 250;     // 0: never
  std::size_t resolution = 32;         // 32 selects the CIFAR stack, 128 the ImageNet stack
  std::size_t classes = 4;
  std::size_t z_dim = 100;
  std::size_t channels = 3;
  std::size_t width_divisor = 1;
  std::size_t d_steps = 1;  // discriminator updates per generator update
  GeneratorLoss g_loss = GeneratorLoss::non_saturating;

  void validate() const {
    detail::require(batch_size >= 2, "train: batch_size must be >= 2 for batch norm");
    detail::require(d_steps >= 1, "train: d_steps must be >= 1");
    detail::require(width_divisor >= 1, "train: width_divisor must be >= 1");
    detail::require(noise_sigma >= 0, "train: noise sigma must be non-negative");
    g_adam.validate();
    d_adam.validate();
  }
};

inline GeneratorSpec default_generator_spec(const TrainConfig& c) {
  if (c.resolution == 32) return arch::cifar_generator(c.classes, c.z_dim, c.channels, c.width_divisor);
  if (c.resolution == 128) return arch::imagenet_generator(c.classes, c.z_dim, c.channels, c.width_divisor);
  throw InvalidArgument("train: no built-in architecture for resolution " + std::to_string(c.resolution) +
                        " (supported: 32, 128)");
}

inline DiscriminatorSpec default_discriminator_spec(const TrainConfig& c) {
  return arch::discriminator(c.classes, c.resolution, c.channels, HeadKind::soft_sigmoid, c.noise_sigma,
                             c.width_divisor);
}

/// Complete training state. Every random draw of iteration i comes from
/// rng.split("iteration").split(i), so the state after i iterations does not
/// depend on how the run was split into sessions.
template <class T = float>
struct Checkpoint {
  TrainConfig config;
  Generator<T> generator;
  Discriminator<T> discriminator;
  nn::AdamState<T> g_opt;
  nn::AdamState<T> d_opt;
  std::uint64_t iteration = 0;
  Rng rng;

  static Checkpoint initial(const TrainConfig& config) {
    return initial(config, default_generator_spec(config), default_discriminator_spec(config));
  }

  static Checkpoint initial(const TrainConfig& config, GeneratorSpec gs, DiscriminatorSpec ds) {
    config.validate();
    detail::require(gs.classes == config.classes && ds.classes == config.classes && gs.z_dim == config.z_dim,
                    "train: architecture does not match config class count / z_dim");
    detail::require(gs.resolution == ds.resolution && gs.channels == ds.channels,
                    "train: generator output " + std::to_string(gs.resolution) +
                        " does not match discriminator input " + std::to_string(ds.resolution));
    const Rng root(config.seed);
    Generator<T> g(std::move(gs), root.split("init.generator"));
    Discriminator<T> d(std::move(ds), root.split("init.discriminator"));
    auto g_opt = nn::AdamState<T>::fresh(g.params(), config.g_adam);
    auto d_opt = nn::AdamState<T>::fresh(d.params(), config.d_adam);
    return Checkpoint{config, std::move(g), std::move(d), std::move(g_opt), std::move(d_opt), 0, root};
  }

  Rng iteration_rng(std::uint64_t i) const { return rng.split("iteration").split(i); }
  Rng data_rng() const { return rng.split("data"); }
};

/// Pre-step objective values of one player update.
struct StepLosses {
  double source = 0;  // D-step: L_S; G-step: mean log P(S=fake | X_fake)
  double cls = 0;     // D-step: L_C; G-step: mean log P(C=c | X_fake)
};

namespace impl {

template <class T>
void check_update(const nn::ParamSet<T>& params, std::initializer_list<double> losses, const char* who) {
  for (double l : losses)
    if (!std::isfinite(l)) {
      std::ostringstream os;
      os << who << ": non-finite loss";
      for (double v : losses) os << ' ' << v;
      throw NumericError(os.str());
    }
  for (const auto& [name, p] : params)
    for (T v : p.grad())
      if (!std::isfinite(v)) throw NumericError(std::string(who) + ": non-finite gradient in " + name);
}

}  // namespace impl

/// One ascent step of D on L_S + L_C for given real and fake batches. Only D's
/// parameters, optimizer state and batch-norm statistics change.
template <class T>
StepLosses discriminator_update(Discriminator<T>& d, nn::AdamState<T>& opt, const nn::Tensor<T>& real,
                                std::span<const int> real_labels, const nn::Tensor<T>& fake,
                                std::span<const int> fake_labels, Rng rng) {
  nn::Graph<T> g;
  const auto out_real = d.forward(g, real, nn::Mode::train, rng);
  const auto out_fake = d.forward(g, fake, nn::Mode::train, rng);
  const auto ls = source_loss(g, out_real, out_fake);
  const auto lc = class_loss(g, out_real, real_labels, out_fake, fake_labels);
  g.backward(nn::scale(g, nn::add(g, ls, lc), T(-1)));
  const StepLosses losses{static_cast<double>(ls.item()), static_cast<double>(lc.item())};
  impl::check_update(d.params(), {losses.source, losses.cls}, "discriminator step");
  nn::adam_step(d.params(), opt);
  return losses;
}

/// One step of G through a frozen D. `fake` must have been produced by `gen`
/// on graph `g`; the backward pass continues on that graph. D is left
/// untouched, including its batch-norm statistics.
template <class T>
StepLosses generator_update(Generator<T>& gen, nn::AdamState<T>& opt, Discriminator<T>& d, nn::Graph<T>& g,
                            const nn::Tensor<T>& fake, std::span<const int> fake_labels, GeneratorLoss kind, Rng rng) {
  nn::FrozenParams<T> frozen(d.params());
  const auto saved_buffers = d.buffers();
  const auto out = d.forward(g, fake, nn::Mode::train, rng);
  d.buffers() = saved_buffers;
  const auto log_fake = source_log_likelihood(g, out, false);
  const auto lc = class_log_likelihood(g, out, fake_labels);
  const auto objective = kind == GeneratorLoss::non_saturating
                             ? nn::add(g, source_log_likelihood(g, out, true), lc)
                             : nn::add(g, lc, nn::scale(g, log_fake, T(-1)));
  g.backward(nn::scale(g, objective, T(-1)));
  const StepLosses losses{static_cast<double>(log_fake.item()), static_cast<double>(lc.item())};
  impl::check_update(gen.params(), {losses.source, losses.cls, static_cast<double>(objective.item())},
                     "generator step");
  nn::adam_step(gen.params(), opt);
  return losses;
}

/// D-step with fresh fakes: samples a latent batch of the real batch's size,
/// generates without touching G (batch-norm statistics restored), updates D.
template <class T>
StepLosses discriminator_step(Checkpoint<T>& s, const data::Batch<T>& real, Rng rng) {
  detail::require(real.labels.size() == s.config.batch_size,
                  "discriminator_step: real batch has " + std::to_string(real.labels.size()) + " images, expected " +
                      std::to_string(s.config.batch_size));
  Rng latent_rng = rng.split("latent");
  const auto latent = sample_latent<T>(real.labels.size(), s.config.classes, s.config.z_dim, latent_rng);
  const auto saved = s.generator.buffers();
  nn::Graph<T> off(false);
  const auto fake = s.generator.forward(off, latent.input(), nn::Mode::train);
  s.generator.buffers() = saved;
  return discriminator_update(s.discriminator, s.d_opt, real.images, real.labels, fake, latent.labels,
                              rng.split("discriminator"));
}

/// G-step with a fresh latent batch of config.batch_size.
template <class T>
StepLosses generator_step(Checkpoint<T>& s, Rng rng) {
  Rng latent_rng = rng.split("latent");
  const auto latent = sample_latent<T>(s.config.batch_size, s.config.classes, s.config.z_dim, latent_rng);
  nn::Graph<T> g;
  const auto fake = s.generator.forward(g, latent.input(), nn::Mode::train);
  return generator_update(s.generator, s.g_opt, s.discriminator, g, fake, latent.labels, s.config.g_loss,
                          rng.split("generator"));
}

struct IterationLog {
  std::uint64_t iteration = 0;  // 1-based count of completed iterations
  StepLosses d;
  StepLosses g;
  double seconds = 0;
};

template <class T>
struct TrainCallbacks {
  std::function<void(const IterationLog&)> on_iteration;
  /// After every checkpoint_every iterations and after the last one.
  std::function<void(const Checkpoint<T>&)> on_checkpoint;
  /// After every metrics_every iterations.
  std::function<void(const Checkpoint<T>&)> on_metrics;
};

/// One training iteration: config.d_steps D-updates then one G-update. The
/// fake batch of the last D-update is generated once on a live graph and
/// reused for the G-update (G does not change in between).
template <class T>
IterationLog train_iteration(Checkpoint<T>& s, data::MinibatchStream<T>& stream) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = s.config;
  const Rng it = s.iteration_rng(s.iteration);
  IterationLog log;

  Rng latent_rng = it.split("latent");
  const auto latent = sample_latent<T>(cfg.batch_size, cfg.classes, cfg.z_dim, latent_rng);
  nn::Graph<T> g_graph;
  const auto fake = s.generator.forward(g_graph, latent.input(), nn::Mode::train);

  for (std::size_t k = 0; k < cfg.d_steps; ++k) {
    const auto real = stream.at(s.iteration * cfg.d_steps + k);
    const Rng step_rng = it.split("d_step").split(k);
    if (k + 1 == cfg.d_steps) {
      log.d = discriminator_update(s.discriminator, s.d_opt, real.images, real.labels, fake.detach(), latent.labels,
                                   step_rng);
    } else {
      log.d = discriminator_step(s, real, step_rng);
    }
  }
  log.g = generator_update(s.generator, s.g_opt, s.discriminator, g_graph, fake, latent.labels, cfg.g_loss,
                           it.split("g_step"));
  s.iteration += 1;
  log.iteration = s.iteration;
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

inline void check_dataset(const TrainConfig& c, const data::LabeledImageDataset& ds) {
  ds.validate();
  detail::require(ds.classes() == c.classes, "train: dataset has " + std::to_string(ds.classes()) +
                                                 " classes but config expects " + std::to_string(c.classes));
  detail::require(ds.height == c.resolution && ds.width == c.resolution && ds.channels == c.channels,
                  "train: dataset images are " + std::to_string(ds.channels) + "x" + std::to_string(ds.height) + "x" +
                      std::to_string(ds.width) + " but config expects " + std::to_string(c.channels) + "x" +
                      std::to_string(c.resolution) + "x" + std::to_string(c.resolution));
  detail::require(ds.size() >= c.batch_size, "train: dataset smaller than one batch");
}

/// Runs (or resumes) training until `until` iterations (default: config.iterations).
/// On a non-finite loss a NumericError propagates before any parameter is
/// updated by the failing player; checkpoints already delivered stay valid.
template <class T>
std::vector<IterationLog> train(Checkpoint<T>& s, const data::LabeledImageDataset& ds,
                                const TrainCallbacks<T>& callbacks = {},
                                std::optional<std::uint64_t> until = std::nullopt) {
  const auto& cfg = s.config;
  check_dataset(cfg, ds);
  const std::uint64_t stop = until.value_or(cfg.iterations);
  data::MinibatchStream<T> stream(ds, cfg.batch_size, s.data_rng());
  std::vector<IterationLog> logs;
  while (s.iteration < stop) {
    logs.push_back(train_iteration(s, stream));
    if (callbacks.on_iteration) callbacks.on_iteration(logs.back());
    const auto i = s.iteration;
    if (callbacks.on_metrics && cfg.metrics_every > 0 && i % cfg.metrics_every == 0) callbacks.on_metrics(s);
    if (callbacks.on_checkpoint && ((cfg.checkpoint_every > 0 && i % cfg.checkpoint_every == 0) || i == stop))
      callbacks.on_checkpoint(s);
  }
  return logs;
}

template <class T = float>
struct TrainResult {
  Checkpoint<T> checkpoint;
  std::vector<IterationLog> logs;
};

/// Fresh run from the seed in `config`.
template <class T = float>
TrainResult<T> train(const TrainConfig& config, const data::LabeledImageDataset& ds,
                     const TrainCallbacks<T>& callbacks = {}) {
  check_dataset(config, ds);
  auto s = Checkpoint<T>::initial(config);
  auto logs = train(s, ds, callbacks);
  return {std::move(s), std::move(logs)};
}

// ------------------------------------------------------------------ sampling

/// Generates images for `latent`. Eval mode uses running batch-norm statistics;
/// train mode uses the batch's own statistics and leaves the running ones intact.
template <class T>
nn::Tensor<T> sample(Generator<T>& g, const LatentBatch<T>& latent, nn::Mode bn_mode = nn::Mode::eval) {
  detail::require(latent.z.dim(1) == g.spec().z_dim && latent.one_hot.dim(1) == g.spec().classes,
                  "sample: latent width does not match the generator");
  const auto saved = g.buffers();
  nn::Graph<T> off(false);
  auto out = g.forward(off, latent.input(), bn_mode);
  g.buffers() = saved;
  return out;
}

/// Frames for z = (1 - t) z_a + t z_b, t = 0, 1/(steps-1), ..., 1, class fixed.
template <class T>
nn::Tensor<T> interpolate(Generator<T>& g, std::span<const T> z_a, std::span<const T> z_b, int label,
                          std::size_t steps) {
  detail::require(steps >= 2, "interpolate: steps must be >= 2");
  const std::size_t zd = g.spec().z_dim;
  detail::require(z_a.size() == zd && z_b.size() == zd, "interpolate: endpoints must have z_dim entries");
  std::vector<T> z(steps * zd);
  for (std::size_t i = 0; i < steps; ++i) {
    const T t = static_cast<T>(static_cast<double>(i) / static_cast<double>(steps - 1));
    for (std::size_t j = 0; j < zd; ++j) z[i * zd + j] = (T(1) - t) * z_a[j] + t * z_b[j];
  }
  return sample(g, make_latent<T>(nn::Tensor<T>({steps, zd}, std::move(z)), std::vector<int>(steps, label),
                                  g.spec().classes));
}

/// Cell (i, j) = G(z_rows[i], classes[j]), row-major: [rows * cols, C, R, R].
template <class T>
nn::Tensor<T> style_grid(Generator<T>& g, const nn::Tensor<T>& z_rows, std::span<const int> classes) {
  detail::require(z_rows.rank() == 2 && z_rows.dim(1) == g.spec().z_dim && !classes.empty(),
                  "style_grid: need [rows, z_dim] noise and at least one class");
  const std::size_t rows = z_rows.dim(0), cols = classes.size(), zd = z_rows.dim(1);
  std::vector<T> z(rows * cols * zd);
  std::vector<int> labels(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      std::copy_n(z_rows.data().begin() + static_cast<std::ptrdiff_t>(i * zd), zd,
                  z.begin() + static_cast<std::ptrdiff_t>((i * cols + j) * zd));
      labels[i * cols + j] = classes[j];
    }
  return sample(g, make_latent<T>(nn::Tensor<T>({rows * cols, zd}, std::move(z)), std::move(labels),
                                  g.spec().classes));
}

}  // namespace acgan
