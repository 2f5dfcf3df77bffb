#pragma once

#include <filesystem>
#include <vector>

#include "acgan/data/dataset.hpp"
#include "acgan/model/checkpoint.hpp"

namespace acgan {

struct ClassifierConfig {
  std::size_t steps = 600;
  std::size_t batch_size = 64;
  nn::AdamConfig adam{0.001, 0.9, 0.999, 1e-8};
  double dropout = 0.5;
  std::size_t width_divisor = 1;
  bool horizontal_flip = false;
  std::uint64_t seed = 1;

  void validate() const {
    detail::require(batch_size >= 2, "classifier: batch_size must be >= 2 for batch norm");
    detail::require(width_divisor >= 1, "classifier: width_divisor must be >= 1");
    adam.validate();
  }
};

/// Convolutional stack with a K-way softmax head, used as a fixed judge of
/// generated images.
template <class T = float>
struct ClassifierModel {
  ClassifierConfig config;
  Discriminator<T> net;
  std::uint64_t steps_trained = 0;

  std::size_t classes() const { return net.spec().classes; }
  std::size_t resolution() const { return net.spec().resolution; }
  std::size_t channels() const { return net.spec().channels; }
};

inline DiscriminatorSpec classifier_spec(std::size_t classes, std::size_t resolution, std::size_t channels,
                                         const ClassifierConfig& cfg) {
  return arch::discriminator(classes, resolution, channels, HeadKind::softmax, 0.0, cfg.width_divisor, cfg.dropout);
}

struct AccuracyReport {
  std::vector<double> per_class;     // NaN-free: classes without samples report 0
  std::vector<std::size_t> counts;   // samples per class
  std::vector<std::size_t> correct;  // correct predictions per class
  double overall = 0;

  std::size_t total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
  }
};

/// Index of the largest entry; ties go to the lowest index.
template <class T>
std::size_t argmax(std::span<const T> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = k;
  return best;
}

/// Top-1 accuracy of a [N, K] distribution against labels.
template <class T>
AccuracyReport accuracy_from_dist(const nn::Tensor<T>& dist, std::span<const int> labels) {
  detail::require(dist.rank() == 2 && dist.dim(0) == labels.size(),
                  "accuracy: " + std::to_string(labels.size()) + " labels for distribution of shape " +
                      nn::to_string(dist.shape()));
  const std::size_t n = dist.dim(0), k = dist.dim(1);
  AccuracyReport r;
  r.counts.assign(k, 0);
  r.correct.assign(k, 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < k,
                    "accuracy: label " + std::to_string(labels[i]) + " out of range");
    const auto c = static_cast<std::size_t>(labels[i]);
    r.counts[c] += 1;
    if (argmax(dist.data().subspan(i * k, k)) == c) {
      r.correct[c] += 1;
      hits += 1;
    }
  }
  r.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c)
    r.per_class[c] = r.counts[c] ? static_cast<double>(r.correct[c]) / static_cast<double>(r.counts[c]) : 0.0;
  r.overall = n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0;
  return r;
}

/// Class distributions for [N, C, R, R] images in [-1, 1]. Eval mode, so the
/// model is not modified and each row depends on batching only through float
/// rounding in the matrix products. Fixed `chunk` gives bit-identical output.
template <class T>
nn::Tensor<T> predict_dist(ClassifierModel<T>& model, const nn::Tensor<T>& images, std::size_t chunk = 256) {
  detail::require(images.rank() == 4 && images.dim(1) == model.channels() && images.dim(2) == model.resolution() &&
                      images.dim(3) == model.resolution(),
                  "predict_dist: expected images [N, " + std::to_string(model.channels()) + ", " +
                      std::to_string(model.resolution()) + ", " + std::to_string(model.resolution()) + "], got " +
                      nn::to_string(images.shape()));
  for (T v : images.data())
    detail::require(v >= T(-1) && v <= T(1), "predict_dist: pixel values must lie in [-1, 1]");
  const std::size_t n = images.dim(0), per = images.size() / n, k = model.classes();
  std::vector<T> out(n * k);
  Rng unused;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start);
    std::vector<T> part(images.data().begin() + static_cast<std::ptrdiff_t>(start * per),
                        images.data().begin() + static_cast<std::ptrdiff_t>((start + m) * per));
    nn::Tensor<T> batch({m, images.dim(1), images.dim(2), images.dim(3)}, std::move(part));
    nn::Graph<T> off(false);
    const auto head = model.net.forward(off, batch, nn::Mode::eval, unused);
    std::copy(head.class_probs.data().begin(), head.class_probs.data().end(),
              out.begin() + static_cast<std::ptrdiff_t>(start * k));
  }
  return nn::Tensor<T>({n, k}, std::move(out));
}

template <class T>
AccuracyReport top1_accuracy(ClassifierModel<T>& model, const nn::Tensor<T>& images, std::span<const int> labels) {
  detail::require(images.rank() == 4 && images.dim(0) == labels.size(), "top1_accuracy: image/label count mismatch");
  return accuracy_from_dist(predict_dist(model, images), labels);
}

template <class T>
AccuracyReport top1_accuracy(ClassifierModel<T>& model, const data::LabeledImageDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<int> labels(ds.labels.begin(), ds.labels.end());
  return top1_accuracy(model, data::images_to_tensor<T>(ds, all), labels);
}

template <class T = float>
ClassifierModel<T> initial_classifier(const data::LabeledImageDataset& train_set, const ClassifierConfig& cfg) {
  cfg.validate();
  train_set.validate();
  detail::require(train_set.height == train_set.width, "classifier: images must be square");
  return {cfg, Discriminator<T>(classifier_spec(train_set.classes(), train_set.height, train_set.channels, cfg),
                                Rng(cfg.seed).split("init.classifier")),
          0};
}

template <class T = float>
struct ClassifierResult {
  ClassifierModel<T> model;
  AccuracyReport held_out;
};

/// Trains with cross-entropy on `train_set` and reports accuracy on `held_out`.
template <class T = float>
ClassifierResult<T> train_classifier(const data::LabeledImageDataset& train_set,
                                     const data::LabeledImageDataset& held_out, const ClassifierConfig& cfg) {
  detail::require(train_set.classes() >= 2, "classifier: need at least two classes");
  detail::require(held_out.classes() == train_set.classes() && held_out.height == train_set.height &&
                      held_out.width == train_set.width && held_out.channels == train_set.channels,
                  "classifier: held-out split does not match the training split");
  auto model = initial_classifier<T>(train_set, cfg);
  auto opt = nn::AdamState<T>::fresh(model.net.params(), cfg.adam);
  const Rng root = Rng(cfg.seed);
  data::MinibatchStream<T> stream(train_set, cfg.batch_size, root.split("data"));
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto batch = stream.at(step);
    Rng step_rng = root.split("step").split(step);
    if (cfg.horizontal_flip) {
      auto v = batch.images.values();
      const std::size_t c = batch.images.dim(1), h = batch.images.dim(2), w = batch.images.dim(3);
      for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        if (step_rng.uniform() >= 0.5) continue;
        for (std::size_t ch = 0; ch < c; ++ch)
          for (std::size_t y = 0; y < h; ++y) {
            T* row = v.data() + ((i * c + ch) * h + y) * w;
            std::reverse(row, row + w);
          }
      }
      batch.images = nn::Tensor<T>(batch.images.shape(), std::move(v));
    }
    nn::Graph<T> g;
    const auto head = model.net.forward(g, batch.images, nn::Mode::train, step_rng);
    const auto ll = class_log_likelihood(g, head, batch.labels);
    g.backward(nn::scale(g, ll, T(-1)));
    impl::check_update(model.net.params(), {static_cast<double>(ll.item())}, "classifier step");
    nn::adam_step(model.net.params(), opt);
    model.steps_trained += 1;
  }
  auto report = top1_accuracy(model, held_out);
  return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------- persistence

inline constexpr const char* kClassifierTag = "classifier";

template <class T>
ckpt::Container to_container(const ClassifierModel<T>& m) {
  ckpt::Container c;
  c.tag = kClassifierTag;
  c.iteration = m.steps_trained;
  c.rng = Rng(m.config.seed);
  c.meta.set("classifier.steps", static_cast<std::uint64_t>(m.config.steps));
  c.meta.set("classifier.batch_size", static_cast<std::uint64_t>(m.config.batch_size));
  impl::write_adam(c.meta, "classifier.adam", m.config.adam);
  c.meta.set("classifier.dropout", m.config.dropout);
  c.meta.set("classifier.width_divisor", static_cast<std::uint64_t>(m.config.width_divisor));
  c.meta.set("classifier.horizontal_flip", m.config.horizontal_flip);
  c.meta.set("classifier.seed", m.config.seed);
  write_spec(c.meta, "net", m.net.spec());
  impl::put_network<T>(c, "classifier", m.net.params(), m.net.buffers(), nullptr);
  return c;
}

template <class T = float>
ClassifierModel<T> classifier_from_container(const ckpt::Container& c) {
  if (c.tag != kClassifierTag) throw ArtifactMismatch("checkpoint tag '" + c.tag + "' is not '" + kClassifierTag + "'");
  ClassifierConfig cfg;
  cfg.steps = c.meta.size_value("classifier.steps");
  cfg.batch_size = c.meta.size_value("classifier.batch_size");
  cfg.adam = impl::read_adam(c.meta, "classifier.adam");
  cfg.dropout = c.meta.f64("classifier.dropout");
  cfg.width_divisor = c.meta.size_value("classifier.width_divisor");
  cfg.horizontal_flip = c.meta.flag("classifier.horizontal_flip");
  cfg.seed = c.meta.u64("classifier.seed");
  ClassifierModel<T> m{cfg, Discriminator<T>(read_discriminator_spec(c.meta, "net"), Rng()), c.iteration};
  std::size_t at = 0;
  impl::get_network<T>(c, at, "classifier", m.net.params(), m.net.buffers(), nullptr);
  if (at != c.entries.size()) throw ArtifactMismatch("classifier checkpoint has unexpected extra entries");
  return m;
}

template <class T>
void save_classifier(const ClassifierModel<T>& m, const std::filesystem::path& path) {
  ckpt::save(to_container(m), path);
}

template <class T = float>
ClassifierModel<T> load_classifier(const std::filesystem::path& path) {
  return classifier_from_container<T>(ckpt::load(path, kClassifierTag));
}

/// CRC32 of the serialized model (the checksum stored in its file): the
/// fingerprint reports cite.
template <class T>
std::uint32_t classifier_fingerprint(const ClassifierModel<T>& m) {
  const auto bytes = ckpt::encode(to_container(m));
  return io::crc32(std::span<const std::uint8_t>(bytes).first(bytes.size() - 4));
}

}  // namespace acgan
