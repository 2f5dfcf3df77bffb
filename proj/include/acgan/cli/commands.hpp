#pragma once

// Experiment commands behind the acgan-lab tool. Each command is a function of
// the resolved configuration and the artifacts already in the output
// directory; all randomness is derived from the configured seeds.

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "acgan/acgan.hpp"
#include "acgan/cli/config.hpp"

namespace acgan::cli {

namespace fs = std::filesystem;

/// Exclusive advisory lock on `<dir>/.acgan-lab.lock`, held for the lifetime
/// of the object. The kernel drops it when the process dies, so a crashed run
/// never leaves a stale lock behind.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) {
    const auto path = dir / ".acgan-lab.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot create lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw IoError("output directory " + dir.string() + " is in use by another acgan-lab process");
    }
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;
  ~OutputLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

 private:
  int fd_ = -1;
};

struct Context {
  RunConfig cfg;  // resolved
  fs::path out;
  std::ostream* log = &std::cerr;

  fs::path path(const std::string& p) const { return fs::path(p).is_absolute() ? fs::path(p) : out / p; }
  std::ostream& say() const { return *log; }
};

namespace impl {

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

inline std::string tagged(const std::string& stem, std::uint64_t iteration, std::uint64_t seed) {
  std::ostringstream os;
  os << stem << "_it" << std::setw(6) << std::setfill('0') << iteration << "_seed" << seed << ".png";
  return os.str();
}

inline void ensure_parent(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
}

inline void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  io::write_text(p, text);
}

inline data::Image dataset_image(const data::LabeledImageDataset& ds, std::size_t i) {
  const auto src = ds.image(i);
  data::Image img{ds.width, ds.height, ds.channels, std::vector<std::uint8_t>(src.size())};
  for (std::size_t c = 0; c < ds.channels; ++c)
    for (std::size_t y = 0; y < ds.height; ++y)
      for (std::size_t x = 0; x < ds.width; ++x) img.at(x, y, c) = src[(c * ds.height + y) * ds.width + x];
  return img;
}

inline std::vector<data::Image> tensor_images(const nn::Tensor<float>& t) {
  const std::size_t n = t.dim(0), per = t.size() / n;
  std::vector<data::Image> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(data::tensor_image(t.data().subspan(i * per, per), t.dim(1), t.dim(2), t.dim(3)));
  return out;
}

inline void write_grid(const fs::path& p, const std::vector<data::Image>& cells, std::size_t rows, std::size_t cols,
                       std::map<std::string, std::string> text) {
  text["rows"] = std::to_string(rows);
  text["cols"] = std::to_string(cols);
  ensure_parent(p);
  data::write_png(p, data::tile_grid(cells, rows, cols), text);
}

/// Drops data rows whose first column (an iteration) exceeds `last`; comment
/// and header lines are kept. Used when training resumes from a checkpoint
/// older than the newest logged row.
inline void truncate_log(const fs::path& p, std::uint64_t last, std::size_t column = 0) {
  std::ifstream in(p);
  if (!in) return;
  std::string line, kept;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#' || header) {
      if (line[0] != '#') header = false;
      kept += line + "\n";
      continue;
    }
    std::istringstream is(line);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) std::getline(is, cell, ',');
    if (std::stoull(cell) <= last) kept += line + "\n";
  }
  in.close();
  io::write_text(p, kept);
}

inline void check_same_images(const data::LabeledImageDataset& ds, std::size_t classes, std::size_t resolution,
                              std::size_t channels, const std::string& what) {
  if (ds.classes() != classes || ds.height != resolution || ds.channels != channels)
    throw ArtifactMismatch(what + " expects " + std::to_string(classes) + " classes of " + std::to_string(channels) +
                           "x" + std::to_string(resolution) + "x" + std::to_string(resolution) +
                           " images; the dataset has " + std::to_string(ds.classes()) + " classes of " +
                           std::to_string(ds.channels) + "x" + std::to_string(ds.height) + "x" +
                           std::to_string(ds.width));
}

inline Meta config_fingerprint(TrainConfig c) {
  c.iterations = 0;
  c.checkpoint_every = 0;
  c.metrics_every = 0;
  Meta m;
  write_train_config(m, c);
  return m;
}

/// Generated images for evaluation: `n` samples with labels cycling through
/// the classes, eval-mode batch norm, fixed chunking.
inline std::pair<nn::Tensor<float>, std::vector<int>> generate(Generator<float>& g, std::size_t n, Rng rng) {
  const std::size_t k = g.spec().classes, chunk = 128;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
  const auto latent = sample_latent<float>(n, k, g.spec().z_dim, rng, std::span<const int>(labels));
  std::vector<float> pixels;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t m = std::min(chunk, n - start), zd = g.spec().z_dim;
    std::vector<float> z(latent.z.data().begin() + static_cast<std::ptrdiff_t>(start * zd),
                         latent.z.data().begin() + static_cast<std::ptrdiff_t>((start + m) * zd));
    const std::vector<int> l(labels.begin() + static_cast<std::ptrdiff_t>(start),
                             labels.begin() + static_cast<std::ptrdiff_t>(start + m));
    const auto part = sample(g, make_latent<float>(nn::Tensor<float>({m, zd}, std::move(z)), l, k));
    pixels.insert(pixels.end(), part.data().begin(), part.data().end());
  }
  const auto& s = g.spec();
  return {nn::Tensor<float>({n, s.channels, s.resolution, s.resolution}, std::move(pixels)), std::move(labels)};
}

/// First `per_class` images of every class, in dataset order.
inline std::pair<nn::Tensor<float>, std::vector<int>> real_images(const data::LabeledImageDataset& ds,
                                                                  std::size_t per_class) {
  std::vector<std::size_t> idx;
  std::vector<int> labels;
  for (std::size_t c = 0; c < ds.classes(); ++c) {
    const auto of = ds.indices_of(c);
    for (std::size_t i = 0; i < std::min(per_class, of.size()); ++i) {
      idx.push_back(of[i]);
      labels.push_back(static_cast<int>(c));
    }
  }
  return {data::images_to_tensor<float>(ds, idx), std::move(labels)};
}

inline std::vector<int> all_labels(const data::LabeledImageDataset& ds) { return {ds.labels.begin(), ds.labels.end()}; }

inline nn::Tensor<float> all_images(const data::LabeledImageDataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return data::images_to_tensor<float>(ds, idx);
}

}  // namespace impl

/// Resolves and validates `cfg`, creates `out` and writes the resolved
/// configuration there.
inline Context make_context(RunConfig cfg, const fs::path& out, std::ostream& log = std::cerr) {
  cfg.resolve();
  validate(cfg);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
  Context ctx{std::move(cfg), out, &log};
  impl::write_text(out / "resolved_config.txt", to_text(ctx.cfg));
  return ctx;
}

// ------------------------------------------------------------------ loaders

inline data::LabeledImageDataset load_train_set(const Context& ctx) {
  auto ds = data::load_dataset(ctx.path(ctx.cfg.paths.dataset));
  impl::check_same_images(ds, ctx.cfg.data.classes, ctx.cfg.data.resolution, ctx.cfg.data.channels,
                          "the configuration");
  return ds;
}

inline data::LabeledImageDataset load_held_out(const Context& ctx) {
  auto ds = data::load_dataset(ctx.path(ctx.cfg.paths.held_out));
  impl::check_same_images(ds, ctx.cfg.data.classes, ctx.cfg.data.resolution, ctx.cfg.data.channels,
                          "the configuration");
  return ds;
}

/// The frozen judge; its fingerprint must match eval.classifier_crc32 when set.
inline ClassifierModel<float> load_judge(const Context& ctx) {
  auto m = load_classifier<float>(ctx.path(ctx.cfg.paths.classifier));
  const auto fp = impl::hex32(classifier_fingerprint(m));
  if (!ctx.cfg.eval.classifier_crc32.empty() && ctx.cfg.eval.classifier_crc32 != fp)
    throw ArtifactMismatch("classifier fingerprint " + fp + " does not match eval.classifier_crc32 = " +
                           ctx.cfg.eval.classifier_crc32);
  if (m.classes() != ctx.cfg.data.classes || m.resolution() != ctx.cfg.data.resolution ||
      m.channels() != ctx.cfg.data.channels)
    throw ArtifactMismatch("classifier was trained on different images (" + std::to_string(m.classes()) +
                           " classes at " + std::to_string(m.resolution()) + " px)");
  return m;
}

inline Checkpoint<float> load_generator_state(const Context& ctx) {
  auto s = load_checkpoint<float>(ctx.path(ctx.cfg.paths.checkpoint));
  const auto& g = s.generator.spec();
  if (g.classes != ctx.cfg.data.classes || g.resolution != ctx.cfg.data.resolution ||
      g.channels != ctx.cfg.data.channels)
    throw ArtifactMismatch("checkpoint generator emits " + std::to_string(g.classes) + " classes at " +
                           std::to_string(g.resolution) + " px; the configuration expects " +
                           std::to_string(ctx.cfg.data.classes) + " at " + std::to_string(ctx.cfg.data.resolution));
  return s;
}

inline Rng eval_rng(const Context& ctx) { return Rng(ctx.cfg.train.seed).split("eval"); }

// ----------------------------------------------------------------- commands

inline void gen_data(const Context& ctx) {
  auto sc = ctx.cfg.data;
  sc.split = data::SplitTag::train;
  const auto train = data::generate_shapes(sc);
  sc.split = data::SplitTag::held_out;
  sc.samples_per_class = ctx.cfg.held_out_per_class;
  const auto held = data::generate_shapes(sc);
  for (const auto& [ds, p] : {std::pair{&train, ctx.path(ctx.cfg.paths.dataset)},
                              std::pair{&held, ctx.path(ctx.cfg.paths.held_out)}}) {
    impl::ensure_parent(p);
    data::save_dataset(*ds, p);
  }
  const std::size_t cols = std::min<std::size_t>(8, ctx.cfg.data.samples_per_class);
  std::vector<data::Image> cells;
  for (std::size_t c = 0; c < train.classes(); ++c) {
    const auto idx = train.indices_of(c);
    for (std::size_t j = 0; j < cols; ++j) cells.push_back(impl::dataset_image(train, idx[j]));
  }
  impl::write_grid(ctx.out / "data" / ("preview_seed" + std::to_string(sc.seed) + ".png"), cells, train.classes(), cols,
                   {{"seed", std::to_string(sc.seed)}});
  ctx.say() << "gen-data: " << train.size() << " train and " << held.size() << " held-out images, "
            << train.classes() << " classes at " << sc.resolution << " px -> " << ctx.cfg.paths.dataset << "\n";
}

inline void train_classifier_cmd(const Context& ctx) {
  const auto train = load_train_set(ctx), held = load_held_out(ctx);
  const auto start = std::chrono::steady_clock::now();
  const auto r = train_classifier<float>(train, held, ctx.cfg.classifier);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto p = ctx.path(ctx.cfg.paths.classifier);
  impl::ensure_parent(p);
  save_classifier(r.model, p);
  const auto fp = impl::hex32(classifier_fingerprint(r.model));
  std::ostringstream os;
  os << metrics::impl::csv_preamble("classifier", "class,name,held_out_accuracy,count");
  os << "# fingerprint=" << fp << " held_out_accuracy=" << format_double(r.held_out.overall)
     << " steps=" << r.model.steps_trained << "\n";
  for (std::size_t c = 0; c < train.classes(); ++c)
    os << c << ',' << train.class_names[c] << ',' << format_double(r.held_out.per_class[c]) << ','
       << r.held_out.counts[c] << "\n";
  impl::write_text(p.parent_path() / "report.csv", os.str());
  ctx.say() << "train-classifier: held-out accuracy " << r.held_out.overall << " after " << r.model.steps_trained
            << " steps (" << std::fixed << std::setprecision(1) << secs << std::defaultfloat
            << " s), fingerprint " << fp << "\n";
}

inline void train_acgan_cmd(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto ds = load_train_set(ctx);
  const auto ckpt_path = ctx.path(cfg.paths.checkpoint);
  const auto dir = ckpt_path.parent_path();
  impl::ensure_parent(ckpt_path);
  const auto losses_path = dir / "losses.csv", points_path = dir / "collapse_points.csv";

  Checkpoint<float> s = [&] {
    if (!fs::exists(ckpt_path)) return Checkpoint<float>::initial(cfg.train);
    auto prev = load_checkpoint<float>(ckpt_path);
    if (impl::config_fingerprint(prev.config).encode() != impl::config_fingerprint(cfg.train).encode())
      throw ArtifactMismatch("existing checkpoint " + ckpt_path.string() +
                             " was trained with a different configuration; remove it or set paths.checkpoint");
    prev.config = cfg.train;
    return prev;
  }();
  const bool fresh = s.iteration == 0;
  if (fresh) {
    save_checkpoint(s, ckpt_path);
    io::write_text(losses_path, metrics::impl::csv_preamble("losses", "iteration,d_source,d_class,g_source,g_class"));
    io::write_text(points_path, metrics::impl::csv_preamble("collapse_points", "iteration,class,mean_msssim,std_msssim"));
  } else {
    impl::truncate_log(losses_path, s.iteration);
    impl::truncate_log(points_path, s.iteration);
    ctx.say() << "train-acgan: resuming from iteration " << s.iteration << "\n";
  }
  std::ofstream losses(losses_path, std::ios::app), points(points_path, std::ios::app);
  if (!losses || !points) throw IoError("cannot append to the training logs in " + dir.string());

  const std::size_t k = cfg.train.classes;
  const Rng grid_rng = Rng(cfg.train.seed).split("grid");
  auto write_samples = [&](const Checkpoint<float>& st) {
    const std::size_t cols = 8;
    std::vector<int> labels(k * cols);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i / cols);
    Rng r = grid_rng;
    auto latent = sample_latent<float>(labels.size(), k, cfg.train.z_dim, r, std::span<const int>(labels));
    Generator<float> g = st.generator;  // shares the parameters
    impl::write_grid(dir / impl::tagged("samples", st.iteration, cfg.train.seed), impl::tensor_images(sample(g, latent)),
                     k, cols, {{"iteration", std::to_string(st.iteration)}, {"seed", std::to_string(cfg.train.seed)}});
  };

  const std::uint64_t start_iteration = s.iteration;
  std::uint64_t last_good = s.iteration;
  double seconds = 0;
  TrainCallbacks<float> cb;
  cb.on_iteration = [&](const IterationLog& l) {
    seconds += l.seconds;
    losses << l.iteration << ',' << format_double(l.d.source) << ',' << format_double(l.d.cls) << ','
           << format_double(l.g.source) << ',' << format_double(l.g.cls) << "\n";
    if (l.iteration % 50 == 0 || l.iteration == cfg.train.iterations)
      ctx.say() << "iter " << l.iteration << "/" << cfg.train.iterations << "  L_S(D) " << l.d.source << "  L_C(D) "
                << l.d.cls << "  logP(fake|G) " << l.g.source << "  " << std::fixed << std::setprecision(2)
                << seconds / static_cast<double>(l.iteration - start_iteration) << std::defaultfloat
                << " s/it\n";
  };
  cb.on_metrics = [&](const Checkpoint<float>& st) {
    std::vector<std::pair<std::uint64_t, Generator<float>>> one{{st.iteration, st.generator}};
    for (std::size_t c = 0; c < k; ++c) {
      const auto t = metrics::collapse_trajectory<float>(one, static_cast<int>(c), cfg.eval.collapse_samples,
                                                         cfg.eval.collapse_pairs,
                                                         Rng(cfg.train.seed).split("collapse").split(c));
      points << st.iteration << ',' << c << ',' << format_double(t.mean[0]) << ',' << format_double(t.std[0]) << "\n";
    }
  };
  cb.on_checkpoint = [&](const Checkpoint<float>& st) {
    losses.flush();
    points.flush();
    save_checkpoint(st, ckpt_path);
    write_samples(st);
    last_good = st.iteration;
  };

  try {
    train(s, ds, cb);
  } catch (const NumericError& e) {
    losses.flush();
    throw NumericError(std::string(e.what()) + " at iteration " + std::to_string(s.iteration + 1) +
                       "; last good checkpoint (iteration " + std::to_string(last_good) + ") kept at " +
                       ckpt_path.string());
  }
  losses.close();
  points.close();

  // Collapse report over every metrics point logged so far.
  std::map<std::size_t, metrics::CollapseTrajectory> series;
  {
    std::ifstream in(points_path);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      std::istringstream is(line);
      std::string it, c, m, sd;
      std::getline(is, it, ',');
      std::getline(is, c, ',');
      std::getline(is, m, ',');
      std::getline(is, sd, ',');
      auto& t = series[std::stoul(c)];
      t.cls = std::stoi(c);
      t.iterations.push_back(std::stoull(it));
      t.mean.push_back(std::stod(m));
      t.std.push_back(std::stod(sd));
    }
  }
  std::vector<metrics::CollapseTrajectory> ts;
  for (auto& [c, t] : series) {
    t.collapse_index = metrics::detect_collapse(t.mean);
    ts.push_back(t);
  }
  impl::write_text(dir / "collapse.csv", metrics::collapse_csv(ts));
  for (const auto& t : ts)
    if (t.collapse_index)
      ctx.say() << "train-acgan: class " << t.cls << " flagged for collapse at iteration "
                << t.iterations[*t.collapse_index] << "\n";
  ctx.say() << "train-acgan: " << s.iteration << " iterations, checkpoint " << cfg.paths.checkpoint << "\n";
}

inline metrics::DiversityReport generated_diversity(const Context& ctx, Generator<float>& g) {
  const auto [images, labels] = impl::generate(g, ctx.cfg.eval.samples, eval_rng(ctx).split("samples"));
  return metrics::intra_class_diversity(images, labels, ctx.cfg.data.classes, ctx.cfg.eval.pairs,
                                        eval_rng(ctx).split("diversity"));
}

inline void eval_diversity(const Context& ctx) {
  auto s = load_generator_state(ctx);
  const auto ds = load_train_set(ctx);
  const auto gen = generated_diversity(ctx, s.generator);
  const auto [real, real_labels] = impl::real_images(ds, ctx.cfg.eval.real_per_class);
  const auto rep_real = metrics::intra_class_diversity(real, real_labels, ds.classes(), ctx.cfg.eval.pairs,
                                                       eval_rng(ctx).split("diversity.real"));
  impl::write_text(ctx.out / "eval" / "diversity_generated.csv", metrics::diversity_csv(gen));
  impl::write_text(ctx.out / "eval" / "diversity_real.csv", metrics::diversity_csv(rep_real));
  std::size_t flagged = 0;
  for (const auto& r : gen.rows) flagged += r.flagged;
  ctx.say() << "eval-diversity: " << flagged << "/" << gen.rows.size() << " generated classes at or above "
            << gen.threshold << " mean MS-SSIM\n";
}

inline void eval_curve(const Context& ctx) {
  auto judge = load_judge(ctx);
  auto s = load_generator_state(ctx);
  const auto held = load_held_out(ctx);
  const auto& e = ctx.cfg.eval;
  const auto real = metrics::discriminability_curve(judge, impl::all_images(held), impl::all_labels(held),
                                                    e.curve_resolutions, e.curve_subsets,
                                                    eval_rng(ctx).split("curve.real"));
  const auto [images, labels] = impl::generate(s.generator, e.samples, eval_rng(ctx).split("samples"));
  const auto gen = metrics::discriminability_curve(judge, images, labels, e.curve_resolutions, e.curve_subsets,
                                                   eval_rng(ctx).split("curve.generated"));
  impl::write_text(ctx.out / "eval" / "curve_real.csv", metrics::curve_csv(real));
  impl::write_text(ctx.out / "eval" / "curve_generated.csv", metrics::curve_csv(gen));
  ctx.say() << "eval-curve: generated accuracy";
  for (const auto& p : gen.points) ctx.say() << "  " << p.resolution << "px " << p.accuracy;
  ctx.say() << "\n";
}

inline void eval_iscore(const Context& ctx) {
  auto judge = load_judge(ctx);
  auto s = load_generator_state(ctx);
  const auto [images, labels] = impl::generate(s.generator, ctx.cfg.eval.samples, eval_rng(ctx).split("samples"));
  const auto rep = metrics::inception_score(predict_dist(judge, images), ctx.cfg.eval.iscore_groups);
  const auto held = load_held_out(ctx);
  const auto real = metrics::inception_score(predict_dist(judge, impl::all_images(held)), ctx.cfg.eval.iscore_groups,
                                             eval_rng(ctx).split("iscore.real"));
  impl::write_text(ctx.out / "eval" / "iscore.csv", metrics::iscore_csv(rep));
  impl::write_text(ctx.out / "eval" / "iscore_real.csv", metrics::iscore_csv(real));
  ctx.say() << "eval-iscore: generated " << rep.mean << " +- " << rep.std << ", held-out real " << real.mean << "\n";
}

inline void eval_joint(const Context& ctx) {
  auto judge = load_judge(ctx);
  auto s = load_generator_state(ctx);
  const auto [images, labels] = impl::generate(s.generator, ctx.cfg.eval.samples, eval_rng(ctx).split("samples"));
  const auto div = metrics::intra_class_diversity(images, labels, ctx.cfg.data.classes, ctx.cfg.eval.pairs,
                                                  eval_rng(ctx).split("diversity"));
  const auto acc = top1_accuracy(judge, images, labels);
  const auto rep = metrics::diversity_vs_discriminability(div, acc, ctx.cfg.eval.joint_cutoff);
  impl::write_text(ctx.out / "eval" / "joint.csv", metrics::joint_csv(rep));
  ctx.say() << "eval-joint: generated-sample accuracy " << acc.overall << ", pearson r "
            << (rep.r_defined ? format_double(rep.r) : std::string("undefined")) << "\n";
}

inline void eval_nn(const Context& ctx) {
  auto s = load_generator_state(ctx);
  const auto ds = load_train_set(ctx);
  const auto [images, labels] = impl::generate(s.generator, ctx.cfg.eval.nn_samples, eval_rng(ctx).split("nn"));
  const auto nbrs = metrics::nearest_neighbor_l1(images, ds);
  impl::write_text(ctx.out / "eval" / "nn.csv", metrics::nn_csv(nbrs));
  auto cells = impl::tensor_images(images);
  std::vector<data::Image> pairs;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    pairs.push_back(cells[i]);
    pairs.push_back(impl::dataset_image(ds, nbrs[i].index));
  }
  impl::write_grid(ctx.out / "eval" / impl::tagged("nn", s.iteration, ctx.cfg.train.seed), pairs, nbrs.size(), 2,
                   {{"iteration", std::to_string(s.iteration)}, {"seed", std::to_string(ctx.cfg.train.seed)}});
  double mean = 0;
  for (const auto& n : nbrs) mean += n.distance / static_cast<double>(nbrs.size());
  ctx.say() << "eval-nn: mean L1 distance to the nearest training image " << mean << "\n";
}

inline void sweep_classcount(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto ds = data::load_dataset(ctx.path(cfg.paths.dataset));
  for (auto m : cfg.sweep.class_counts)
    detail::require(m >= 2 && m <= ds.classes(), "sweep.class_counts: " + std::to_string(m) +
                                                     " classes requested but the dataset has " +
                                                     std::to_string(ds.classes()));
  std::ostringstream csv;
  csv << metrics::impl::csv_preamble("classcount", "m,restart,seed,steps,mean_msssim");
  csv << "# report_classes=" << cfg.sweep.report_classes << " pairs=" << cfg.eval.pairs
      << " samples_per_class=" << cfg.sweep.samples_per_class << "\n";
  for (auto m : cfg.sweep.class_counts)
    for (std::size_t r = 0; r < cfg.sweep.restarts; ++r) {
      std::vector<std::size_t> keep(m);
      for (std::size_t c = 0; c < m; ++c) keep[c] = c;
      const auto sub = ds.restrict_classes(keep);
      TrainConfig tc = cfg.train;
      tc.classes = m;
      tc.iterations = cfg.sweep.iterations;
      tc.checkpoint_every = 0;
      tc.metrics_every = 0;
      tc.seed = Rng(cfg.seed).split("sweep").split(m).split(r).next_u64();
      auto result = train<float>(tc, sub);
      const std::size_t g = std::min(cfg.sweep.report_classes, m);
      std::vector<int> labels;
      for (std::size_t c = 0; c < g; ++c)
        for (std::size_t i = 0; i < cfg.sweep.samples_per_class; ++i) labels.push_back(static_cast<int>(c));
      Rng lr = Rng(tc.seed).split("sweep.samples");
      const auto latent = sample_latent<float>(labels.size(), m, tc.z_dim, lr, std::span<const int>(labels));
      const auto images = sample(result.checkpoint.generator, latent);
      const auto rep = metrics::intra_class_diversity(images, labels, g, cfg.eval.pairs,
                                                      Rng(tc.seed).split("sweep.pairs"));
      double mean = 0;
      for (const auto& row : rep.rows) mean += row.mean / static_cast<double>(rep.rows.size());
      const auto p = ctx.out / "sweep" / ("m" + std::to_string(m) + "_r" + std::to_string(r) + ".acgk");
      impl::ensure_parent(p);
      save_checkpoint(result.checkpoint, p);
      csv << m << ',' << r << ',' << tc.seed << ',' << result.checkpoint.iteration << ',' << format_double(mean)
          << "\n";
      ctx.say() << "sweep: m=" << m << " restart=" << r << " steps=" << result.checkpoint.iteration
                << " mean MS-SSIM(first " << g << ")=" << mean << "\n";
    }
  impl::write_text(ctx.out / "sweep" / "classcount.csv", csv.str());
}

inline void interpolate_cmd(const Context& ctx) {
  auto s = load_generator_state(ctx);
  const auto& e = ctx.cfg.explore;
  const std::size_t k = s.generator.spec().classes, zd = s.generator.spec().z_dim;
  if (e.cls < 0 || static_cast<std::size_t>(e.cls) >= k)
    throw ConfigError("explore.class " + std::to_string(e.cls) + " is not a class of this generator (0.." +
                      std::to_string(k - 1) + ")");
  Rng rng = Rng(ctx.cfg.train.seed).split("explore").split("interpolate");
  std::vector<float> ends(2 * zd);
  rng.fill_normal(std::span<float>(ends));
  const auto frames = interpolate<float>(s.generator, std::span<const float>(ends).first(zd),
                                         std::span<const float>(ends).subspan(zd), e.cls, e.steps);
  impl::write_grid(ctx.out / "explore" / impl::tagged("interpolate_c" + std::to_string(e.cls), s.iteration,
                                                      ctx.cfg.train.seed),
                   impl::tensor_images(frames), 1, e.steps,
                   {{"class", std::to_string(e.cls)},
                    {"iteration", std::to_string(s.iteration)},
                    {"seed", std::to_string(ctx.cfg.train.seed)}});
  ctx.say() << "interpolate: " << e.steps << " frames for class " << e.cls << "\n";
}

inline void style_grid_cmd(const Context& ctx) {
  auto s = load_generator_state(ctx);
  const auto& e = ctx.cfg.explore;
  const std::size_t k = s.generator.spec().classes, zd = s.generator.spec().z_dim;
  std::vector<int> classes = e.classes;
  if (classes.empty())
    for (std::size_t c = 0; c < k; ++c) classes.push_back(static_cast<int>(c));
  for (int c : classes)
    if (c < 0 || static_cast<std::size_t>(c) >= k)
      throw ConfigError("explore.classes: " + std::to_string(c) + " is not a class of this generator");
  Rng rng = Rng(ctx.cfg.train.seed).split("explore").split("style");
  std::vector<float> z(e.rows * zd);
  rng.fill_normal(std::span<float>(z));
  const auto grid = style_grid(s.generator, nn::Tensor<float>({e.rows, zd}, std::move(z)), classes);
  impl::write_grid(ctx.out / "explore" / impl::tagged("style_grid", s.iteration, ctx.cfg.train.seed),
                   impl::tensor_images(grid), e.rows, classes.size(),
                   {{"iteration", std::to_string(s.iteration)}, {"seed", std::to_string(ctx.cfg.train.seed)}});
  ctx.say() << "style-grid: " << e.rows << " x " << classes.size() << "\n";
}

/// gen-data -> train-classifier -> train-acgan -> every evaluation and both
/// exploration outputs. The judge's fingerprint is pinned after training so
/// the evaluations verify they read the classifier this run produced.
inline void run_all(Context ctx) {
  gen_data(ctx);
  train_classifier_cmd(ctx);
  if (ctx.cfg.eval.classifier_crc32.empty())
    ctx.cfg.eval.classifier_crc32 =
        impl::hex32(classifier_fingerprint(load_classifier<float>(ctx.path(ctx.cfg.paths.classifier))));
  train_acgan_cmd(ctx);
  eval_diversity(ctx);
  eval_curve(ctx);
  eval_iscore(ctx);
  eval_joint(ctx);
  eval_nn(ctx);
  interpolate_cmd(ctx);
  style_grid_cmd(ctx);
}

}  // namespace acgan::cli
