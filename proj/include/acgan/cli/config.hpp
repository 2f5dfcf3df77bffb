#pragma once

// Plain-text run configuration: one `section.key = value` per line, `#` starts
// a comment. Every key has a default; unknown keys are rejected.

#include <charconv>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acgan/core/binary_io.hpp"
#include "acgan/core/meta.hpp"
#include "acgan/data/shapes.hpp"
#include "acgan/model/classifier.hpp"
#include "acgan/model/training.hpp"

namespace acgan::cli {

/// Bad configuration file, key or value (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct EvalConfig {
  std::size_t samples = 512;                  // generated samples, balanced over classes
  std::size_t pairs = 100;                    // MS-SSIM pairs per class
  std::size_t real_per_class = 100;           // real images per class for the real-data diversity report
  std::vector<std::size_t> curve_resolutions = {8, 16, 32};
  std::size_t curve_subsets = 10;
  std::size_t iscore_groups = 10;
  std::size_t nn_samples = 16;
  double joint_cutoff = 0.01;
  std::size_t collapse_samples = 24;          // per class, at every metrics point during training
  std::size_t collapse_pairs = 50;
  std::string classifier_crc32;               // expected fingerprint (8 hex digits); empty: not checked
};

struct SweepConfig {
  std::vector<std::size_t> class_counts = {4, 8, 16};
  std::size_t restarts = 3;
  std::size_t report_classes = 4;  // diversity over the first g classes
  std::size_t iterations = 500;
  std::size_t samples_per_class = 32;
};

struct ExploreConfig {
  int cls = 0;
  std::size_t steps = 8;
  std::size_t rows = 8;
  std::vector<int> classes;  // style-grid columns; empty: all classes
};

struct PathsConfig {
  std::string dataset = "data/train.acgd";
  std::string held_out = "data/held_out.acgd";
  std::string classifier = "classifier/classifier.acgk";
  std::string checkpoint = "acgan/checkpoint.acgk";
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> data_seed, classifier_seed, train_seed;  // unset: follow `seed`
  data::ShapesConfig data;
  std::size_t held_out_per_class = 250;
  ClassifierConfig classifier;
  TrainConfig train;
  EvalConfig eval;
  SweepConfig sweep;
  ExploreConfig explore;
  PathsConfig paths;

  RunConfig() {
    data.classes = train.classes;
    data.resolution = train.resolution;
  }

  /// Copies shared values (classes, resolution, channels, seeds) into the
  /// sub-configs and pins every defaulted seed and shape list, so the printed
  /// form of a resolved config names exactly what ran.
  void resolve() {
    train.classes = data.classes;
    train.resolution = data.resolution;
    train.channels = data.channels;
    data_seed = data.seed = data_seed.value_or(seed);
    classifier_seed = classifier.seed = classifier_seed.value_or(seed);
    train_seed = train.seed = train_seed.value_or(seed);
    if (data.classes <= data::kShapeKindCount) data.kinds = data.resolved_kinds();
  }
};

namespace impl {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty())
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a number");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

template <class N>
std::string join(const std::vector<N>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace impl

/// One configurable key: how to print its current value and how to assign it.
struct Key {
  std::string name;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

/// The registry of every key, bound to `c`. Order is the order of the resolved file.
inline std::vector<Key> keys(RunConfig& c) {
  std::vector<Key> k;
  auto size_key = [&k](std::string name, std::size_t& ref) {
    k.push_back({name, [&ref] { return std::to_string(ref); },
                 [&ref, name](const std::string& v) { ref = impl::parse_number<std::size_t>(name, v); }});
  };
  auto u64_key = [&k](std::string name, std::uint64_t& ref) {
    k.push_back({name, [&ref] { return std::to_string(ref); },
                 [&ref, name](const std::string& v) { ref = impl::parse_number<std::uint64_t>(name, v); }});
  };
  auto seed_key = [&k](std::string name, std::optional<std::uint64_t>& ref) {
    k.push_back({name, [&ref] { return ref ? std::to_string(*ref) : std::string("auto"); },
                 [&ref, name](const std::string& v) {
                   if (v == "auto") ref.reset();
                   else ref = impl::parse_number<std::uint64_t>(name, v);
                 }});
  };
  auto f64_key = [&k](std::string name, double& ref) {
    k.push_back({name, [&ref] { return format_double(ref); },
                 [&ref, name](const std::string& v) { ref = impl::parse_number<double>(name, v); }});
  };
  auto bool_key = [&k](std::string name, bool& ref) {
    k.push_back({name, [&ref] { return std::string(ref ? "true" : "false"); },
                 [&ref, name](const std::string& v) { ref = impl::parse_bool(name, v); }});
  };
  auto str_key = [&k](std::string name, std::string& ref) {
    k.push_back({name, [&ref] { return ref; }, [&ref](const std::string& v) { ref = v; }});
  };
  auto sizes_key = [&k](std::string name, std::vector<std::size_t>& ref) {
    k.push_back({name, [&ref] { return impl::join(ref); },
                 [&ref, name](const std::string& v) {
                   ref.clear();
                   for (const auto& s : impl::split_list(v)) ref.push_back(impl::parse_number<std::size_t>(name, s));
                 }});
  };
  auto ints_key = [&k](std::string name, std::vector<int>& ref) {
    k.push_back({name, [&ref] { return impl::join(ref); },
                 [&ref, name](const std::string& v) {
                   ref.clear();
                   for (const auto& s : impl::split_list(v)) ref.push_back(impl::parse_number<int>(name, s));
                 }});
  };
  auto adam_keys = [&](const std::string& prefix, nn::AdamConfig& a) {
    f64_key(prefix + "alpha", a.alpha);
    f64_key(prefix + "beta1", a.beta1);
    f64_key(prefix + "beta2", a.beta2);
    f64_key(prefix + "epsilon", a.epsilon);
  };

  u64_key("run.seed", c.seed);

  seed_key("data.seed", c.data_seed);
  size_key("data.classes", c.data.classes);
  size_key("data.resolution", c.data.resolution);
  size_key("data.channels", c.data.channels);
  size_key("data.samples_per_class", c.data.samples_per_class);
  size_key("data.held_out_per_class", c.held_out_per_class);
  f64_key("data.base_radius", c.data.base_radius);
  f64_key("data.jitter_position", c.data.jitter.position);
  f64_key("data.jitter_scale", c.data.jitter.scale);
  f64_key("data.jitter_color", c.data.jitter.color);
  f64_key("data.jitter_background", c.data.jitter.background);
  f64_key("data.jitter_noise", c.data.jitter.noise);
  k.push_back({"data.kinds",
               [&c] {
                 std::string out;
                 for (std::size_t i = 0; i < c.data.kinds.size(); ++i)
                   out += (i ? "," : "") + std::string(data::shape_name(c.data.kinds[i]));
                 return out;
               },
               [&c](const std::string& v) {
                 c.data.kinds.clear();
                 for (const auto& name : impl::split_list(v)) {
                   bool found = false;
                   for (std::size_t i = 0; i < data::kShapeKindCount && !found; ++i)
                     if (name == data::shape_name(static_cast<data::ShapeKind>(i))) {
                       c.data.kinds.push_back(static_cast<data::ShapeKind>(i));
                       found = true;
                     }
                   if (!found) throw ConfigError("config key 'data.kinds': unknown shape '" + name + "'");
                 }
               }});

  seed_key("classifier.seed", c.classifier_seed);
  size_key("classifier.steps", c.classifier.steps);
  size_key("classifier.batch_size", c.classifier.batch_size);
  adam_keys("classifier.", c.classifier.adam);
  f64_key("classifier.dropout", c.classifier.dropout);
  size_key("classifier.width_divisor", c.classifier.width_divisor);
  bool_key("classifier.horizontal_flip", c.classifier.horizontal_flip);

  seed_key("train.seed", c.train_seed);
  size_key("train.batch_size", c.train.batch_size);
  size_key("train.iterations", c.train.iterations);
  adam_keys("train.g_", c.train.g_adam);
  adam_keys("train.d_", c.train.d_adam);
  f64_key("train.noise_sigma", c.train.noise_sigma);
  size_key("train.checkpoint_every", c.train.checkpoint_every);
  size_key("train.metrics_every", c.train.metrics_every);
  size_key("train.z_dim", c.train.z_dim);
  size_key("train.width_divisor", c.train.width_divisor);
  size_key("train.d_steps", c.train.d_steps);
  k.push_back({"train.g_loss", [&c] { return std::string(generator_loss_name(c.train.g_loss)); },
               [&c](const std::string& v) {
                 if (v == "non_saturating") c.train.g_loss = GeneratorLoss::non_saturating;
                 else if (v == "minimax") c.train.g_loss = GeneratorLoss::minimax;
                 else throw ConfigError("config key 'train.g_loss': expected non_saturating or minimax, got '" + v + "'");
               }});

  size_key("eval.samples", c.eval.samples);
  size_key("eval.pairs", c.eval.pairs);
  size_key("eval.real_per_class", c.eval.real_per_class);
  sizes_key("eval.curve_resolutions", c.eval.curve_resolutions);
  size_key("eval.curve_subsets", c.eval.curve_subsets);
  size_key("eval.iscore_groups", c.eval.iscore_groups);
  size_key("eval.nn_samples", c.eval.nn_samples);
  f64_key("eval.joint_cutoff", c.eval.joint_cutoff);
  size_key("eval.collapse_samples", c.eval.collapse_samples);
  size_key("eval.collapse_pairs", c.eval.collapse_pairs);
  str_key("eval.classifier_crc32", c.eval.classifier_crc32);

  sizes_key("sweep.class_counts", c.sweep.class_counts);
  size_key("sweep.restarts", c.sweep.restarts);
  size_key("sweep.report_classes", c.sweep.report_classes);
  size_key("sweep.iterations", c.sweep.iterations);
  size_key("sweep.samples_per_class", c.sweep.samples_per_class);

  k.push_back({"explore.class", [&c] { return std::to_string(c.explore.cls); },
               [&c](const std::string& v) { c.explore.cls = impl::parse_number<int>("explore.class", v); }});
  size_key("explore.steps", c.explore.steps);
  size_key("explore.rows", c.explore.rows);
  ints_key("explore.classes", c.explore.classes);

  str_key("paths.dataset", c.paths.dataset);
  str_key("paths.held_out", c.paths.held_out);
  str_key("paths.classifier", c.paths.classifier);
  str_key("paths.checkpoint", c.paths.checkpoint);
  return k;
}

/// Applies `text` on top of the defaults.
inline RunConfig parse_config(std::string_view text, const std::string& origin = "config") {
  RunConfig c;
  auto registry = keys(c);
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = impl::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'section.key = value'");
    const auto name = impl::trim(body.substr(0, eq)), value = impl::trim(body.substr(eq + 1));
    auto it = std::find_if(registry.begin(), registry.end(), [&](const Key& key) { return key.name == name; });
    if (it == registry.end())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown config key '" + name + "'");
    it->set(value);
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

/// Every key with its current value, one per line; parse_config of the result
/// reproduces the configuration.
inline std::string to_text(RunConfig c) {
  std::string out = "# resolved configuration\n";
  std::string section;
  for (const auto& key : keys(c)) {
    const auto s = key.name.substr(0, key.name.find('.'));
    if (s != section) {
      if (!section.empty()) out += "\n";
      section = s;
    }
    out += key.name + " = " + key.get() + "\n";
  }
  return out;
}

/// Checks cross-key constraints after resolve().
inline void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  try {
    c.data.validate();
    c.classifier.validate();
    c.train.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  check(c.held_out_per_class >= 1, "data.held_out_per_class must be >= 1");
  check(c.eval.samples >= 2 * c.data.classes, "eval.samples must give at least two samples per class");
  check(c.eval.pairs >= 1 && c.eval.curve_subsets >= 1 && c.eval.iscore_groups >= 1, "eval counts must be >= 1");
  check(!c.eval.curve_resolutions.empty(), "eval.curve_resolutions must not be empty");
  for (auto r : c.eval.curve_resolutions)
    check(r >= 1 && r <= c.data.resolution,
          "eval.curve_resolutions: " + std::to_string(r) + " is outside [1, data.resolution]");
  check(c.eval.collapse_samples >= 2, "eval.collapse_samples must be >= 2");
  check(c.eval.classifier_crc32.empty() || c.eval.classifier_crc32.size() == 8,
        "eval.classifier_crc32 must be 8 hex digits");
  check(c.sweep.restarts >= 1 && !c.sweep.class_counts.empty(), "sweep needs class counts and restarts >= 1");
  check(c.sweep.samples_per_class >= 2, "sweep.samples_per_class must be >= 2");
  check(c.explore.steps >= 2, "explore.steps must be >= 2");
  check(c.explore.rows >= 1, "explore.rows must be >= 1");
}

}  // namespace acgan::cli
