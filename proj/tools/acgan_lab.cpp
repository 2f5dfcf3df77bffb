// acgan-lab: dataset generation, AC-GAN and classifier training, evaluation.
//
// Exit codes: 0 success, 2 configuration, 3 I/O or malformed file,
// 4 numeric divergence, 5 artifact mismatch (wrong tag, checksum, version,
// classifier fingerprint).

#include <malloc.h>

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <map>

#include "acgan/cli/commands.hpp"

namespace {

using Command = std::function<void(const acgan::cli::Context&)>;

int run(const std::string& name, const Command& cmd, const std::string& config_path, std::optional<std::uint64_t> seed,
        const std::string& out) {
  using namespace acgan;
  try {
    auto cfg = config_path.empty() ? cli::RunConfig{} : cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    std::filesystem::create_directories(out);
    cli::OutputLock lock(out);
    const auto ctx = cli::make_context(cfg, out);
    cmd(ctx);
    return 0;
  } catch (const InvalidArgument& e) {
    std::cerr << name << ": configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << name << ": numeric divergence: " << e.what() << "\n";
    return 4;
  } catch (const ArtifactMismatch& e) {
    std::cerr << name << ": artifact mismatch: " << e.what() << "\n";
    return 5;
  } catch (const ChecksumError& e) {
    std::cerr << name << ": artifact mismatch: " << e.what() << "\n";
    return 5;
  } catch (const VersionError& e) {
    std::cerr << name << ": artifact mismatch: " << e.what() << "\n";
    return 5;
  } catch (const FormatError& e) {
    std::cerr << name << ": malformed file: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << name << ": I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << name << ": I/O error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates and frees the same large buffers every iteration;
  // keeping them on the heap instead of mmap/munmap saves page faults.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  using namespace acgan::cli;
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"gen-data", "Generate the shapes dataset (train and held-out splits)", gen_data},
      {"train-classifier", "Train the surrogate classifier used as a fixed judge", train_classifier_cmd},
      {"train-acgan", "Train (or resume) the AC-GAN", train_acgan_cmd},
      {"eval-diversity", "Intra-class MS-SSIM of generated and real images", eval_diversity},
      {"eval-curve", "Accuracy of the judge against reduced-then-restored resolution", eval_curve},
      {"eval-iscore", "Inception score under the surrogate classifier", eval_iscore},
      {"eval-joint", "Per-class MS-SSIM against generated-sample accuracy", eval_joint},
      {"eval-nn", "Nearest training image (L1) for generated samples", eval_nn},
      {"sweep-classcount", "Diversity of the first classes as the class count grows", sweep_classcount},
      {"interpolate", "Latent interpolation strip for one class", interpolate_cmd},
      {"style-grid", "Fixed latent rows across classes", style_grid_cmd},
      {"run-all", "gen-data, train-classifier, train-acgan and every evaluation",
       [](const Context& ctx) { run_all(ctx); }},
  };

  CLI::App app{"Auxiliary-classifier GAN laboratory"};
  app.require_subcommand(1);
  std::string config_path, out = "out";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Configuration file (section.key = value lines)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed; overrides run.seed");
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.fallthrough();
  for (const auto& [name, help, cmd] : commands) app.add_subcommand(name, help);
  app.add_subcommand("print-config", "Print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "print-config") {
    try {
      auto cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
      if (seed) cfg.seed = *seed;
      cfg.resolve();
      validate(cfg);
      std::cout << to_text(cfg);
      return 0;
    } catch (const acgan::InvalidArgument& e) {
      std::cerr << "print-config: configuration error: " << e.what() << "\n";
      return 2;
    } catch (const acgan::Error& e) {
      std::cerr << "print-config: " << e.what() << "\n";
      return 3;
    }
  }
  for (const auto& [name, help, cmd] : commands)
    if (sub->get_name() == name) return run(name, cmd, config_path, seed, out);
  return 2;
}
