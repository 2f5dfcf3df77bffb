// Configuration parsing in-process; everything else drives the acgan-lab binary.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "acgan/cli/commands.hpp"

namespace fs = std::filesystem;
using namespace acgan;
using namespace acgan::cli;

namespace {

const char* kTinyConfig = R"(# tiny recipe for command tests
run.seed = 3
data.samples_per_class = 16
data.held_out_per_class = 8
classifier.steps = 5
classifier.batch_size = 8
classifier.width_divisor = 8
train.batch_size = 8
train.iterations = 4
train.width_divisor = 16
train.checkpoint_every = 2
train.metrics_every = 2
eval.samples = 32
eval.pairs = 5
eval.real_per_class = 8
eval.curve_subsets = 2
eval.iscore_groups = 2
eval.nn_samples = 2
eval.collapse_samples = 4
eval.collapse_pairs = 3
)";

struct Outcome {
  int code;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

class Lab : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            ("acgan_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = root_ / "tiny.cfg";
    spill(config_, kTinyConfig);
  }
  void TearDown() override { fs::remove_all(root_); }

  // Runs `acgan-lab --config <cfg> --out <out> <args>`.
  Outcome lab(const std::string& args, const fs::path& out, const fs::path& cfg = {}) const {
    const auto err = root_ / "stderr.txt";
    const std::string cmd = std::string(ACGAN_LAB) + " --config " + (cfg.empty() ? config_ : cfg).string() +
                            " --out " + out.string() + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
  }

  fs::path with_extra(const std::string& name, const std::string& extra) const {
    const auto p = root_ / name;
    spill(p, std::string(kTinyConfig) + extra);
    return p;
  }

  fs::path root_, config_;
};

// Minimal PNG reader for the files the tool writes: 8-bit, filter 0, one IDAT.
struct Png {
  std::size_t width = 0, height = 0, channels = 0;
  std::map<std::string, std::string> text;
  std::vector<std::uint8_t> pixels;
};

std::uint32_t be32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(s[at + i]);
  return v;
}

Png read_png(const fs::path& p) {
  const auto bytes = slurp(p);
  Png out;
  std::string idat;
  for (std::size_t at = 8; at + 8 <= bytes.size();) {
    const auto len = be32(bytes, at);
    const auto type = bytes.substr(at + 4, 4), body = bytes.substr(at + 8, len);
    if (type == "IHDR") {
      out.width = be32(body, 0);
      out.height = be32(body, 4);
      out.channels = body[9] == 2 ? 3 : 1;
    } else if (type == "tEXt") {
      const auto nul = body.find('\0');
      out.text[body.substr(0, nul)] = body.substr(nul + 1);
    } else if (type == "IDAT") {
      idat += body;
    }
    at += 12 + len;
  }
  const std::size_t stride = out.width * out.channels;
  std::vector<std::uint8_t> raw(out.height * (stride + 1));
  uLongf raw_size = raw.size();
  EXPECT_EQ(uncompress(raw.data(), &raw_size, reinterpret_cast<const Bytef*>(idat.data()), idat.size()), Z_OK);
  for (std::size_t y = 0; y < out.height; ++y)
    out.pixels.insert(out.pixels.end(), raw.begin() + static_cast<std::ptrdiff_t>(y * (stride + 1) + 1),
                      raw.begin() + static_cast<std::ptrdiff_t>((y + 1) * (stride + 1)));
  return out;
}

// Cell (r, c) of a grid written with the default 2-pixel gutter.
data::Image cell(const Png& png, std::size_t r, std::size_t c, std::size_t res) {
  data::Image img{res, res, png.channels, std::vector<std::uint8_t>(res * res * png.channels)};
  const std::size_t x0 = 2 + c * (res + 2), y0 = 2 + r * (res + 2);
  for (std::size_t y = 0; y < res; ++y)
    for (std::size_t x = 0; x < res; ++x)
      for (std::size_t ch = 0; ch < png.channels; ++ch)
        img.at(x, y, ch) = png.pixels[((y0 + y) * png.width + x0 + x) * png.channels + ch];
  return img;
}

data::Image first_image(const nn::Tensor<float>& t, std::size_t i) {
  const std::size_t per = t.size() / t.dim(0);
  return data::tensor_image(t.data().subspan(i * per, per), t.dim(1), t.dim(2), t.dim(3));
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

// ------------------------------------------------------------- configuration

TEST(Config, UnknownKeyIsRejectedByName) {
  try {
    parse_config("train.iterations = 3\ntrain.iteratons = 4\n", "x.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("train.iteratons"), std::string::npos);
    EXPECT_NE(what.find("x.cfg:2"), std::string::npos);
  }
}

TEST(Config, MalformedValuesAreConfigErrors) {
  EXPECT_THROW(parse_config("train.iterations = many"), ConfigError);
  EXPECT_THROW(parse_config("train.iterations = 3x"), ConfigError);
  EXPECT_THROW(parse_config("classifier.horizontal_flip = maybe"), ConfigError);
  EXPECT_THROW(parse_config("train.g_loss = hinge"), ConfigError);
  EXPECT_THROW(parse_config("data.kinds = circle,blob"), ConfigError);
  EXPECT_THROW(parse_config("no equals sign here"), ConfigError);
}

TEST(Config, TextRoundTripsEveryKey) {
  auto c = parse_config(
      "run.seed = 17\ndata.classes = 3\ndata.kinds = ring,plus,circle\ntrain.g_alpha = 0.00031\n"
      "train.g_loss = minimax\neval.curve_resolutions = 4, 16\nexplore.classes = 2,0\n"
      "classifier.seed = 5  # pinned\n");
  const auto text = to_text(c);
  const auto again = parse_config(text);
  EXPECT_EQ(to_text(again), text);
  EXPECT_EQ(again.train.g_loss, GeneratorLoss::minimax);
  EXPECT_EQ(again.train.g_adam.alpha, 0.00031);
  EXPECT_EQ(again.eval.curve_resolutions, (std::vector<std::size_t>{4, 16}));
  ASSERT_EQ(again.data.kinds.size(), 3u);
  EXPECT_EQ(again.data.kinds[0], data::ShapeKind::ring);
}

TEST(Config, ResolvePinsSeedsAndSharedShape) {
  auto c = parse_config("run.seed = 9\ntrain.seed = 4\ndata.classes = 5\ndata.resolution = 16\n");
  c.resolve();
  EXPECT_EQ(c.data.seed, 9u);
  EXPECT_EQ(c.classifier.seed, 9u);
  EXPECT_EQ(c.train.seed, 4u);
  EXPECT_EQ(c.train.classes, 5u);
  EXPECT_EQ(c.train.resolution, 16u);
  EXPECT_EQ(c.data.kinds.size(), 5u);
  const auto text = to_text(c);
  EXPECT_EQ(text.find("auto"), std::string::npos);
}

TEST(Config, ValidateRejectsInconsistentValues) {
  auto c = parse_config("eval.curve_resolutions = 8, 64\n");
  c.resolve();
  EXPECT_THROW(validate(c), ConfigError);
  c = parse_config("explore.steps = 1\n");
  c.resolve();
  EXPECT_THROW(validate(c), ConfigError);
  c = parse_config("data.classes = 17\n");
  c.resolve();
  EXPECT_THROW(validate(c), ConfigError);
}

// ----------------------------------------------------------------- commands

TEST_F(Lab, UnknownKeyExitsTwoNamingTheKey) {
  const auto r = lab("gen-data", root_ / "out", with_extra("bad.cfg", "train.learning_rate = 0.1\n"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("train.learning_rate"), std::string::npos) << r.err;
}

TEST_F(Lab, UnknownSubcommandOrFlagExitsTwo) {
  EXPECT_EQ(lab("frobnicate", root_ / "out").code, 2);
  EXPECT_EQ(lab("gen-data --no-such-flag", root_ / "out").code, 2);
}

TEST_F(Lab, GenDataIsDeterministicAndChecksummed) {
  ASSERT_EQ(lab("gen-data", root_ / "a").code, 0);
  ASSERT_EQ(lab("gen-data", root_ / "b").code, 0);
  for (const auto* f : {"data/train.acgd", "data/held_out.acgd", "data/preview_seed3.png"})
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  EXPECT_NO_THROW(data::load_dataset(root_ / "a" / "data/train.acgd"));
  EXPECT_EQ(lab("gen-data --seed 4", root_ / "c").code, 0);
  EXPECT_NE(slurp(root_ / "a" / "data/train.acgd"), slurp(root_ / "c" / "data/train.acgd"));
}

TEST_F(Lab, MissingInputsExitThree) {
  EXPECT_EQ(lab("train-classifier", root_ / "out").code, 3);
  EXPECT_EQ(lab("train-acgan", root_ / "out").code, 3);
  EXPECT_EQ(lab("eval-diversity", root_ / "out").code, 3);
  EXPECT_EQ(lab("interpolate", root_ / "out").code, 3);
}

TEST_F(Lab, CorruptOrForeignArtifactsExitFive) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-classifier", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out).code, 0);
  ASSERT_EQ(lab("eval-curve", out).code, 0);

  // A pinned fingerprint that does not match the judge.
  EXPECT_EQ(lab("eval-curve", out, with_extra("pin.cfg", "eval.classifier_crc32 = 00000000\n")).code, 5);

  // The judge's checksum trailer no longer matches its payload.
  auto bytes = slurp(out / "classifier/classifier.acgk");
  bytes[bytes.size() / 2] ^= 0x10;
  spill(out / "classifier/classifier.acgk", bytes);
  EXPECT_EQ(lab("eval-curve", out).code, 5);

  // A checkpoint where a classifier is expected.
  fs::copy_file(out / "acgan/checkpoint.acgk", out / "classifier/classifier.acgk",
                fs::copy_options::overwrite_existing);
  EXPECT_EQ(lab("eval-curve", out).code, 5);
}

TEST_F(Lab, ResumeWithDifferentHyperparametersExitsFive) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out).code, 0);
  EXPECT_EQ(lab("train-acgan", out, with_extra("lr.cfg", "train.g_alpha = 0.001\n")).code, 5);
}

TEST_F(Lab, InvalidClassExitsTwo) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out).code, 0);
  EXPECT_EQ(lab("interpolate", out, with_extra("c.cfg", "explore.class = 4\n")).code, 2);
  EXPECT_EQ(lab("style-grid", out, with_extra("g.cfg", "explore.classes = 1,-1\n")).code, 2);
}

TEST_F(Lab, HeldLockExitsThree) {
  const auto out = root_ / "out";
  fs::create_directories(out);
  {
    OutputLock held(out);
    const auto r = lab("gen-data", out);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("in use"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(out / "data/train.acgd"));
  }
  EXPECT_EQ(lab("gen-data", out).code, 0);
}

TEST_F(Lab, ZeroIterationsWritesOnlyTheInitialCheckpoint) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out, with_extra("zero.cfg", "train.iterations = 0\n")).code, 0);
  const auto s = load_checkpoint<float>(out / "acgan/checkpoint.acgk");
  EXPECT_EQ(s.iteration, 0u);
  auto cfg = load_config(root_ / "zero.cfg");
  cfg.resolve();
  const auto fresh = Checkpoint<float>::initial(cfg.train);
  EXPECT_TRUE(s.generator.params().same_values(fresh.generator.params()));
  EXPECT_TRUE(s.discriminator.params().same_values(fresh.discriminator.params()));
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(out / "acgan")) pngs += e.path().extension() == ".png";
  EXPECT_EQ(pngs, 0u);
  // Only the header of the loss log.
  const auto losses = slurp(out / "acgan/losses.csv");
  EXPECT_EQ(losses.find("\n0,"), std::string::npos);
  EXPECT_EQ(losses.find("\n1,"), std::string::npos);
}

TEST_F(Lab, ResumeEqualsUninterruptedRun) {
  const auto whole = root_ / "whole", split = root_ / "split";
  ASSERT_EQ(lab("gen-data", whole).code, 0);
  ASSERT_EQ(lab("gen-data", split).code, 0);
  ASSERT_EQ(lab("train-acgan", whole).code, 0);
  // Interrupted after the first checkpoint, then resumed with the full budget.
  ASSERT_EQ(lab("train-acgan", split, with_extra("half.cfg", "train.iterations = 2\n")).code, 0);
  ASSERT_EQ(lab("train-acgan", split).code, 0);
  for (const auto* f : {"acgan/checkpoint.acgk", "acgan/losses.csv", "acgan/collapse_points.csv", "acgan/collapse.csv",
                        "acgan/samples_it000004_seed3.png"})
    EXPECT_EQ(slurp(whole / f), slurp(split / f)) << f;
}

TEST_F(Lab, InterpolationEndpointsAreDirectSamples) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out).code, 0);
  ASSERT_EQ(lab("interpolate", out, with_extra("i.cfg", "explore.class = 2\nexplore.steps = 2\n")).code, 0);
  const auto png = read_png(out / "explore/interpolate_c2_it000004_seed3.png");
  EXPECT_EQ(png.text.at("rows"), "1");
  EXPECT_EQ(png.text.at("cols"), "2");
  EXPECT_EQ(png.width, 2 * 32 + 3 * 2);

  auto s = load_checkpoint<float>(out / "acgan/checkpoint.acgk");
  const std::size_t zd = s.generator.spec().z_dim;
  Rng rng = Rng(3).split("explore").split("interpolate");
  std::vector<float> ends(2 * zd);
  rng.fill_normal(std::span<float>(ends));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto direct = sample(s.generator, make_latent<float>(nn::Tensor<float>({1, zd}, {ends.begin() + k * zd,
                                                                                          ends.begin() + (k + 1) * zd}),
                                                               {2}, 4));
    EXPECT_EQ(cell(png, 0, k, 32).pixels, first_image(direct, 0).pixels) << "frame " << k;
  }
}

TEST_F(Lab, StyleGridShapesAndSingleCell) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("gen-data", out).code, 0);
  ASSERT_EQ(lab("train-acgan", out).code, 0);
  ASSERT_EQ(lab("style-grid", out).code, 0);
  auto png = read_png(out / "explore/style_grid_it000004_seed3.png");
  EXPECT_EQ(png.text.at("rows"), "8");
  EXPECT_EQ(png.text.at("cols"), "4");
  EXPECT_EQ(png.width, 4 * 32 + 5 * 2);
  EXPECT_EQ(png.height, 8 * 32 + 9 * 2);

  ASSERT_EQ(lab("style-grid", out, with_extra("one.cfg", "explore.rows = 1\nexplore.classes = 1\n")).code, 0);
  png = read_png(out / "explore/style_grid_it000004_seed3.png");
  EXPECT_EQ(png.text.at("rows"), "1");
  EXPECT_EQ(png.text.at("cols"), "1");
  auto s = load_checkpoint<float>(out / "acgan/checkpoint.acgk");
  const std::size_t zd = s.generator.spec().z_dim;
  Rng rng = Rng(3).split("explore").split("style");
  std::vector<float> z(zd);
  rng.fill_normal(std::span<float>(z));
  const auto direct = sample(s.generator, make_latent<float>(nn::Tensor<float>({1, zd}, std::move(z)), {1}, 4));
  EXPECT_EQ(cell(png, 0, 0, 32).pixels, first_image(direct, 0).pixels);
}

TEST_F(Lab, CommandsDoNotModifyTheirInputs) {
  const auto out = root_ / "out";
  ASSERT_EQ(lab("run-all", out).code, 0);
  std::map<std::string, std::string> before;
  for (const auto* f : {"data/train.acgd", "data/held_out.acgd", "classifier/classifier.acgk", "acgan/checkpoint.acgk"})
    before[f] = slurp(out / f);
  for (const auto* cmd : {"eval-diversity", "eval-curve", "eval-iscore", "eval-joint", "eval-nn", "interpolate",
                          "style-grid"})
    ASSERT_EQ(lab(cmd, out).code, 0) << cmd;
  for (const auto& [f, bytes] : before) EXPECT_EQ(slurp(out / f), bytes) << f;
}

TEST_F(Lab, RunAllTwiceIsByteIdentical) {
  ASSERT_EQ(lab("run-all", root_ / "a").code, 0);
  ASSERT_EQ(lab("run-all", root_ / "b").code, 0);
  const auto files = csv_files(root_ / "a");
  EXPECT_GE(files.size(), 12u);
  EXPECT_EQ(files, csv_files(root_ / "b"));
  for (const auto& f : files) EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
  EXPECT_EQ(slurp(root_ / "a/resolved_config.txt"), slurp(root_ / "b/resolved_config.txt"));
}

TEST_F(Lab, SweepLogsEqualStepCounts) {
  const auto out = root_ / "out";
  const auto cfg = with_extra("sweep.cfg",
                              "data.classes = 8\nsweep.class_counts = 2,4,8\nsweep.restarts = 2\n"
                              "sweep.iterations = 2\nsweep.samples_per_class = 3\neval.samples = 64\n");
  ASSERT_EQ(lab("gen-data", out, cfg).code, 0);
  ASSERT_EQ(lab("sweep-classcount", out, cfg).code, 0);
  std::istringstream csv(slurp(out / "sweep/classcount.csv"));
  std::string line;
  std::size_t rows = 0;
  bool header = true;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      EXPECT_EQ(line, "m,restart,seed,steps,mean_msssim");
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream is(line);
    for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[3], "2");
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
  EXPECT_EQ(lab("sweep-classcount", out, with_extra("big.cfg", "sweep.class_counts = 16\n")).code, 2);
}
