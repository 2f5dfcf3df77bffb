#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "acgan/acgan.hpp"

using namespace acgan;
using nn::Tensor;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "acgan_test_classifier";
  std::filesystem::create_directories(dir);
  return dir / name;
}

data::LabeledImageDataset shapes(std::size_t per_class, data::SplitTag split, std::size_t classes = 4) {
  data::ShapesConfig c;
  c.classes = classes;
  c.resolution = 8;
  c.samples_per_class = per_class;
  c.split = split;
  return data::generate_shapes(c);
}

ClassifierConfig small_config(std::size_t steps) {
  ClassifierConfig c;
  c.steps = steps;
  c.batch_size = 16;
  c.width_divisor = 8;
  return c;
}

Tensor<float> all_images(const data::LabeledImageDataset& ds) {
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return data::images_to_tensor<float>(ds, idx);
}

}  // namespace

TEST(Argmax, TiesGoToLowestIndex) {
  const std::vector<double> a = {0.2, 0.4, 0.4}, b = {0.5, 0.5}, c = {0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(argmax(std::span<const double>(a)), 1u);
  EXPECT_EQ(argmax(std::span<const double>(b)), 0u);
  EXPECT_EQ(argmax(std::span<const double>(c)), 3u);
}

TEST(Accuracy, HandComputedReport) {
  const Tensor<double> dist({4, 3}, {0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.4, 0.4, 0.2, 0.2, 0.3, 0.5});
  const std::vector<int> labels = {0, 0, 1, 2};
  const auto r = accuracy_from_dist(dist, labels);
  EXPECT_DOUBLE_EQ(r.overall, 0.5);
  EXPECT_EQ(r.counts, (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(r.correct, (std::vector<std::size_t>{1, 0, 1}));  // the tie in row 2 resolves to class 0
  EXPECT_EQ(r.per_class, (std::vector<double>{0.5, 0.0, 1.0}));
  EXPECT_EQ(r.total(), 4u);
  EXPECT_THROW(accuracy_from_dist(dist, std::vector<int>{0, 1}), InvalidArgument);
  EXPECT_THROW(accuracy_from_dist(dist, std::vector<int>{0, 1, 3, 0}), InvalidArgument);
}

TEST(Accuracy, EmptyClassReportsZero) {
  const Tensor<double> dist({2, 3}, {1, 0, 0, 1, 0, 0});
  const auto r = accuracy_from_dist(dist, std::vector<int>{0, 0});
  EXPECT_EQ(r.counts[1], 0u);
  EXPECT_EQ(r.per_class[1], 0.0);
  EXPECT_EQ(r.overall, 1.0);
}

TEST(Classifier, UntrainedIsAtChance) {
  const auto held = shapes(100, data::SplitTag::held_out);
  auto model = initial_classifier<float>(shapes(4, data::SplitTag::train), small_config(0));
  const auto r = top1_accuracy(model, held);
  const double sigma = std::sqrt(0.25 * 0.75 / 400.0);
  EXPECT_NEAR(r.overall, 0.25, 3 * sigma);
  EXPECT_EQ(model.steps_trained, 0u);
}

TEST(Classifier, PredictDistIsBatchIndependent) {
  const auto ds = shapes(5, data::SplitTag::held_out);
  auto model = train_classifier<float>(shapes(10, data::SplitTag::train), ds, small_config(5)).model;
  const auto images = all_images(ds);
  const auto whole = predict_dist(model, images);
  const auto ones = predict_dist(model, images, 1);
  const auto sevens = predict_dist(model, images, 7);
  EXPECT_EQ(whole.shape(), (nn::Shape{20, 4}));
  // Matrix-product blocking depends on the batch size, so chunking may move a
  // probability by an ulp or two.
  for (std::size_t i = 0; i < 80; ++i) {
    EXPECT_NEAR(whole.data()[i], ones.data()[i], 1e-6f) << i;
    EXPECT_NEAR(whole.data()[i], sevens.data()[i], 1e-6f) << i;
  }
  EXPECT_EQ(predict_dist(model, images).values(), whole.values());
  for (std::size_t i = 0; i < 20; ++i) {
    float s = 0;
    for (std::size_t k = 0; k < 4; ++k) s += whole.data()[i * 4 + k];
    EXPECT_NEAR(s, 1.0f, 1e-5f);
  }
}

TEST(Classifier, PredictDistValidatesInput) {
  const auto ds = shapes(2, data::SplitTag::train);
  auto model = initial_classifier<float>(ds, small_config(0));
  auto v = all_images(ds).values();
  v[3] = 1.5f;
  EXPECT_THROW(predict_dist(model, Tensor<float>({8, 3, 8, 8}, v)), InvalidArgument);
  EXPECT_THROW(predict_dist(model, Tensor<float>::zeros({2, 3, 16, 16})), InvalidArgument);
  EXPECT_THROW(predict_dist(model, Tensor<float>::zeros({2, 1, 8, 8})), InvalidArgument);
  EXPECT_THROW(top1_accuracy(model, all_images(ds), std::vector<int>{0}), InvalidArgument);
}

TEST(Classifier, ShortTrainingBeatsChance) {
  const auto held = shapes(50, data::SplitTag::held_out);
  const auto r = train_classifier<float>(shapes(100, data::SplitTag::train), held, small_config(150));
  EXPECT_EQ(r.model.steps_trained, 150u);
  EXPECT_EQ(r.held_out.total(), 200u);
  EXPECT_GT(r.held_out.overall, 0.6);
}

TEST(Classifier, DeterministicPerSeed) {
  const auto train = shapes(10, data::SplitTag::train), held = shapes(5, data::SplitTag::held_out);
  auto cfg = small_config(6);
  cfg.horizontal_flip = true;
  const auto a = train_classifier<float>(train, held, cfg);
  const auto b = train_classifier<float>(train, held, cfg);
  EXPECT_EQ(classifier_fingerprint(a.model), classifier_fingerprint(b.model));
  cfg.seed = 2;
  const auto c = train_classifier<float>(train, held, cfg);
  EXPECT_NE(classifier_fingerprint(a.model), classifier_fingerprint(c.model));
}

TEST(Classifier, SaveLoadRoundTrip) {
  const auto train = shapes(10, data::SplitTag::train), held = shapes(5, data::SplitTag::held_out);
  auto cfg = small_config(4);
  cfg.dropout = 0.25;
  auto model = train_classifier<float>(train, held, cfg).model;
  const auto path = temp_path("model.acgk");
  save_classifier(model, path);
  auto back = load_classifier<float>(path);
  EXPECT_EQ(back.steps_trained, 4u);
  EXPECT_EQ(back.config.dropout, 0.25);
  EXPECT_EQ(back.config.width_divisor, 8u);
  EXPECT_EQ(back.classes(), 4u);
  EXPECT_EQ(classifier_fingerprint(back), classifier_fingerprint(model));
  const auto images = all_images(held);
  EXPECT_EQ(predict_dist(back, images).values(), predict_dist(model, images).values());
}

TEST(Classifier, WrongArtifactRejected) {
  TrainConfig tc;
  tc.width_divisor = 16;
  const auto path = temp_path("acgan.acgk");
  save_checkpoint(Checkpoint<float>::initial(tc), path);
  EXPECT_THROW(load_classifier<float>(path), ArtifactMismatch);
  const auto model = initial_classifier<float>(shapes(2, data::SplitTag::train), small_config(0));
  auto c = to_container(model);
  c.tag = kAcganTag;
  EXPECT_THROW(classifier_from_container<float>(c), ArtifactMismatch);
  auto flipped = ckpt::encode(to_container(model));
  flipped[flipped.size() - 9] ^= 0x10;
  EXPECT_THROW(classifier_from_container<float>(ckpt::decode(flipped)), ChecksumError);
}

TEST(Classifier, InvalidInputs) {
  const auto one = shapes(5, data::SplitTag::train, 1);
  EXPECT_THROW(train_classifier<float>(one, one, small_config(1)), InvalidArgument);
  const auto train = shapes(5, data::SplitTag::train), held3 = shapes(5, data::SplitTag::held_out, 3);
  EXPECT_THROW(train_classifier<float>(train, held3, small_config(1)), InvalidArgument);
  auto cfg = small_config(1);
  cfg.batch_size = 1;
  EXPECT_THROW(train_classifier<float>(train, train, cfg), InvalidArgument);
}

TEST(Classifier, FingerprintIsStoredChecksum) {
  const auto model = initial_classifier<float>(shapes(2, data::SplitTag::train), small_config(0));
  const auto bytes = ckpt::encode(to_container(model));
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(classifier_fingerprint(model), stored);
  auto other = small_config(0);
  other.seed = 9;
  EXPECT_NE(classifier_fingerprint(initial_classifier<float>(shapes(2, data::SplitTag::train), other)), stored);
}
