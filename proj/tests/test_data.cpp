#include <gtest/gtest.h>

#include <zlib.h>

#include <cstring>
#include <filesystem>
#include <map>
#include <set>

#include "acgan/core/meta.hpp"
#include "acgan/data/dataset.hpp"
#include "acgan/data/png.hpp"
#include "acgan/data/shapes.hpp"

using namespace acgan;
using namespace acgan::data;

namespace {

ShapesConfig small_config(std::size_t classes = 4, std::size_t per_class = 20) {
  ShapesConfig c;
  c.classes = classes;
  c.samples_per_class = per_class;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "acgan_test_data";
  std::filesystem::create_directories(dir);
  return dir / name;
}

double image_mean(const LabeledImageDataset& ds, std::size_t i) {
  double s = 0;
  for (auto v : ds.image(i)) s += v;
  return s / static_cast<double>(ds.image_size());
}

struct Chunk {
  std::string type;
  std::vector<std::uint8_t> data;
};

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

/// Minimal PNG chunk walker with CRC verification.
std::vector<Chunk> png_chunks(const std::vector<std::uint8_t>& f) {
  const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  EXPECT_EQ(std::memcmp(f.data(), sig, 8), 0);
  std::vector<Chunk> out;
  std::size_t at = 8;
  while (at < f.size()) {
    const auto len = be32(&f[at]);
    Chunk c{std::string(f.begin() + at + 4, f.begin() + at + 8),
            std::vector<std::uint8_t>(f.begin() + at + 8, f.begin() + at + 8 + len)};
    const auto crc = ::crc32(::crc32(0, nullptr, 0), &f[at + 4], len + 4);
    EXPECT_EQ(crc, be32(&f[at + 8 + len])) << c.type;
    out.push_back(std::move(c));
    at += 12 + len;
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ shapes

TEST(Shapes, ClassMajorLayoutAndNames) {
  const auto ds = generate_shapes(small_config(3, 5));
  ds.validate();
  EXPECT_EQ(ds.size(), 15u);
  EXPECT_EQ(ds.classes(), 3u);
  EXPECT_EQ(ds.height, 32u);
  EXPECT_EQ(ds.channels, 3u);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(ds.labels[i], i / 5);
  EXPECT_EQ(ds.class_names[0], shape_name(ShapeKind(0)));
  EXPECT_EQ(ds.indices_of(1), (std::vector<std::size_t>{5, 6, 7, 8, 9}));
}

TEST(Shapes, SameSeedSameBytes) {
  EXPECT_EQ(generate_shapes(small_config()), generate_shapes(small_config()));
  auto other = small_config();
  other.seed = 2;
  EXPECT_NE(generate_shapes(small_config()).pixels, generate_shapes(other).pixels);
}

TEST(Shapes, SplitsDiffer) {
  auto held = small_config();
  held.split = SplitTag::held_out;
  const auto a = generate_shapes(small_config()), b = generate_shapes(held);
  EXPECT_NE(a.pixels, b.pixels);
  EXPECT_EQ(b.split, SplitTag::held_out);
}

TEST(Shapes, PrefixStableWhenGrowingSampleCount) {
  // Every image has its own stream, so adding samples leaves earlier ones intact.
  const auto a = generate_shapes(small_config(2, 5)), b = generate_shapes(small_config(2, 9));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 5; ++i) {
      const auto x = a.image(c * 5 + i), y = b.image(c * 9 + i);
      EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
    }
}

TEST(Shapes, ZeroJitterGivesIdenticalImagesPerClass) {
  auto c = small_config(4, 6);
  c.jitter = ShapeJitter::none();
  const auto ds = generate_shapes(c);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto first = ds.image(k * 6);
    for (std::size_t i = 1; i < 6; ++i) {
      const auto img = ds.image(k * 6 + i);
      EXPECT_TRUE(std::equal(first.begin(), first.end(), img.begin()));
    }
  }
  EXPECT_FALSE(std::equal(ds.image(0).begin(), ds.image(0).end(), ds.image(6).begin()));
}

TEST(Shapes, ShapeOccupiesCentreNotCorners) {
  auto c = small_config(16, 1);
  c.jitter = ShapeJitter::none();
  const auto ds = generate_shapes(c);
  for (std::size_t k = 0; k < 16; ++k) {
    const auto img = ds.image(k);
    // Corner pixel is background on every channel.
    for (std::size_t ch = 0; ch < 3; ++ch) EXPECT_EQ(img[ch * 1024], 35) << shape_name(ShapeKind(k));
    EXPECT_NE(image_mean(ds, k), 35.0) << shape_name(ShapeKind(k));
  }
}

TEST(Shapes, ContainsIsScaleNormalized) {
  for (std::size_t k = 0; k < kShapeKindCount; ++k) {
    const auto kind = ShapeKind(k);
    EXPECT_FALSE(shape_contains(kind, 1.01, 0.0)) << shape_name(kind);
    EXPECT_FALSE(shape_contains(kind, 0.0, -1.01)) << shape_name(kind);
    EXPECT_FALSE(shape_contains(kind, 0.95, 0.95)) << shape_name(kind);
  }
}

TEST(Shapes, GrayscaleAndCustomKinds) {
  auto c = small_config(2, 3);
  c.channels = 1;
  c.kinds = {ShapeKind(5), ShapeKind(1)};
  const auto ds = generate_shapes(c);
  EXPECT_EQ(ds.image_size(), 1024u);
  EXPECT_EQ(ds.class_names[0], shape_name(ShapeKind(5)));
}

TEST(Shapes, InvalidConfigs) {
  auto c = small_config();
  c.classes = 17;
  EXPECT_THROW(generate_shapes(c), InvalidArgument);
  c = small_config();
  c.base_radius = 0.45;
  EXPECT_THROW(generate_shapes(c), InvalidArgument);
  c = small_config();
  c.kinds = {ShapeKind(0)};
  EXPECT_THROW(generate_shapes(c), InvalidArgument);
  c = small_config();
  c.channels = 2;
  EXPECT_THROW(generate_shapes(c), InvalidArgument);
  c = small_config();
  c.jitter.position = -0.1;
  EXPECT_THROW(generate_shapes(c), InvalidArgument);
}

// ------------------------------------------------------------------ pixels

TEST(Pixels, UnitRoundTrip) {
  for (int v = 0; v < 256; ++v) {
    const auto u = pixel_to_unit<float>(std::uint8_t(v));
    EXPECT_GE(u, -1.0f);
    EXPECT_LE(u, 1.0f);
    EXPECT_EQ(unit_to_pixel(u), v);
  }
  EXPECT_EQ(unit_to_pixel(5.0), 255);
  EXPECT_EQ(unit_to_pixel(-5.0), 0);
}

TEST(Pixels, TensorLayout) {
  const auto ds = generate_shapes(small_config(2, 2));
  const std::vector<std::size_t> pick = {3, 0};
  const auto t = images_to_tensor<double>(ds, pick);
  EXPECT_EQ(t.shape(), (nn::Shape{2, 3, 32, 32}));
  EXPECT_DOUBLE_EQ(t.data()[0], pixel_to_unit<double>(ds.image(3)[0]));
  EXPECT_DOUBLE_EQ(t.data()[3072 + 100], pixel_to_unit<double>(ds.image(0)[100]));
}

// --------------------------------------------------------------- container

TEST(DatasetFile, RoundTrip) {
  auto ds = generate_shapes(small_config(3, 4));
  ds.split = SplitTag::held_out;
  const auto path = temp_path("round.acgd");
  save_dataset(ds, path);
  EXPECT_EQ(load_dataset(path), ds);
  EXPECT_EQ(io::read_file(path), encode_dataset(ds));
}

TEST(DatasetFile, HeaderLayout) {
  const auto ds = generate_shapes(small_config(2, 3));
  const auto bytes = encode_dataset(ds);
  EXPECT_EQ(std::memcmp(bytes.data(), "ACGD", 4), 0);
  std::uint16_t version;
  std::uint32_t n;
  std::memcpy(&version, &bytes[4], 2);
  std::memcpy(&n, &bytes[6], 4);
  EXPECT_EQ(version, 1);
  EXPECT_EQ(n, 6u);
  // CRC32 of everything before the trailing four bytes.
  std::uint32_t stored;
  std::memcpy(&stored, &bytes[bytes.size() - 4], 4);
  EXPECT_EQ(stored, ::crc32(::crc32(0, nullptr, 0), bytes.data(), static_cast<uInt>(bytes.size() - 4)));
}

TEST(DatasetFile, CorruptionDetected) {
  const auto bytes = encode_dataset(generate_shapes(small_config(2, 3)));
  auto flipped = bytes;
  flipped[100] ^= 0x10;
  EXPECT_THROW(decode_dataset(flipped), ChecksumError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_dataset(magic), FormatError);
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(decode_dataset(version), VersionError);
  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_THROW(decode_dataset(truncated), FormatError);
  EXPECT_THROW(load_dataset(temp_path("does_not_exist.acgd")), IoError);
}

TEST(DatasetFile, ValidationRejectsBadLabels) {
  auto ds = generate_shapes(small_config(2, 3));
  ds.labels[0] = 7;
  EXPECT_THROW(encode_dataset(ds), InvalidArgument);
}

TEST(Dataset, RestrictClassesRelabels) {
  const auto ds = generate_shapes(small_config(4, 3));
  const std::vector<std::size_t> keep = {3, 1};
  const auto sub = ds.restrict_classes(keep);
  EXPECT_EQ(sub.size(), 6u);
  EXPECT_EQ(sub.class_names, (std::vector<std::string>{ds.class_names[3], ds.class_names[1]}));
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const std::size_t orig_label = keep[sub.labels[i]];
    bool found = false;
    for (auto j : ds.indices_of(orig_label))
      found |= std::equal(sub.image(i).begin(), sub.image(i).end(), ds.image(j).begin());
    EXPECT_TRUE(found);
  }
}

// ---------------------------------------------------------------- splitting

TEST(ClassSplit, ContiguousGroupsWithRemainder) {
  const auto s = partition_classes(10, 4);
  EXPECT_EQ(s.groups, (std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9}}));
  const std::vector<std::size_t> order = {3, 0, 2, 1};
  const auto t = partition_classes(4, 2, order);
  EXPECT_EQ(t.groups, (std::vector<std::vector<std::size_t>>{{3, 0}, {2, 1}}));
}

TEST(ClassSplit, EveryClassExactlyOnce) {
  for (std::size_t k : {1u, 5u, 16u})
    for (std::size_t g : {1u, 3u, 16u}) {
      const auto s = partition_classes(k, g);
      std::multiset<std::size_t> all;
      for (const auto& grp : s.groups) {
        EXPECT_LE(grp.size(), g);
        all.insert(grp.begin(), grp.end());
      }
      EXPECT_EQ(all.size(), k);
      EXPECT_EQ(std::set<std::size_t>(all.begin(), all.end()).size(), k);
    }
}

TEST(ClassSplit, Errors) {
  const std::vector<std::size_t> dup = {0, 0, 1};
  EXPECT_THROW(partition_classes(3, 1, dup), InvalidArgument);
  EXPECT_THROW(partition_classes(3, 0), InvalidArgument);
  const std::vector<std::size_t> short_order = {0, 1};
  EXPECT_THROW(partition_classes(3, 1, short_order), InvalidArgument);
}

// ----------------------------------------------------------------- batching

TEST(Minibatch, EpochIsAPermutationAndTrailingBatchDropped) {
  const auto ds = generate_shapes(small_config(2, 11));  // N = 22
  MinibatchStream<float> s(ds, 5, Rng(1), 2);
  EXPECT_EQ(s.batches_per_epoch(), 4u);
  EXPECT_EQ(s.total(), 8u);
  std::set<std::size_t> seen;
  for (std::size_t b = 0; b < 4; ++b) {
    const auto batch = s.at(b);
    EXPECT_EQ(batch.images.shape(), (nn::Shape{5, 3, 32, 32}));
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(batch.labels[j], ds.labels[batch.indices[j]]);
      EXPECT_TRUE(seen.insert(batch.indices[j]).second);
    }
  }
  EXPECT_EQ(seen.size(), 20u);
}

TEST(Minibatch, RandomAccessEqualsSequential) {
  const auto ds = generate_shapes(small_config(2, 10));
  MinibatchStream<float> a(ds, 4, Rng(3), 3), b(ds, 4, Rng(3), 3);
  std::vector<std::vector<std::size_t>> seq;
  while (auto batch = a.next()) seq.push_back(batch->indices);
  EXPECT_EQ(seq.size(), 15u);
  for (std::size_t i : {14u, 0u, 7u, 5u, 14u}) EXPECT_EQ(b.at(i).indices, seq[i]);
  EXPECT_THROW(b.at(15), InvalidArgument);
}

TEST(Minibatch, EpochsUseDifferentOrders) {
  const auto ds = generate_shapes(small_config(2, 10));
  MinibatchStream<float> s(ds, 20, Rng(3));
  EXPECT_FALSE(s.total());
  EXPECT_NE(s.at(0).indices, s.at(1).indices);
}

TEST(Minibatch, UniformVisitFrequency) {
  const auto ds = generate_shapes(small_config(1, 10));
  MinibatchStream<float> s(ds, 1, Rng(5));
  std::vector<int> first(10, 0);
  for (std::size_t e = 0; e < 4000; ++e) first[s.at(e * 10).indices[0]]++;
  for (int c : first) EXPECT_NEAR(c / 4000.0, 0.1, 0.02);
}

TEST(Minibatch, Errors) {
  const auto ds = generate_shapes(small_config(1, 3));
  EXPECT_THROW(MinibatchStream<float>(ds, 4, Rng(1)), InvalidArgument);
  EXPECT_THROW(MinibatchStream<float>(ds, 0, Rng(1)), InvalidArgument);
}

// --------------------------------------------------------------------- PNG

TEST(Png, ChunksAndPixelsRoundTrip) {
  Image img{5, 3, 3, {}};
  for (std::size_t i = 0; i < 45; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 5));
  const auto bytes = encode_png(img, {{"rows", "1"}, {"cols", "5"}});
  const auto chunks = png_chunks(bytes);
  ASSERT_EQ(chunks.size(), 5u);
  EXPECT_EQ(chunks[0].type, "IHDR");
  EXPECT_EQ(be32(chunks[0].data.data()), 5u);
  EXPECT_EQ(be32(chunks[0].data.data() + 4), 3u);
  EXPECT_EQ(chunks[0].data[9], 2);  // truecolour
  std::map<std::string, std::string> text;
  for (const auto& c : chunks)
    if (c.type == "tEXt") {
      const auto nul = std::find(c.data.begin(), c.data.end(), 0);
      text[std::string(c.data.begin(), nul)] = std::string(nul + 1, c.data.end());
    }
  EXPECT_EQ(text["rows"], "1");
  EXPECT_EQ(text["cols"], "5");
  EXPECT_EQ(chunks[3].type, "IDAT");
  EXPECT_EQ(chunks[4].type, "IEND");
  std::vector<std::uint8_t> raw(3 * 16);
  uLongf raw_size = raw.size();
  ASSERT_EQ(uncompress(raw.data(), &raw_size, chunks[3].data.data(), chunks[3].data.size()), Z_OK);
  ASSERT_EQ(raw_size, 48u);
  for (std::size_t y = 0; y < 3; ++y) {
    EXPECT_EQ(raw[y * 16], 0);
    for (std::size_t x = 0; x < 15; ++x) EXPECT_EQ(raw[y * 16 + 1 + x], img.pixels[y * 15 + x]);
  }
}

TEST(Png, TensorImageAndGrid) {
  const std::vector<float> chw = {-1.f, 1.f, 0.f, 0.f, -1.f, 1.f};  // 3 channels, 1x2
  const auto img = tensor_image<float>(chw, 3, 1, 2);
  EXPECT_EQ(img.at(0, 0, 0), 0);
  EXPECT_EQ(img.at(1, 0, 0), 255);
  EXPECT_EQ(img.at(0, 0, 1), 128);
  EXPECT_EQ(img.at(1, 0, 2), 255);
  const std::vector<Image> cells(6, img);
  const auto grid = tile_grid(cells, 2, 3, 1);
  EXPECT_EQ(grid.width, 3 * 2 + 4u);
  EXPECT_EQ(grid.height, 2 * 1 + 3u);
  EXPECT_EQ(grid.at(0, 0, 0), 0);           // gutter
  EXPECT_EQ(grid.at(2, 1, 0), 255);         // first cell, x = 1
  EXPECT_EQ(grid.at(8, 3, 2), 255);         // last cell, x = 1
  EXPECT_THROW(tile_grid(cells, 2, 2), InvalidArgument);
}

TEST(Png, RejectsMalformedImages) {
  Image bad{2, 2, 3, std::vector<std::uint8_t>(5)};
  EXPECT_THROW(encode_png(bad), InvalidArgument);
  Image two{1, 1, 2, std::vector<std::uint8_t>(2)};
  EXPECT_THROW(encode_png(two), InvalidArgument);
}
