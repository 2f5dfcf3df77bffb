#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acgan/core/binary_io.hpp"
#include "acgan/core/rng.hpp"
#include "acgan/nn/tensor.hpp"

namespace acgan::data {

enum class SplitTag : std::uint8_t { train = 0, held_out = 1 };

inline const char* split_name(SplitTag s) { return s == SplitTag::train ? "train" : "held_out"; }

/// Labeled 8-bit images stored NCHW.
struct LabeledImageDataset {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::string> class_names;
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint16_t> labels;
  SplitTag split = SplitTag::train;

  std::size_t size() const { return labels.size(); }
  std::size_t classes() const { return class_names.size(); }
  std::size_t image_size() const { return channels * height * width; }

  std::span<const std::uint8_t> image(std::size_t i) const {
    return std::span<const std::uint8_t>(pixels).subspan(i * image_size(), image_size());
  }

  void validate() const {
    detail::require(size() > 0, "dataset: no images");
    detail::require(height > 0 && width > 0 && (channels == 1 || channels == 3),
                    "dataset: images must be non-empty with 1 or 3 channels");
    detail::require(!class_names.empty(), "dataset: no classes");
    detail::require(pixels.size() == size() * image_size(), "dataset: pixel buffer does not match N x C x H x W");
    for (auto l : labels)
      detail::require(l < classes(), "dataset: label " + std::to_string(l) + " out of range for " +
                                         std::to_string(classes()) + " classes");
  }

  std::vector<std::size_t> indices_of(std::size_t label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (labels[i] == label) out.push_back(i);
    return out;
  }

  /// Images whose label is in `keep`, relabelled to their position in `keep`.
  LabeledImageDataset restrict_classes(std::span<const std::size_t> keep) const {
    LabeledImageDataset out;
    out.height = height;
    out.width = width;
    out.channels = channels;
    out.split = split;
    std::vector<int> remap(classes(), -1);
    for (std::size_t j = 0; j < keep.size(); ++j) {
      detail::require(keep[j] < classes() && remap[keep[j]] < 0, "restrict_classes: invalid or repeated class");
      remap[keep[j]] = static_cast<int>(j);
      out.class_names.push_back(class_names[keep[j]]);
    }
    for (std::size_t i = 0; i < size(); ++i) {
      if (remap[labels[i]] < 0) continue;
      const auto img = image(i);
      out.pixels.insert(out.pixels.end(), img.begin(), img.end());
      out.labels.push_back(static_cast<std::uint16_t>(remap[labels[i]]));
    }
    return out;
  }

  friend bool operator==(const LabeledImageDataset&, const LabeledImageDataset&) = default;
};

/// u8 -> (-1, 1): x / 127.5 - 1.
template <class T = float>
constexpr T pixel_to_unit(std::uint8_t v) {
  return static_cast<T>(static_cast<double>(v) / 127.5 - 1.0);
}

/// Inverse of pixel_to_unit, rounded and clamped to [0, 255].
template <class T>
std::uint8_t unit_to_pixel(T v) {
  const double p = std::round((static_cast<double>(v) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(p, 0.0, 255.0));
}

template <class T = float>
nn::Tensor<T> images_to_tensor(const LabeledImageDataset& ds, std::span<const std::size_t> indices) {
  const std::size_t per = ds.image_size();
  std::vector<T> v(indices.size() * per);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto img = ds.image(indices[b]);
    for (std::size_t k = 0; k < per; ++k) v[b * per + k] = pixel_to_unit<T>(img[k]);
  }
  return nn::Tensor<T>({indices.size(), ds.channels, ds.height, ds.width}, std::move(v));
}

// ----------------------------------------------------------------- container
//
// "ACGD" layout, little-endian:
//   magic "ACGD" | u16 version | u32 N | u16 H | u16 W | u16 C | u16 K
//   N*C*H*W u8 pixels | N u16 labels
//   u8 split tag | K x (u16 length, UTF-8 class name)
//   u32 CRC32 of everything before it

inline constexpr std::uint16_t kDatasetVersion = 1;

inline std::vector<std::uint8_t> encode_dataset(const LabeledImageDataset& ds) {
  ds.validate();
  detail::require(ds.size() <= 0xffffffffu && ds.height <= 0xffff && ds.width <= 0xffff && ds.classes() <= 0xffff,
                  "dataset: dimensions exceed container limits");
  io::Writer w;
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("ACGD"), 4));
  w.put(kDatasetVersion);
  w.put(static_cast<std::uint32_t>(ds.size()));
  w.put(static_cast<std::uint16_t>(ds.height));
  w.put(static_cast<std::uint16_t>(ds.width));
  w.put(static_cast<std::uint16_t>(ds.channels));
  w.put(static_cast<std::uint16_t>(ds.classes()));
  w.put_array(std::span<const std::uint8_t>(ds.pixels));
  w.put_array(std::span<const std::uint16_t>(ds.labels));
  w.put(static_cast<std::uint8_t>(ds.split));
  for (const auto& name : ds.class_names) w.put_string16(name);
  w.put_crc();
  return w.take();
}

inline LabeledImageDataset decode_dataset(std::span<const std::uint8_t> file) {
  if (file.size() < 6 || std::memcmp(file.data(), "ACGD", 4) != 0) throw FormatError("not an ACGD dataset: bad magic");
  std::uint16_t version;
  std::memcpy(&version, file.data() + 4, 2);
  if (version != kDatasetVersion)
    throw VersionError("unsupported ACGD version " + std::to_string(version) + " (supported: " +
                       std::to_string(kDatasetVersion) + ")");
  io::Reader r(io::verify_crc(file));
  r.get_bytes(6);
  LabeledImageDataset ds;
  const auto n = r.get<std::uint32_t>();
  ds.height = r.get<std::uint16_t>();
  ds.width = r.get<std::uint16_t>();
  ds.channels = r.get<std::uint16_t>();
  const auto k = r.get<std::uint16_t>();
  const std::size_t pixel_bytes = std::size_t{n} * ds.channels * ds.height * ds.width;
  if (pixel_bytes + std::size_t{n} * 2 > r.remaining())
    throw FormatError("ACGD header claims " + std::to_string(n) + " images but the file is too short");
  ds.pixels.resize(pixel_bytes);
  r.get_array(std::span<std::uint8_t>(ds.pixels));
  ds.labels.resize(n);
  r.get_array(std::span<std::uint16_t>(ds.labels));
  const auto tag = r.get<std::uint8_t>();
  if (tag > 1) throw FormatError("ACGD: unknown split tag " + std::to_string(tag));
  ds.split = static_cast<SplitTag>(tag);
  for (std::size_t i = 0; i < k; ++i) ds.class_names.push_back(r.get_string16());
  if (r.remaining() != 0) throw FormatError("ACGD: " + std::to_string(r.remaining()) + " unexpected trailing bytes");
  try {
    ds.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("ACGD: inconsistent contents: ") + e.what());
  }
  return ds;
}

inline void save_dataset(const LabeledImageDataset& ds, const std::filesystem::path& path) {
  io::write_file(path, encode_dataset(ds));
}

inline LabeledImageDataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

// ---------------------------------------------------------------- class split

struct ClassSplit {
  std::vector<std::vector<std::size_t>> groups;
  std::size_t group_size = 0;
  std::vector<std::size_t> ordering;
};

/// Cuts `ordering` (a permutation of [0, K)) into contiguous groups of
/// `group_size`; the last group holds the remainder.
inline ClassSplit partition_classes(std::size_t k, std::size_t group_size, std::span<const std::size_t> ordering) {
  detail::require(k >= 1 && group_size >= 1, "partition_classes: K and group size must be >= 1");
  detail::require(ordering.size() == k, "partition_classes: ordering must list all " + std::to_string(k) + " classes");
  std::vector<bool> seen(k, false);
  for (auto c : ordering) {
    detail::require(c < k && !seen[c], "partition_classes: ordering is not a permutation of [0, K)");
    seen[c] = true;
  }
  ClassSplit split;
  split.group_size = group_size;
  split.ordering.assign(ordering.begin(), ordering.end());
  for (std::size_t start = 0; start < k; start += group_size)
    split.groups.emplace_back(ordering.begin() + static_cast<std::ptrdiff_t>(start),
                              ordering.begin() + static_cast<std::ptrdiff_t>(std::min(k, start + group_size)));
  return split;
}

inline ClassSplit partition_classes(std::size_t k, std::size_t group_size) {
  std::vector<std::size_t> identity(k);
  for (std::size_t i = 0; i < k; ++i) identity[i] = i;
  return partition_classes(k, group_size, identity);
}

// ------------------------------------------------------------------ batching

template <class T = float>
struct Batch {
  nn::Tensor<T> images;  // [B, C, H, W] in [-1, 1)
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

/// Deterministic minibatch stream. Epoch e visits a uniform permutation drawn
/// from rng.split(e); the incomplete trailing batch of each epoch is dropped.
/// Batches are addressable by global index, so a resumed run replays exactly.
template <class T = float>
class MinibatchStream {
 public:
  MinibatchStream(const LabeledImageDataset& ds, std::size_t batch_size, Rng rng,
                  std::optional<std::size_t> epochs = std::nullopt)
      : ds_(&ds), batch_size_(batch_size), rng_(rng), epochs_(epochs) {
    detail::require(batch_size >= 1 && batch_size <= ds.size(), "minibatches: batch size " +
                                                                    std::to_string(batch_size) +
                                                                    " must be in [1, N=" + std::to_string(ds.size()) +
                                                                    "]");
  }

  std::size_t batches_per_epoch() const { return ds_->size() / batch_size_; }

  /// Total batch count, or nullopt for an unbounded stream.
  std::optional<std::size_t> total() const {
    if (!epochs_) return std::nullopt;
    return *epochs_ * batches_per_epoch();
  }

  Batch<T> at(std::size_t index) {
    detail::require(!total() || index < *total(), "minibatches: batch index past the last epoch");
    const std::size_t epoch = index / batches_per_epoch(), pos = index % batches_per_epoch();
    if (epoch != cached_epoch_) {
      perm_.resize(ds_->size());
      for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
      Rng r = rng_.split(epoch);
      shuffle(std::span<std::size_t>(perm_), r);
      cached_epoch_ = epoch;
    }
    Batch<T> b;
    b.indices.assign(perm_.begin() + static_cast<std::ptrdiff_t>(pos * batch_size_),
                     perm_.begin() + static_cast<std::ptrdiff_t>((pos + 1) * batch_size_));
    b.images = images_to_tensor<T>(*ds_, b.indices);
    for (auto i : b.indices) b.labels.push_back(ds_->labels[i]);
    return b;
  }

  /// Sequential access; nullopt once a bounded stream is exhausted.
  std::optional<Batch<T>> next() {
    if (total() && next_ >= *total()) return std::nullopt;
    return at(next_++);
  }

 private:
  const LabeledImageDataset* ds_;
  std::size_t batch_size_;
  Rng rng_;
  std::optional<std::size_t> epochs_;
  std::size_t next_ = 0;
  std::size_t cached_epoch_ = static_cast<std::size_t>(-1);
  std::vector<std::size_t> perm_;
};

}  // namespace acgan::data
