#pragma once

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "acgan/core/binary_io.hpp"
#include "acgan/core/meta.hpp"
#include "acgan/core/rng.hpp"
#include "acgan/nn/tensor.hpp"

namespace acgan::ckpt {

// "ACGK" layout, little-endian:
//   magic "ACGK" | u16 version
//   u16-length manifest tag ("acgan", "classifier")
//   u64 iteration
//   u32-length metadata text (key=value lines)
//   u32 entry count, then per entry: u16-length name | u8 dtype (1 = f32) | u8 rank | rank x u32 dims
//   f32 payloads, entry by entry in manifest order
//   u64 RNG key | u64 RNG counter
//   u32 CRC32 of everything before it

inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 1;

struct Entry {
  std::string name;
  nn::Shape shape;
  std::vector<float> values;
};

struct Container {
  std::string tag;
  std::uint64_t iteration = 0;
  Meta meta;
  std::vector<Entry> entries;
  Rng rng;

  const Entry& entry(std::size_t i, const std::string& name, const nn::Shape& shape) const {
    if (i >= entries.size() || entries[i].name != name || entries[i].shape != shape)
      throw ArtifactMismatch("checkpoint manifest mismatch at entry " + std::to_string(i) + ": expected " + name + " " +
                        nn::to_string(shape) +
                        (i < entries.size() ? ", found " + entries[i].name + " " + nn::to_string(entries[i].shape)
                                            : ", found end of manifest"));
    return entries[i];
  }
};

inline std::vector<std::uint8_t> encode(const Container& c) {
  io::Writer w;
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("ACGK"), 4));
  w.put(kVersion);
  w.put_string16(c.tag);
  w.put(c.iteration);
  const std::string meta = c.meta.encode();
  w.put(static_cast<std::uint32_t>(meta.size()));
  w.put_bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(meta.data()), meta.size()));
  w.put(static_cast<std::uint32_t>(c.entries.size()));
  for (const auto& e : c.entries) {
    detail::require(e.values.size() == nn::numel(e.shape) && e.shape.size() <= 255,
                    "checkpoint entry " + e.name + " does not match its shape");
    w.put_string16(e.name);
    w.put(kDtypeF32);
    w.put(static_cast<std::uint8_t>(e.shape.size()));
    for (auto d : e.shape) w.put(static_cast<std::uint32_t>(d));
  }
  for (const auto& e : c.entries) w.put_array(std::span<const float>(e.values));
  w.put(c.rng.key());
  w.put(c.rng.counter());
  w.put_crc();
  return w.take();
}

inline Container decode(std::span<const std::uint8_t> file) {
  if (file.size() < 6 || std::memcmp(file.data(), "ACGK", 4) != 0) throw FormatError("not an ACGK checkpoint: bad magic");
  std::uint16_t version;
  std::memcpy(&version, file.data() + 4, 2);
  if (version != kVersion)
    throw VersionError("unsupported ACGK version " + std::to_string(version) + " (supported: " +
                       std::to_string(kVersion) + ")");
  io::Reader r(io::verify_crc(file));
  r.get_bytes(6);
  Container c;
  c.tag = r.get_string16();
  c.iteration = r.get<std::uint64_t>();
  const auto meta_len = r.get<std::uint32_t>();
  const auto meta = r.get_bytes(meta_len);
  c.meta = Meta::parse(std::string_view(reinterpret_cast<const char*>(meta.data()), meta.size()));
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    Entry e;
    e.name = r.get_string16();
    if (r.get<std::uint8_t>() != kDtypeF32) throw FormatError("checkpoint entry " + e.name + ": unsupported dtype");
    const auto rank = r.get<std::uint8_t>();
    for (std::uint8_t k = 0; k < rank; ++k) {
      const auto d = r.get<std::uint32_t>();
      if (d == 0) throw FormatError("checkpoint entry " + e.name + ": zero dimension");
      e.shape.push_back(d);
    }
    c.entries.push_back(std::move(e));
  }
  for (auto& e : c.entries) {
    const std::size_t n = nn::numel(e.shape);
    if (n > r.remaining() / sizeof(float)) throw FormatError("truncated checkpoint payload for " + e.name);
    e.values.resize(n);
    r.get_array(std::span<float>(e.values));
  }
  const auto key = r.get<std::uint64_t>();
  const auto counter = r.get<std::uint64_t>();
  c.rng = Rng::from_state(key, counter);
  if (r.remaining() != 0) throw FormatError("checkpoint has " + std::to_string(r.remaining()) + " trailing bytes");
  return c;
}

inline void save(const Container& c, const std::filesystem::path& path) { io::write_file(path, encode(c)); }

inline Container load(const std::filesystem::path& path) { return decode(io::read_file(path)); }

/// Loads and checks the manifest tag.
inline Container load(const std::filesystem::path& path, const std::string& expected_tag) {
  auto c = load(path);
  if (c.tag != expected_tag)
    throw ArtifactMismatch(path.string() + " is a '" + c.tag + "' checkpoint, expected '" + expected_tag + "'");
  return c;
}

}  // namespace acgan::ckpt
