#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "acgan/core/binary_io.hpp"
#include "acgan/data/dataset.hpp"

namespace acgan::data {

/// 8-bit image in interleaved row-major layout (HWC), ready for PNG.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 3;
  std::vector<std::uint8_t> pixels;

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * channels + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const { return pixels[(y * width + x) * channels + c]; }
};

/// Converts one CHW image with values in (-1, 1) to an interleaved 8-bit image.
template <class T>
Image tensor_image(std::span<const T> chw, std::size_t channels, std::size_t height, std::size_t width) {
  detail::require(chw.size() == channels * height * width, "tensor_image: size mismatch");
  Image img{width, height, channels, std::vector<std::uint8_t>(chw.size())};
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) img.at(x, y, c) = unit_to_pixel(chw[(c * height + y) * width + x]);
  return img;
}

/// Row-major tiling of equally sized cells separated (and framed) by black gutters.
inline Image tile_grid(std::span<const Image> cells, std::size_t rows, std::size_t cols, std::size_t gutter = 2) {
  detail::require(rows >= 1 && cols >= 1 && cells.size() == rows * cols, "tile_grid: need rows x cols cells");
  const auto& first = cells.front();
  for (const auto& c : cells)
    detail::require(c.width == first.width && c.height == first.height && c.channels == first.channels,
                    "tile_grid: cells differ in size");
  Image out;
  out.channels = first.channels;
  out.width = cols * first.width + (cols + 1) * gutter;
  out.height = rows * first.height + (rows + 1) * gutter;
  out.pixels.assign(out.width * out.height * out.channels, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const Image& cell = cells[r * cols + c];
      const std::size_t x0 = gutter + c * (first.width + gutter), y0 = gutter + r * (first.height + gutter);
      for (std::size_t y = 0; y < cell.height; ++y)
        for (std::size_t x = 0; x < cell.width; ++x)
          for (std::size_t ch = 0; ch < cell.channels; ++ch) out.at(x0 + x, y0 + y, ch) = cell.at(x, y, ch);
    }
  return out;
}

namespace impl {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4], std::span<const std::uint8_t> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  put_be32(out, io::crc32(std::span<const std::uint8_t>(out).subspan(start)));
}

}  // namespace impl

/// Encodes an 8-bit grayscale or RGB PNG; `text` entries become tEXt chunks.
inline std::vector<std::uint8_t> encode_png(const Image& img, const std::map<std::string, std::string>& text = {}) {
  detail::require(img.width > 0 && img.height > 0 && (img.channels == 1 || img.channels == 3) &&
                      img.pixels.size() == img.width * img.height * img.channels,
                  "encode_png: malformed image");
  std::vector<std::uint8_t> out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  impl::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  impl::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.insert(ihdr.end(), {8, static_cast<std::uint8_t>(img.channels == 3 ? 2 : 0), 0, 0, 0});
  impl::put_chunk(out, "IHDR", ihdr);

  for (const auto& [key, value] : text) {
    detail::require(!key.empty() && key.size() < 80, "encode_png: tEXt keyword must be 1-79 bytes");
    std::vector<std::uint8_t> t(key.begin(), key.end());
    t.push_back(0);
    t.insert(t.end(), value.begin(), value.end());
    impl::put_chunk(out, "tEXt", t);
  }

  // Filter type 0 on every scanline.
  const std::size_t stride = img.width * img.channels;
  std::vector<std::uint8_t> raw;
  raw.reserve(img.height * (stride + 1));
  for (std::size_t y = 0; y < img.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), img.pixels.begin() + static_cast<std::ptrdiff_t>(y * stride),
               img.pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION) != Z_OK)
    throw IoError("encode_png: deflate failed");
  packed.resize(packed_size);
  impl::put_chunk(out, "IDAT", packed);
  impl::put_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const std::filesystem::path& path, const Image& img,
                      const std::map<std::string, std::string>& text = {}) {
  io::write_file(path, encode_png(img, text));
}

}  // namespace acgan::data
