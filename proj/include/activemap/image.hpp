#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <zlib.h>

namespace activemap {

// Row-major RGB raster with channels in [0, 1]. (0, 0) is the top-left pixel.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3d> px;

  Image() = default;
  Image(int w, int h, const Eigen::Vector3d& fill = {0, 0, 0})
      : width(w), height(h), px(static_cast<size_t>(w) * h, fill) {}

  bool contains(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  Eigen::Vector3d& at(int x, int y) { return px[static_cast<size_t>(y) * width + x]; }
  const Eigen::Vector3d& at(int x, int y) const {
    return px[static_cast<size_t>(y) * width + x];
  }

  void set_clipped(int x, int y, const Eigen::Vector3d& c) {
    if (contains(x, y)) at(x, y) = c;
  }

  std::vector<std::uint8_t> to_rgb8() const {
    std::vector<std::uint8_t> out;
    out.reserve(px.size() * 3);
    for (const auto& p : px) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(p[c], 0.0, 1.0);
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
      }
    }
    return out;
  }
};

namespace detail {

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::vector<std::uint8_t>& data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

inline std::vector<std::uint8_t> zlib_compress(const std::vector<std::uint8_t>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> out(bound);
  if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw std::runtime_error("zlib compression failed");
  }
  out.resize(bound);
  return out;
}

}  // namespace detail

// Encodes an 8-bit truecolor PNG (filter 0 scanlines, single IDAT).
inline std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw std::invalid_argument("encode_png: empty image");
  const auto rgb = img.to_rgb8();
  std::vector<std::uint8_t> raw;
  raw.reserve((static_cast<size_t>(img.width) * 3 + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter type none
    const std::uint8_t* row = rgb.data() + static_cast<size_t>(y) * img.width * 3;
    raw.insert(raw.end(), row, row + static_cast<size_t>(img.width) * 3);
  }

  std::vector<std::uint8_t> out = {137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<std::uint8_t> ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", detail::zlib_compress(raw));
  detail::put_chunk(out, "IEND", {});
  return out;
}

inline void write_png(const std::string& path, const Image& img) {
  const auto bytes = encode_png(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Binary PGM (P5, maxval 255) from raw bytes, row-major.
inline void write_pgm(const std::string& path, int width, int height,
                      const std::vector<std::uint8_t>& gray) {
  if (static_cast<size_t>(width) * height != gray.size()) {
    throw std::invalid_argument("write_pgm: size mismatch");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "P5\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
}

}  // namespace activemap
