#pragma once

// 8-bit grayscale images: binary PGM I/O, chunking into frame payloads and
// reassembly with mid-gray fill for chunks that never arrived.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "swarmrx/error.hpp"
#include "swarmrx/types.hpp"

namespace swarmrx::scenario {

struct ImagePayload {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  friend bool operator==(const ImagePayload&, const ImagePayload&) = default;
};

struct ImageChunk {
  std::uint16_t sequence = 0;
  BitStream bits;

  // 16-bit MSB-first sequence header followed by the payload bits.
  BitStream with_header() const {
    BitStream out;
    out.reserve(16 + bits.size());
    for (int k = 15; k >= 0; --k) out.push_back(static_cast<std::uint8_t>((sequence >> k) & 1u));
    out.insert(out.end(), bits.begin(), bits.end());
    return out;
  }
};

inline constexpr std::uint8_t kMissingPixel = 0x80;

inline std::vector<ImageChunk> image_to_bitstream(const ImagePayload& img, std::size_t chunk_bits) {
  if (chunk_bits == 0) throw InvalidArgument("chunk size must be positive");
  if (img.pixels.size() != img.width * img.height) throw InvalidArgument("pixel count does not match dimensions");
  BitStream all;
  all.reserve(img.pixels.size() * 8);
  for (auto p : img.pixels)
    for (int k = 7; k >= 0; --k) all.push_back(static_cast<std::uint8_t>((p >> k) & 1u));
  std::vector<ImageChunk> out;
  for (std::size_t at = 0; at < all.size(); at += chunk_bits) {
    if (out.size() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("image needs more than 65536 chunks");
    const std::size_t end = std::min(all.size(), at + chunk_bits);
    out.push_back({static_cast<std::uint16_t>(out.size()),
                   BitStream(all.begin() + static_cast<std::ptrdiff_t>(at), all.begin() + static_cast<std::ptrdiff_t>(end))});
  }
  return out;
}

inline std::size_t chunk_count(std::size_t width, std::size_t height, std::size_t chunk_bits) {
  return (width * height * 8 + chunk_bits - 1) / chunk_bits;
}

/// Places each chunk at sequence * chunk_bits. Bits are taken as received
/// (corruption passes through); pixels no chunk covered stay at 0x80.
inline ImagePayload bitstream_to_image(const std::vector<ImageChunk>& chunks, std::size_t width, std::size_t height,
                                       std::size_t chunk_bits) {
  if (width == 0 || height == 0) throw InvalidArgument("image dimensions must be positive");
  if (chunk_bits == 0) throw InvalidArgument("chunk size must be positive");
  const std::size_t total = width * height * 8;
  const std::size_t expect_chunks = chunk_count(width, height, chunk_bits);
  BitStream all(total, 0);
  std::vector<bool> have(total, false);
  for (const auto& c : chunks) {
    if (c.sequence >= expect_chunks)
      throw InvalidArgument("chunk " + std::to_string(c.sequence) + " lies outside a " + std::to_string(width) + "x" +
                            std::to_string(height) + " image");
    const std::size_t at = static_cast<std::size_t>(c.sequence) * chunk_bits;
    const std::size_t want = std::min(chunk_bits, total - at);
    if (c.bits.size() != want)
      throw InvalidArgument("chunk " + std::to_string(c.sequence) + " carries " + std::to_string(c.bits.size()) +
                            " bits, expected " + std::to_string(want));
    for (std::size_t k = 0; k < want; ++k) {
      all[at + k] = c.bits[k] & 1u;
      have[at + k] = true;
    }
  }
  ImagePayload img{width, height, std::vector<std::uint8_t>(width * height, kMissingPixel)};
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    if (!have[8 * p]) continue;
    std::uint8_t v = 0;
    for (std::size_t k = 0; k < 8; ++k) v = static_cast<std::uint8_t>((v << 1) | all[8 * p + k]);
    img.pixels[p] = v;
  }
  return img;
}

// Peak signal-to-noise ratio in dB against `reference`; +inf for identical images.
inline double psnr(const ImagePayload& reference, const ImagePayload& test) {
  if (reference.width != test.width || reference.height != test.height || reference.pixels.size() != test.pixels.size())
    throw InvalidArgument("PSNR needs images of equal size");
  double mse = 0.0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const double d = static_cast<double>(reference.pixels[i]) - static_cast<double>(test.pixels[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(reference.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

// Deterministic test card: gradients, a disc and a checkerboard patch.
inline ImagePayload synthetic_image(std::size_t width, std::size_t height) {
  ImagePayload img{width, height, std::vector<std::uint8_t>(width * height)};
  const double cx = static_cast<double>(width) * 0.35, cy = static_cast<double>(height) * 0.4;
  const double rad = static_cast<double>(std::min(width, height)) * 0.22;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      double v = 255.0 * (static_cast<double>(x) + static_cast<double>(y)) / static_cast<double>(width + height);
      const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
      if (dx * dx + dy * dy < rad * rad) v = 230.0;
      if (x > width * 5 / 8 && y > height * 5 / 8) v = ((x / 4 + y / 4) % 2) ? 20.0 : 200.0;
      img.pixels[y * width + x] = static_cast<std::uint8_t>(v);
    }
  return img;
}

namespace detail {
inline void skip_pgm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}
}  // namespace detail

inline ImagePayload read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("'" + path + "' is not a binary PGM (P5)");
  std::size_t w = 0, h = 0, maxval = 0;
  detail::skip_pgm_space(in);
  in >> w;
  detail::skip_pgm_space(in);
  in >> h;
  detail::skip_pgm_space(in);
  in >> maxval;
  if (!in || w == 0 || h == 0) throw IoError("'" + path + "': malformed PGM header");
  if (maxval != 255) throw IoError("'" + path + "': only 8-bit PGM (maxval 255) is supported");
  in.get();  // single whitespace before the raster
  ImagePayload img{w, h, std::vector<std::uint8_t>(w * h)};
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("'" + path + "': raster truncated");
  return img;
}

inline std::string encode_pgm(const ImagePayload& img) {
  std::ostringstream out;
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  return out.str();
}

inline void write_pgm(const ImagePayload& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image '" + path + "'");
  const auto bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace swarmrx::scenario
