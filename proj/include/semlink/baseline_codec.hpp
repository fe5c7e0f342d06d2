#ifndef SEMLINK_BASELINE_CODEC_HPP
#define SEMLINK_BASELINE_CODEC_HPP

// Conventional image source coder for the digital baseline chain: 8 x 8 DCT on
// YCbCr with the IJG quantization tables, coefficient bytes deflated with
// zlib. Stands in for JPEG; only its byte count and decoded image are used.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "semlink/dct.hpp"
#include "semlink/error.hpp"
#include "semlink/image.hpp"

namespace semlink::baseline {

namespace detail {

inline constexpr std::array<int, 64> kLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

inline constexpr std::array<int, 64> kChromaTable = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99, 24, 26, 56, 99, 99, 99,
    99, 99, 47, 66, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

/// IJG quality scaling, entries clamped to [1, 255].
inline std::array<int, 64> scaled_table(const std::array<int, 64>& base, int quality) {
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> t{};
  for (int i = 0; i < 64; ++i) t[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return t;
}

inline void put_varint(std::vector<std::uint8_t>& out, std::uint32_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint32_t get_varint(std::span<const std::uint8_t> in, std::size_t& pos) {
  std::uint32_t v = 0;
  for (int shift = 0; shift < 35; shift += 7) {
    if (pos >= in.size()) throw DecodingError("baseline stream truncated");
    const auto b = in[pos++];
    v |= static_cast<std::uint32_t>(b & 0x7F) << shift;
    if (!(b & 0x80)) return v;
  }
  throw DecodingError("baseline varint too long");
}

inline std::uint32_t zigzag_sign(int v) { return v >= 0 ? 2u * v : 2u * static_cast<std::uint32_t>(-v) - 1u; }
inline int unzigzag_sign(std::uint32_t u) { return (u & 1u) ? -static_cast<int>((u + 1) / 2) : static_cast<int>(u / 2); }

inline constexpr std::uint32_t kMagic = 0x4C534244;  // "DBSL"

}  // namespace detail

/// Encoded baseline image; `bytes` is what the coded chain carries.
struct EncodedImage {
  std::vector<std::uint8_t> bytes;
  int height = 0;
  int width = 0;
  int quality = 75;
};

inline EncodedImage encode(const ImageBuffer& img, int quality = 75) {
  if (quality < 1 || quality > 100) throw ParameterError("baseline quality must lie in [1, 100]");
  const int h = img.height(), w = img.width();
  const int bh = (h + 7) / 8, bw = (w + 7) / 8;
  const auto luma_q = detail::scaled_table(detail::kLumaTable, quality);
  const auto chroma_q = detail::scaled_table(detail::kChromaTable, quality);
  const auto& zz = dct::zigzag<8>();

  // Planes in the 0..255 JPEG convention, level shifted.
  std::array<GrayImage, 3> planes{GrayImage(h, w), GrayImage(h, w), GrayImage(h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double r = 255.0 * img.at(y, x, 0), g = 255.0 * img.at(y, x, 1), b = 255.0 * img.at(y, x, 2);
      planes[0](y, x) = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
      planes[1](y, x) = -0.168736 * r - 0.331264 * g + 0.5 * b;
      planes[2](y, x) = 0.5 * r - 0.418688 * g - 0.081312 * b;
    }

  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(bh) * bw * 3 * 8);
  for (int c = 0; c < 3; ++c) {
    const auto& table = c == 0 ? luma_q : chroma_q;
    int prev_dc = 0;
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        dct::Block<8> block{};
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) block[i][j] = planes[c].clamped(by * 8 + i, bx * 8 + j);
        const auto coef = dct::forward<8>(block);
        std::array<int, 64> q{};
        for (int z = 0; z < 64; ++z) {
          const auto [u, v] = zz[z];
          q[z] = static_cast<int>(std::lround(coef[u][v] / table[u * 8 + v]));
        }
        const int dc = q[0];
        q[0] = dc - prev_dc;
        prev_dc = dc;
        int last = 63;
        while (last >= 0 && q[last] == 0) --last;
        raw.push_back(static_cast<std::uint8_t>(last + 1));
        for (int z = 0; z <= last; ++z) detail::put_varint(raw, detail::zigzag_sign(q[z]));
      }
  }

  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_len);
  if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION) != Z_OK)
    throw EncodingError("deflate failed");
  packed.resize(packed_len);

  EncodedImage out{{}, h, w, quality};
  auto& bytes = out.bytes;
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put32(detail::kMagic);
  put32(static_cast<std::uint32_t>(h));
  put32(static_cast<std::uint32_t>(w));
  put32(static_cast<std::uint32_t>(quality));
  put32(static_cast<std::uint32_t>(raw.size()));
  bytes.insert(bytes.end(), packed.begin(), packed.end());
  return out;
}

inline ImageBuffer decode(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto get32 = [&] {
    if (pos + 4 > bytes.size()) throw DecodingError("baseline header truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
    return v;
  };
  if (get32() != detail::kMagic) throw DecodingError("bad baseline magic");
  const int h = static_cast<int>(get32());
  const int w = static_cast<int>(get32());
  const int quality = static_cast<int>(get32());
  uLongf raw_len = get32();
  if (h < 1 || w < 1 || quality < 1 || quality > 100) throw DecodingError("bad baseline header");

  std::vector<std::uint8_t> raw(raw_len);
  if (uncompress(raw.data(), &raw_len, bytes.data() + pos, static_cast<uLong>(bytes.size() - pos)) != Z_OK)
    throw DecodingError("inflate failed");

  const int bh = (h + 7) / 8, bw = (w + 7) / 8;
  const auto luma_q = detail::scaled_table(detail::kLumaTable, quality);
  const auto chroma_q = detail::scaled_table(detail::kChromaTable, quality);
  const auto& zz = dct::zigzag<8>();
  std::array<GrayImage, 3> planes{GrayImage(h, w), GrayImage(h, w), GrayImage(h, w)};

  std::size_t rp = 0;
  const std::span<const std::uint8_t> rawspan(raw);
  for (int c = 0; c < 3; ++c) {
    const auto& table = c == 0 ? luma_q : chroma_q;
    int prev_dc = 0;
    for (int by = 0; by < bh; ++by)
      for (int bx = 0; bx < bw; ++bx) {
        if (rp >= raw.size()) throw DecodingError("baseline stream truncated");
        const int count = raw[rp++];
        if (count > 64) throw DecodingError("bad baseline block length");
        std::array<int, 64> q{};
        for (int z = 0; z < count; ++z) q[z] = detail::unzigzag_sign(detail::get_varint(rawspan, rp));
        q[0] += prev_dc;
        prev_dc = q[0];
        dct::Block<8> coef{};
        for (int z = 0; z < 64; ++z) {
          const auto [u, v] = zz[z];
          coef[u][v] = static_cast<double>(q[z]) * table[u * 8 + v];
        }
        const auto px = dct::inverse<8>(coef);
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) {
            const int y = by * 8 + i, x = bx * 8 + j;
            if (y < h && x < w) planes[c](y, x) = px[i][j];
          }
      }
  }

  ImageBuffer out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double yy = planes[0](y, x) + 128.0, cb = planes[1](y, x), cr = planes[2](y, x);
      out.at(y, x, 0) = (yy + 1.402 * cr) / 255.0;
      out.at(y, x, 1) = (yy - 0.344136 * cb - 0.714136 * cr) / 255.0;
      out.at(y, x, 2) = (yy + 1.772 * cb) / 255.0;
    }
  out.clamp_unit();
  return out;
}

}  // namespace semlink::baseline

#endif  // SEMLINK_BASELINE_CODEC_HPP
