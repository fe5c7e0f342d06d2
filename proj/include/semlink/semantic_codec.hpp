#ifndef SEMLINK_SEMANTIC_CODEC_HPP
#define SEMLINK_SEMANTIC_CODEC_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "semlink/dct.hpp"
#include "semlink/error.hpp"
#include "semlink/image.hpp"
#include "semlink/phy_transport.hpp"

namespace semlink::codec {

inline constexpr int kPadMultiple = 64;
inline constexpr int kDownsampling = 16;
inline constexpr int kDefaultChannels = 192;

inline int padded_dim(int d) { return (d + kPadMultiple - 1) / kPadMultiple * kPadMultiple; }

/// M x lh x lw latent, channel-major. orig_h/orig_w are the pre-padding dims
/// the decoder crops back to.
struct LatentTensor {
  int m = 0;
  int lh = 0;
  int lw = 0;
  int orig_h = 0;
  int orig_w = 0;
  std::vector<double> data;

  std::size_t size() const noexcept { return data.size(); }
  double& at(int c, int y, int x) noexcept { return data[(static_cast<std::size_t>(c) * lh + y) * lw + x]; }
  double at(int c, int y, int x) const noexcept {
    return data[(static_cast<std::size_t>(c) * lh + y) * lw + x];
  }
};

struct QuantizedLatent {
  std::vector<std::uint32_t> levels;
  int n = 4;
  int bits = 8;
  double y_min = 0.0;
  double y_max = 0.0;
  int m = 0;
  int lh = 0;
  int lw = 0;
  int orig_h = 0;
  int orig_w = 0;

  std::uint32_t max_level() const noexcept { return static_cast<std::uint32_t>((std::uint64_t{1} << bits) - 1); }
  /// Quantizer step (y_max - y_min) / (2^b - 1).
  double step() const noexcept { return (y_max - y_min) / static_cast<double>(max_level()); }

  friend bool operator==(const QuantizedLatent&, const QuantizedLatent&) = default;
};

struct PaddedImage {
  ImageBuffer image;
  int orig_h = 0;
  int orig_w = 0;
};

/// L = m * (H~/16) * (W~/16) with H~, W~ the dims padded to multiples of 64.
inline std::size_t latent_size(int h, int w, int m = kDefaultChannels) {
  if (h < 1 || w < 1 || m < 1) throw ParameterError("latent_size needs positive dims and channels");
  return static_cast<std::size_t>(m) * (padded_dim(h) / kDownsampling) * (padded_dim(w) / kDownsampling);
}

namespace detail {

/// Whole-sample symmetric reflection (edge sample not repeated), periodic for
/// pads longer than the source.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace detail

/// Reflection-pads to the next multiples of 64; the top-left H x W region is the input.
inline PaddedImage pad_reflect(const ImageBuffer& img) {
  const int h = img.height(), w = img.width();
  const int ph = padded_dim(h), pw = padded_dim(w);
  PaddedImage out{ImageBuffer(ph, pw), h, w};
  for (int y = 0; y < ph; ++y) {
    const int sy = detail::reflect_index(y, h);
    for (int x = 0; x < pw; ++x) {
      const int sx = detail::reflect_index(x, w);
      for (int c = 0; c < ImageBuffer::kChannels; ++c) out.image.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

/// Pluggable analysis/synthesis pair with a /16 spatial factor. synthesize
/// returns the full padded-size image, unclamped.
class Transform {
 public:
  virtual ~Transform() = default;
  virtual int channels() const = 0;
  virtual LatentTensor analyze(const ImageBuffer& padded) const = 0;
  virtual ImageBuffer synthesize(const LatentTensor& latent) const = 0;
};

/// Reference transform: per colour channel, non-overlapping 16 x 16
/// orthonormal DCT-II, keeping the first `kept` zigzag coefficients. Latent
/// channel c * kept + z holds zigzag coefficient z of colour c.
class BlockDctTransform final : public Transform {
 public:
  static constexpr int kBlock = 16;

  explicit BlockDctTransform(int kept_per_colour = 64) : kept_(kept_per_colour) {
    if (kept_ < 1 || kept_ > kBlock * kBlock) throw ParameterError("kept coefficients must lie in [1, 256]");
  }

  int channels() const override { return kept_ * ImageBuffer::kChannels; }
  int kept_per_colour() const noexcept { return kept_; }

  LatentTensor analyze(const ImageBuffer& padded) const override {
    if (padded.height() % kBlock != 0 || padded.width() % kBlock != 0)
      throw CodecError("block DCT needs dims divisible by 16");
    LatentTensor y;
    y.m = channels();
    y.lh = padded.height() / kBlock;
    y.lw = padded.width() / kBlock;
    y.orig_h = padded.height();
    y.orig_w = padded.width();
    y.data.assign(static_cast<std::size_t>(y.m) * y.lh * y.lw, 0.0);

    const auto& zz = dct::zigzag<kBlock>();
    dct::Block<kBlock> block{};
    for (int by = 0; by < y.lh; ++by)
      for (int bx = 0; bx < y.lw; ++bx)
        for (int c = 0; c < ImageBuffer::kChannels; ++c) {
          for (int i = 0; i < kBlock; ++i)
            for (int j = 0; j < kBlock; ++j) block[i][j] = padded.at(by * kBlock + i, bx * kBlock + j, c);
          const auto coef = dct::forward<kBlock>(block);
          for (int z = 0; z < kept_; ++z) y.at(c * kept_ + z, by, bx) = coef[zz[z].first][zz[z].second];
        }
    return y;
  }

  ImageBuffer synthesize(const LatentTensor& y) const override {
    if (y.m != channels()) throw CodecError("latent channel count does not match transform");
    if (y.lh < 1 || y.lw < 1 || y.data.size() != static_cast<std::size_t>(y.m) * y.lh * y.lw)
      throw CodecError("latent shape is inconsistent with its data");
    ImageBuffer out(y.lh * kBlock, y.lw * kBlock);
    const auto& zz = dct::zigzag<kBlock>();
    for (int by = 0; by < y.lh; ++by)
      for (int bx = 0; bx < y.lw; ++bx)
        for (int c = 0; c < ImageBuffer::kChannels; ++c) {
          dct::Block<kBlock> coef{};
          for (int z = 0; z < kept_; ++z) coef[zz[z].first][zz[z].second] = y.at(c * kept_ + z, by, bx);
          const auto px = dct::inverse<kBlock>(coef);
          for (int i = 0; i < kBlock; ++i)
            for (int j = 0; j < kBlock; ++j) out.at(by * kBlock + i, bx * kBlock + j, c) = px[i][j];
        }
    return out;
  }

 private:
  int kept_;
};

/// Runs the analysis transform on a padded image.
inline LatentTensor analyze(const PaddedImage& padded, const Transform& transform) {
  const auto& img = padded.image;
  if (img.height() % kPadMultiple != 0 || img.width() % kPadMultiple != 0)
    throw CodecError("analysis input must have dims that are multiples of 64");
  auto y = transform.analyze(img);
  if (y.m != transform.channels() || y.lh * kDownsampling != img.height() ||
      y.lw * kDownsampling != img.width() ||
      y.data.size() != static_cast<std::size_t>(y.m) * y.lh * y.lw)
    throw CodecError("transform produced a latent of unexpected shape");
  y.orig_h = padded.orig_h;
  y.orig_w = padded.orig_w;
  return y;
}

/// Synthesis, crop back to the original dims, clamp to [0, 1].
inline ImageBuffer synthesize(const LatentTensor& latent, const Transform& transform) {
  if (latent.m != transform.channels()) throw CodecError("latent channel count does not match transform");
  if (latent.orig_h < 1 || latent.orig_w < 1 || latent.orig_h > latent.lh * kDownsampling ||
      latent.orig_w > latent.lw * kDownsampling)
    throw CodecError("latent original dims are inconsistent with its shape");
  auto full = transform.synthesize(latent);
  auto out = crop(full, {0, 0, latent.orig_w, latent.orig_h});
  out.clamp_unit();
  return out;
}

inline LatentTensor encode(const ImageBuffer& img, const Transform& transform) {
  return analyze(pad_reflect(img), transform);
}

/// Global min-max uniform quantization to b = 32/n bits, ties away from zero.
/// A constant latent maps to all-zero levels.
inline QuantizedLatent quantize(const LatentTensor& y, int n) {
  QuantizedLatent q;
  q.n = n;
  q.bits = phy::bits_per_element(n);
  q.m = y.m;
  q.lh = y.lh;
  q.lw = y.lw;
  q.orig_h = y.orig_h;
  q.orig_w = y.orig_w;
  if (y.data.empty()) return q;

  for (double v : y.data)
    if (!std::isfinite(v)) throw CodecError("latent contains non-finite values");
  const auto [lo, hi] = std::minmax_element(y.data.begin(), y.data.end());
  q.y_min = *lo;
  q.y_max = *hi;

  q.levels.assign(y.data.size(), 0u);
  const double range = q.y_max - q.y_min;
  if (range <= 0.0) return q;
  const double top = static_cast<double>(q.max_level());
  for (std::size_t i = 0; i < y.data.size(); ++i) {
    const double scaled = (y.data[i] - q.y_min) / range * top;
    q.levels[i] = static_cast<std::uint32_t>(std::clamp(std::round(scaled), 0.0, top));
  }
  return q;
}

/// Linear reconstruction level * step + y_min; the end levels reproduce the
/// extrema exactly.
inline LatentTensor dequantize(const QuantizedLatent& q) {
  LatentTensor y;
  y.m = q.m;
  y.lh = q.lh;
  y.lw = q.lw;
  y.orig_h = q.orig_h;
  y.orig_w = q.orig_w;
  y.data.resize(q.levels.size());
  const std::uint32_t top = q.max_level();
  const double range = q.y_max - q.y_min;
  for (std::size_t i = 0; i < q.levels.size(); ++i) {
    const auto l = q.levels[i];
    if (l == 0 || range <= 0.0)
      y.data[i] = q.y_min;
    else if (l >= top)
      y.data[i] = q.y_max;
    else
      y.data[i] = q.y_min + range * (static_cast<double>(l) / top);
  }
  return y;
}

// Wire layout, little-endian, 32-byte header:
//   u32 magic | u16 m | u16 n | u16 lh | u16 lw | u16 orig_h | u16 orig_w |
//   f64 y_min | f64 y_max
// followed by the packed 32-bit words.
inline constexpr std::uint32_t kWireMagic = 0x314B4C53;  // "SLK1"

/// Side information that travels error-free next to the packed words.
struct LatentHeader {
  int m = 0;
  int n = 4;
  int lh = 0;
  int lw = 0;
  int orig_h = 0;
  int orig_w = 0;
  double y_min = 0.0;
  double y_max = 0.0;
};

inline LatentHeader header_of(const QuantizedLatent& q) {
  return {q.m, q.n, q.lh, q.lw, q.orig_h, q.orig_w, q.y_min, q.y_max};
}

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DecodingError("latent payload truncated");
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline std::uint16_t narrow16(int v, const char* what) {
  if (v < 0 || v > 0xFFFF) throw EncodingError(std::string(what) + " does not fit the 16-bit header field");
  return static_cast<std::uint16_t>(v);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_payload(const LatentHeader& h, const phy::SymbolStream& s) {
  std::vector<std::uint8_t> out;
  out.reserve(phy::kLatentHeaderBytes + s.words.size() * 4);
  detail::put_le<std::uint32_t>(out, kWireMagic);
  detail::put_le(out, detail::narrow16(h.m, "m"));
  detail::put_le(out, detail::narrow16(h.n, "n"));
  detail::put_le(out, detail::narrow16(h.lh, "lh"));
  detail::put_le(out, detail::narrow16(h.lw, "lw"));
  detail::put_le(out, detail::narrow16(h.orig_h, "orig_h"));
  detail::put_le(out, detail::narrow16(h.orig_w, "orig_w"));
  detail::put_le(out, h.y_min);
  detail::put_le(out, h.y_max);
  for (auto w : s.words) detail::put_le(out, w);
  return out;
}

struct Payload {
  LatentHeader header;
  phy::SymbolStream stream;
};

inline Payload parse_payload(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (detail::get_le<std::uint32_t>(bytes, pos) != kWireMagic) throw DecodingError("bad latent payload magic");
  Payload p;
  p.header.m = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.n = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.lh = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.lw = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.orig_h = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.orig_w = detail::get_le<std::uint16_t>(bytes, pos);
  p.header.y_min = detail::get_le<double>(bytes, pos);
  p.header.y_max = detail::get_le<double>(bytes, pos);
  if (!phy::valid_ratio(p.header.n)) throw DecodingError("payload header carries an invalid n");

  auto& s = p.stream;
  s.n = p.header.n;
  s.bits_per_element = 32 / s.n;
  s.num_elements = static_cast<std::size_t>(p.header.m) * p.header.lh * p.header.lw;
  s.num_complex_symbols = phy::complex_symbols_for(s.num_elements, s.n);
  const std::size_t words = 2 * s.num_complex_symbols;
  if (bytes.size() != phy::kLatentHeaderBytes + words * 4)
    throw DecodingError("payload length disagrees with header shape");
  s.words.reserve(words);
  for (std::size_t i = 0; i < words; ++i) s.words.push_back(detail::get_le<std::uint32_t>(bytes, pos));
  return p;
}

/// Rebuilds a quantized latent from side information and (possibly
/// impaired) words. Levels dropped by packing come back as level 0.
inline QuantizedLatent reassemble(const LatentHeader& h, const phy::SymbolStream& s) {
  QuantizedLatent q;
  q.n = h.n;
  q.bits = phy::bits_per_element(h.n);
  q.m = h.m;
  q.lh = h.lh;
  q.lw = h.lw;
  q.orig_h = h.orig_h;
  q.orig_w = h.orig_w;
  q.y_min = h.y_min;
  q.y_max = h.y_max;
  q.levels = phy::unpack_latent(s);
  const std::size_t total = static_cast<std::size_t>(h.m) * h.lh * h.lw;
  if (q.levels.size() > total) throw DecodingError("stream carries more levels than the header shape");
  q.levels.resize(total, 0u);
  return q;
}

}  // namespace semlink::codec

#endif  // SEMLINK_SEMANTIC_CODEC_HPP
