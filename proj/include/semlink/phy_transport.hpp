#ifndef SEMLINK_PHY_TRANSPORT_HPP
#define SEMLINK_PHY_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlink/channel_model.hpp"
#include "semlink/error.hpp"
#include "semlink/random.hpp"

namespace semlink::phy {

/// Bytes of error-free side information sent ahead of every latent payload.
inline constexpr std::size_t kLatentHeaderBytes = 32;

inline bool valid_ratio(int n) noexcept { return n == 2 || n == 4 || n == 8 || n == 16; }

inline int bits_per_element(int n) {
  if (!valid_ratio(n)) throw ParameterError("compression ratio n must be one of 2, 4, 8, 16");
  return 32 / n;
}

/// Quantized latent levels packed n-per-32-bit word; two words form one
/// complex channel use.
struct SymbolStream {
  std::vector<std::uint32_t> words;
  int n = 4;
  int bits_per_element = 8;
  std::size_t num_elements = 0;
  std::size_t num_complex_symbols = 0;

  friend bool operator==(const SymbolStream&, const SymbolStream&) = default;
};

inline std::size_t complex_symbols_for(std::size_t num_elements, int n) {
  bits_per_element(n);
  return num_elements / (2 * static_cast<std::size_t>(n));
}

/// Number of OFDM symbols needed for `n_sym` complex symbols on K subcarriers;
/// the last one is zero-padded.
inline std::size_t ofdm_frames(std::size_t n_sym, int k) {
  if (k < 1) throw ParameterError("subcarrier count K must be >= 1");
  return (n_sym + static_cast<std::size_t>(k) - 1) / static_cast<std::size_t>(k);
}

/// Packs levels MSB-first: element j of a word occupies bits
/// [32 - b(j+1), 32 - b j). Elements beyond 2n * floor(L / 2n) are dropped.
inline SymbolStream pack_latent(std::span<const std::uint32_t> levels, int n) {
  const int b = bits_per_element(n);
  const std::uint64_t limit = std::uint64_t{1} << b;

  SymbolStream s;
  s.n = n;
  s.bits_per_element = b;
  s.num_elements = levels.size();
  s.num_complex_symbols = complex_symbols_for(levels.size(), n);
  const std::size_t kept = s.num_complex_symbols * 2 * static_cast<std::size_t>(n);

  s.words.assign(2 * s.num_complex_symbols, 0u);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] >= limit)
      throw EncodingError("level " + std::to_string(levels[i]) + " at index " + std::to_string(i) +
                          " does not fit in " + std::to_string(b) + " bits");
    if (i >= kept) continue;
    const std::size_t word = i / n;
    const int slot = static_cast<int>(i % n);
    s.words[word] |= levels[i] << (32 - b * (slot + 1));
  }
  return s;
}

/// Inverse of pack_latent over its retained prefix (2n * N_sym levels).
inline std::vector<std::uint32_t> unpack_latent(const SymbolStream& s) {
  if (!valid_ratio(s.n)) throw DecodingError("stream carries an invalid compression ratio");
  if (s.bits_per_element != 32 / s.n) throw DecodingError("bits per element disagrees with n");
  if (s.num_complex_symbols != s.num_elements / (2 * static_cast<std::size_t>(s.n)))
    throw DecodingError("symbol count disagrees with element count");
  if (s.words.size() != 2 * s.num_complex_symbols)
    throw DecodingError("word count disagrees with symbol count");

  const int b = s.bits_per_element;
  const std::uint32_t mask = b == 32 ? ~0u : ((1u << b) - 1u);
  std::vector<std::uint32_t> out(s.words.size() * static_cast<std::size_t>(s.n));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t word = i / s.n;
    const int slot = static_cast<int>(i % s.n);
    out[i] = (s.words[word] >> (32 - b * (slot + 1))) & mask;
  }
  return out;
}

/// Exact Gray-coded square M-QAM bit error probability on AWGN at symbol
/// SNR `snr_linear` (Cho & Yoon closed form). M in {4, 16, 64, 256}.
inline double qam_bit_error_probability(double snr_linear, int m = 16) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || side * side != m || (side & (side - 1)) != 0)
    throw ParameterError("QAM order must be a square power of two >= 4");
  if (snr_linear < 0.0) throw ParameterError("SNR must be non-negative");
  if (std::isinf(snr_linear)) return 0.0;

  const int bits_per_dim = static_cast<int>(std::lround(std::log2(side)));
  const double x = std::sqrt(3.0 * snr_linear / (2.0 * (m - 1)));
  double total = 0.0;
  for (int k = 1; k <= bits_per_dim; ++k) {
    const long half_pow = 1L << (k - 1);
    const long terms = static_cast<long>((1.0 - std::ldexp(1.0, -k)) * side);
    double pk = 0.0;
    for (long i = 0; i < terms; ++i) {
      const double ratio = static_cast<double>(i * half_pow) / side;
      const long sign_exp = static_cast<long>(std::floor(ratio));
      const double weight = static_cast<double>(half_pow) - std::floor(ratio + 0.5);
      const double term = weight * std::erfc((2.0 * i + 1.0) * x);
      pk += (sign_exp % 2 == 0) ? term : -term;
    }
    total += pk / side;
  }
  return std::clamp(total / bits_per_dim, 0.0, 0.5);
}

/// Passes a packed stream through the channel. Bit i (word-major, MSB first)
/// rides subcarrier i mod K and flips with the QAM bit error probability of
/// that subcarrier's SNR. Metadata is untouched.
inline SymbolStream semantic_transmit(const SymbolStream& stream,
                                      const channel::ChannelRealization& ch,
                                      std::uint64_t rng_seed, int qam_order = 16) {
  if (stream.words.empty()) throw ParameterError("cannot transmit an empty symbol stream");
  const std::size_t k = ch.subcarriers();
  if (k == 0) throw ParameterError("channel has no subcarriers");

  std::vector<std::uint64_t> thresholds(k);
  bool any = false;
  for (std::size_t i = 0; i < k; ++i) {
    thresholds[i] = probability_threshold(qam_bit_error_probability(ch.snrs_linear[i], qam_order));
    any = any || thresholds[i] != 0;
  }

  SymbolStream out = stream;
  if (!any) return out;

  std::mt19937_64 engine(mix64(rng_seed));
  std::size_t sub = 0;
  for (auto& word : out.words) {
    std::uint32_t flips = 0;
    for (int bit = 31; bit >= 0; --bit) {
      if (engine() < thresholds[sub]) flips |= 1u << bit;
      if (++sub == k) sub = 0;
    }
    word ^= flips;
  }
  return out;
}

enum class Chain { baseline, semantic, text };

inline std::string_view to_string(Chain c) noexcept {
  switch (c) {
    case Chain::baseline: return "baseline";
    case Chain::semantic: return "semantic";
    case Chain::text: return "text";
  }
  return "unknown";
}

inline Chain chain_from_string(std::string_view s) {
  if (s == "baseline") return Chain::baseline;
  if (s == "semantic") return Chain::semantic;
  if (s == "text") return Chain::text;
  throw ParameterError("unknown chain '" + std::string(s) + "'");
}

/// Ledger row for one payload sent over the air.
struct TransmissionRecord {
  Chain chain = Chain::baseline;
  std::size_t payload_bytes = 0;
  std::size_t complex_symbols = 0;
  std::size_t ofdm_frames = 0;
  bool delivered = false;
  double esnr_db = 0.0;
  std::size_t frame_errors = 0;
};

struct CodedLinkConfig {
  double rate = 0.5;
  int bits_per_symbol = 4;

  void validate() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw ParameterError("code rate must lie in (0, 1]");
    if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6 &&
        bits_per_symbol != 8)
      throw ParameterError("bits per symbol must be one of 2, 4, 6, 8");
  }
};

inline std::size_t coded_complex_symbols(std::size_t payload_bytes, const CodedLinkConfig& link) {
  link.validate();
  const double bits = static_cast<double>(payload_bytes) * 8.0;
  return static_cast<std::size_t>(std::ceil(bits / (link.rate * link.bits_per_symbol) - 1e-9));
}

/// Coded digital chain: every OFDM frame is erased with probability
/// bler(ESNR); the payload is delivered only if no frame is erased.
inline TransmissionRecord baseline_transmit(std::size_t payload_bytes,
                                            const channel::ChannelRealization& ch,
                                            const CodedLinkConfig& link,
                                            const channel::LinkAbstractionConfig& abstraction,
                                            std::uint64_t rng_seed, Chain tag = Chain::baseline) {
  if (payload_bytes < 1) throw ParameterError("payload must be at least one byte");
  abstraction.validate();

  TransmissionRecord r;
  r.chain = tag;
  r.payload_bytes = payload_bytes;
  r.complex_symbols = coded_complex_symbols(payload_bytes, link);
  r.ofdm_frames = ofdm_frames(r.complex_symbols, static_cast<int>(ch.subcarriers()));
  const double esnr = channel::eesm(ch, abstraction.beta);
  r.esnr_db = channel::linear_to_db(esnr);

  const double p = channel::bler(esnr, abstraction);
  const auto threshold = probability_threshold(p);
  std::mt19937_64 engine(mix64(rng_seed));
  for (std::size_t f = 0; f < r.ofdm_frames; ++f)
    if (engine() < threshold) ++r.frame_errors;
  r.delivered = r.frame_errors == 0;
  return r;
}

/// UTF-8 text over the coded chain; an empty string still costs one byte.
inline TransmissionRecord text_transmit(std::string_view text, const channel::ChannelRealization& ch,
                                        const CodedLinkConfig& link,
                                        const channel::LinkAbstractionConfig& abstraction,
                                        std::uint64_t rng_seed) {
  return baseline_transmit(std::max<std::size_t>(1, text.size()), ch, link, abstraction, rng_seed,
                           Chain::text);
}

/// Accounting for a semantic payload (header + two 32-bit words per symbol).
/// The semantic chain always delivers; its errors are bit flips.
inline TransmissionRecord semantic_record(const SymbolStream& stream,
                                          const channel::ChannelRealization& ch, double beta) {
  TransmissionRecord r;
  r.chain = Chain::semantic;
  r.complex_symbols = stream.num_complex_symbols;
  r.payload_bytes = kLatentHeaderBytes + stream.words.size() * sizeof(std::uint32_t);
  r.ofdm_frames = ofdm_frames(r.complex_symbols, static_cast<int>(ch.subcarriers()));
  r.esnr_db = channel::linear_to_db(channel::eesm(ch, beta));
  r.delivered = true;
  return r;
}

inline std::string csv_header() { return "chain,payload_bytes,complex_symbols,ofdm_frames,esnr_db,delivered"; }

inline std::string to_csv(const TransmissionRecord& r) {
  char esnr[64];
  std::snprintf(esnr, sizeof esnr, "%.6f", r.esnr_db);
  return std::string(to_string(r.chain)) + ',' + std::to_string(r.payload_bytes) + ',' +
         std::to_string(r.complex_symbols) + ',' + std::to_string(r.ofdm_frames) + ',' + esnr +
         ',' + (r.delivered ? "1" : "0");
}

}  // namespace semlink::phy

#endif  // SEMLINK_PHY_TRANSPORT_HPP
