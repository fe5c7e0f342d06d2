#include <gtest/gtest.h>

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "semlink/phy_transport.hpp"

using namespace semlink;
using namespace semlink::phy;

namespace {

// Brute-force packer: write each level as a b-character bit string, concatenate,
// cut into 32-character words.
std::vector<std::uint32_t> pack_by_string(const std::vector<std::uint32_t>& levels, int n) {
  const int b = 32 / n;
  const std::size_t kept = levels.size() / (2 * n) * (2 * n);
  std::string bits;
  for (std::size_t i = 0; i < kept; ++i)
    for (int k = b - 1; k >= 0; --k) bits.push_back(((levels[i] >> k) & 1u) ? '1' : '0');
  std::vector<std::uint32_t> words;
  for (std::size_t w = 0; w < bits.size() / 32; ++w) {
    std::uint32_t v = 0;
    for (int k = 0; k < 32; ++k) v = (v << 1) | (bits[w * 32 + k] == '1' ? 1u : 0u);
    words.push_back(v);
  }
  return words;
}

std::vector<std::uint32_t> random_levels(Rng& rng, std::size_t count, int n) {
  const long top = static_cast<long>((std::uint64_t{1} << (32 / n)) - 1);
  std::vector<std::uint32_t> v(count);
  for (auto& x : v) x = static_cast<std::uint32_t>(rng.uniform_int(0, top));
  return v;
}

// Monte-Carlo 16-QAM: Gray mapping per dimension (00 -> -3, 01 -> -1, 11 -> +1,
// 10 -> +3), unit average symbol energy, nearest-point detection.
double monte_carlo_16qam_ber(double snr_linear, long symbols, std::uint64_t seed) {
  static constexpr std::array<double, 4> kLevel = {-3.0, -1.0, 3.0, 1.0};  // index = gray bits
  const double scale = 1.0 / std::sqrt(10.0);
  const double sigma = std::sqrt(0.5 / snr_linear);
  auto detect = [&](double r) {
    const double u = r / scale;
    const int g = u < -2.0 ? 0 : (u < 0.0 ? 1 : (u < 2.0 ? 3 : 2));
    return g;
  };
  Rng rng(seed);
  long errors = 0;
  for (long s = 0; s < symbols; ++s) {
    const int bi = static_cast<int>(rng.uniform_int(0, 3));
    const int bq = static_cast<int>(rng.uniform_int(0, 3));
    const double ni = rng.normal() * sigma;
    const double nq = rng.normal() * sigma;
    const int di = detect(kLevel[bi] * scale + ni);
    const int dq = detect(kLevel[bq] * scale + nq);
    errors += std::popcount(static_cast<unsigned>(bi ^ di)) + std::popcount(static_cast<unsigned>(bq ^ dq));
  }
  return static_cast<double>(errors) / (4.0 * static_cast<double>(symbols));
}

long count_flips(const SymbolStream& a, const SymbolStream& b) {
  long f = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) f += std::popcount(a.words[i] ^ b.words[i]);
  return f;
}

}  // namespace

TEST(Arithmetic, WorkedExample) {
  EXPECT_EQ(complex_symbols_for(540672, 4), 67584u);
  EXPECT_EQ(ofdm_frames(67584, 64), 1056u);
  EXPECT_EQ(ofdm_frames(0, 64), 0u);
  EXPECT_EQ(ofdm_frames(65, 64), 2u);
  EXPECT_THROW(ofdm_frames(10, 0), ParameterError);
  EXPECT_THROW(bits_per_element(3), ParameterError);
  EXPECT_EQ(bits_per_element(2), 16);
  EXPECT_EQ(bits_per_element(16), 2);
}

TEST(Pack, AllZero) {
  for (int n : {2, 4, 8, 16}) {
    const std::vector<std::uint32_t> levels(4 * n, 0u);
    const auto s = pack_latent(levels, n);
    for (auto w : s.words) EXPECT_EQ(w, 0u);
  }
}

TEST(Pack, SixteenTwoBitLevels) {
  std::vector<std::uint32_t> levels = {3, 0, 1, 2};
  levels.resize(32, 0u);
  const auto s = pack_latent(levels, 16);
  ASSERT_EQ(s.words.size(), 2u);
  EXPECT_EQ(s.words[0], 0b11000110u << 24);
  EXPECT_EQ(unpack_latent(s), levels);
}

TEST(Pack, MatchesStringOracle) {
  Rng rng(99);
  for (int n : {2, 4, 8, 16})
    for (int trial = 0; trial < 50; ++trial) {
      const auto count = static_cast<std::size_t>(rng.uniform_int(0, 300));
      const auto levels = random_levels(rng, count, n);
      const auto s = pack_latent(levels, n);
      EXPECT_EQ(s.words, pack_by_string(levels, n));
      EXPECT_EQ(s.num_complex_symbols, count / (2 * n));
      const auto back = unpack_latent(s);
      ASSERT_EQ(back.size(), count / (2 * n) * (2 * n));
      EXPECT_TRUE(std::equal(back.begin(), back.end(), levels.begin()));
    }
}

TEST(Pack, RejectsOversizedLevel) {
  std::vector<std::uint32_t> levels(8, 0u);
  levels[3] = 256;
  EXPECT_THROW(pack_latent(levels, 4), EncodingError);
}

TEST(Unpack, EmptyAndCorrupt) {
  EXPECT_TRUE(unpack_latent(pack_latent(std::vector<std::uint32_t>{}, 4)).empty());
  Rng rng(1);
  auto s = pack_latent(random_levels(rng, 64, 4), 4);
  auto bad = s;
  bad.n = 3;
  EXPECT_THROW(unpack_latent(bad), DecodingError);
  bad = s;
  bad.num_elements = 200;
  EXPECT_THROW(unpack_latent(bad), DecodingError);
  bad = s;
  bad.words.pop_back();
  EXPECT_THROW(unpack_latent(bad), DecodingError);
  bad = s;
  bad.bits_per_element = 4;
  EXPECT_THROW(unpack_latent(bad), DecodingError);
}

TEST(Unpack, SingleFlipChangesOneLevelByPowerOfTwo) {
  Rng rng(17);
  for (int n : {2, 4, 8, 16}) {
    const auto levels = random_levels(rng, 16 * n, n);
    const auto s = pack_latent(levels, n);
    for (int trial = 0; trial < 64; ++trial) {
      auto t = s;
      const auto bit = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(32 * t.words.size()) - 1));
      t.words[bit / 32] ^= 1u << (bit % 32);
      const auto got = unpack_latent(t);
      int changed = 0;
      for (std::size_t i = 0; i < got.size(); ++i)
        if (got[i] != levels[i]) {
          ++changed;
          EXPECT_TRUE(std::has_single_bit(got[i] ^ levels[i]));
        }
      EXPECT_EQ(changed, 1);
    }
  }
}

TEST(QamBer, MatchesMonteCarlo) {
  for (double db : {0.0, 5.0, 10.0, 14.0}) {
    const double snr = channel::db_to_linear(db);
    const double mc = monte_carlo_16qam_ber(snr, 250000, 1234 + static_cast<std::uint64_t>(db));
    EXPECT_NEAR(qam_bit_error_probability(snr, 16), mc, 0.05 * mc) << db << " dB";
  }
}

TEST(QamBer, CloseToNearestNeighbourApproximation) {
  // (3/8) erfc(sqrt(snr / 10)) at 10 dB, frozen at high precision.
  constexpr double kApprox10dB = 0.058987202643856924;
  EXPECT_NEAR(qam_bit_error_probability(10.0, 16), kApprox10dB, 0.02 * kApprox10dB);
}

TEST(QamBer, LimitsAndQpsk) {
  EXPECT_EQ(qam_bit_error_probability(std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_NEAR(qam_bit_error_probability(0.0), 0.5, 1e-12);
  const double snr = 3.0;
  EXPECT_NEAR(qam_bit_error_probability(snr, 4), 0.5 * std::erfc(std::sqrt(snr / 2.0)), 1e-15);
  EXPECT_THROW(qam_bit_error_probability(1.0, 8), ParameterError);
  EXPECT_THROW(qam_bit_error_probability(-1.0, 16), ParameterError);
}

TEST(SemanticTransmit, InfiniteSnrIsIdentity) {
  Rng rng(3);
  const auto s = pack_latent(random_levels(rng, 4096, 4), 4);
  const auto ch = channel::flat_channel(64, std::numeric_limits<double>::infinity());
  EXPECT_EQ(semantic_transmit(s, ch, 5), s);
}

TEST(SemanticTransmit, ZeroSnrFlipsHalf) {
  const std::vector<std::uint32_t> levels(31250 * 8, 0u);  // 10^6 bits at n=4
  const auto s = pack_latent(levels, 4);
  const auto ch = channel::flat_channel(64, -std::numeric_limits<double>::infinity());
  const auto out = semantic_transmit(s, ch, 8);
  const double rate = static_cast<double>(count_flips(s, out)) / (32.0 * static_cast<double>(s.words.size()));
  EXPECT_NEAR(rate, 0.5, 0.005);
}

TEST(SemanticTransmit, FlatTenDbMatchesBer) {
  Rng rng(4);
  const auto s = pack_latent(random_levels(rng, 31250 * 8, 4), 4);
  const auto ch = channel::flat_channel(64, 10.0);
  const auto out = semantic_transmit(s, ch, 9);
  const double rate = static_cast<double>(count_flips(s, out)) / (32.0 * static_cast<double>(s.words.size()));
  const double p = qam_bit_error_probability(10.0, 16);
  EXPECT_NEAR(rate, p, 0.05 * p);
  EXPECT_EQ(out.num_elements, s.num_elements);
  EXPECT_EQ(out.n, s.n);
  EXPECT_EQ(semantic_transmit(s, ch, 9), out);
}

TEST(SemanticTransmit, EmptyStreamRejected) {
  EXPECT_THROW(semantic_transmit(SymbolStream{}, channel::flat_channel(64, 10.0), 1), ParameterError);
}

TEST(Baseline, TableOneArithmetic) {
  const CodedLinkConfig link;
  EXPECT_EQ(coded_complex_symbols(24576, link), 98304u);
  channel::LinkAbstractionConfig abs;
  const auto r = baseline_transmit(24576, channel::flat_channel(64, 30.0), link, abs, 1);
  EXPECT_EQ(r.complex_symbols, 98304u);
  EXPECT_EQ(r.ofdm_frames, 1536u);
  EXPECT_TRUE(r.delivered);
  EXPECT_NEAR(r.esnr_db, 30.0, 1e-9);
}

TEST(Baseline, AllOrNothingExtremes) {
  const CodedLinkConfig link;
  channel::LinkAbstractionConfig abs;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_TRUE(baseline_transmit(5000, channel::flat_channel(64, 40.0), link, abs, seed).delivered);
    const auto lost = baseline_transmit(5000, channel::flat_channel(64, -20.0), link, abs, seed);
    EXPECT_FALSE(lost.delivered);
    EXPECT_EQ(lost.frame_errors, lost.ofdm_frames);
  }
}

TEST(Baseline, DeliveryRateMatchesBlerPower) {
  const CodedLinkConfig link;
  channel::LinkAbstractionConfig abs;
  const auto ch = channel::flat_channel(64, 5.5);
  const double p = channel::bler(channel::db_to_linear(5.5), abs);
  const std::size_t bytes = 64;  // 256 symbols -> 4 frames
  const double expected = std::pow(1.0 - p, 4.0);
  const int trials = 20000;
  int ok = 0;
  for (int s = 0; s < trials; ++s) ok += baseline_transmit(bytes, ch, link, abs, static_cast<std::uint64_t>(s)).delivered;
  const double sd = std::sqrt(expected * (1 - expected) / trials);
  EXPECT_NEAR(static_cast<double>(ok) / trials, expected, 3.0 * sd + 1e-9);
}

TEST(Text, EmptyStringCostsOneByte) {
  const CodedLinkConfig link;
  channel::LinkAbstractionConfig abs;
  const auto r = text_transmit("", channel::flat_channel(64, 20.0), link, abs, 1);
  EXPECT_EQ(r.payload_bytes, 1u);
  EXPECT_EQ(r.chain, Chain::text);
  EXPECT_EQ(text_transmit("TOTAL 12.50", channel::flat_channel(64, 20.0), link, abs, 1).payload_bytes, 11u);
}

TEST(SemanticRecord, Accounting) {
  Rng rng(2);
  const auto s = pack_latent(random_levels(rng, 540672, 4), 4);
  const auto r = semantic_record(s, channel::flat_channel(64, 10.0), 5.0);
  EXPECT_EQ(r.complex_symbols, 67584u);
  EXPECT_EQ(r.ofdm_frames, 1056u);
  EXPECT_EQ(r.payload_bytes, kLatentHeaderBytes + 2 * 67584 * 4);
  EXPECT_TRUE(r.delivered);
}

TEST(Csv, RowFormat) {
  TransmissionRecord r;
  r.chain = Chain::semantic;
  r.payload_bytes = 10;
  r.complex_symbols = 3;
  r.ofdm_frames = 1;
  r.esnr_db = 1.5;
  r.delivered = true;
  EXPECT_EQ(to_csv(r), "semantic,10,3,1,1.500000,1");
  EXPECT_EQ(csv_header(), "chain,payload_bytes,complex_symbols,ofdm_frames,esnr_db,delivered");
}
