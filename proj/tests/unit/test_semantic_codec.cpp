#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "semlink/baseline_codec.hpp"
#include "semlink/metrics.hpp"
#include "semlink/semantic_codec.hpp"
#include "support/oracles.hpp"

using namespace semlink;
using namespace semlink::codec;

namespace {

LatentTensor random_latent(Rng& rng, int m, int lh, int lw) {
  LatentTensor y;
  y.m = m;
  y.lh = lh;
  y.lw = lw;
  y.orig_h = lh * 16;
  y.orig_w = lw * 16;
  y.data.resize(static_cast<std::size_t>(m) * lh * lw);
  const double scale = rng.uniform(0.1, 50.0), shift = rng.uniform(-10.0, 10.0);
  for (auto& v : y.data) v = shift + scale * rng.normal();
  return y;
}

ImageBuffer roundtrip(const ImageBuffer& img, int n) {
  const BlockDctTransform t;
  const auto q = quantize(encode(img, t), n);
  const auto s = phy::pack_latent(q.levels, n);
  const auto p = parse_payload(serialize_payload(header_of(q), s));
  return synthesize(dequantize(reassemble(p.header, p.stream)), t);
}

}  // namespace

TEST(Padding, Dims) {
  EXPECT_EQ(padded_dim(700), 704);
  EXPECT_EQ(padded_dim(1000), 1024);
  EXPECT_EQ(padded_dim(704), 704);
  EXPECT_EQ(padded_dim(1), 64);
  const auto p = pad_reflect(ImageBuffer(700, 1000, 0.3));
  EXPECT_EQ(p.image.height(), 704);
  EXPECT_EQ(p.image.width(), 1024);
  EXPECT_EQ(p.orig_h, 700);
  EXPECT_EQ(p.orig_w, 1000);
}

TEST(Padding, SinglePixelReplicates) {
  ImageBuffer one(1, 1);
  one.at(0, 0, 0) = 0.2;
  one.at(0, 0, 1) = 0.5;
  one.at(0, 0, 2) = 0.9;
  const auto p = pad_reflect(one);
  ASSERT_EQ(p.image.height(), 64);
  ASSERT_EQ(p.image.width(), 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(p.image.at(y, x, c), one.at(0, 0, c));
}

TEST(Padding, MatchesMirrorOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 150)), w = static_cast<int>(rng.uniform_int(1, 150));
    const auto img = oracle::random_image(rng, h, w);
    EXPECT_EQ(pad_reflect(img).image, oracle::mirror_pad64(img)) << h << "x" << w;
  }
}

TEST(LatentSize, Examples) {
  EXPECT_EQ(latent_size(704, 1024), 540672u);
  EXPECT_EQ(latent_size(700, 1000), 540672u);
  EXPECT_EQ(latent_size(64, 64), 3072u);
  EXPECT_THROW(latent_size(0, 5), ParameterError);
}

TEST(Analyze, WorkedExampleShape) {
  const auto y = encode(ImageBuffer(704, 1024, 0.5), BlockDctTransform());
  EXPECT_EQ(y.m, 192);
  EXPECT_EQ(y.lh, 44);
  EXPECT_EQ(y.lw, 64);
  EXPECT_EQ(y.size(), 540672u);
  const auto small = encode(ImageBuffer(64, 64, 0.5), BlockDctTransform());
  EXPECT_EQ(small.size(), 3072u);
}

TEST(Analyze, ConstantImageOnlyDc) {
  const double c = 0.37;
  const auto y = encode(ImageBuffer(64, 64, c), BlockDctTransform());
  for (int ch = 0; ch < y.m; ++ch)
    for (int i = 0; i < y.lh; ++i)
      for (int j = 0; j < y.lw; ++j) {
        const bool dc = ch % 64 == 0;
        EXPECT_NEAR(y.at(ch, i, j), dc ? 16.0 * c : 0.0, 1e-12);
      }
  // The brute-force oracle agrees on the DC gain.
  EXPECT_NEAR(oracle::dct16_coefficient(ImageBuffer(16, 16, c), 0, 0, 0, 0, 0), 16.0 * c, 1e-12);
}

TEST(Analyze, MatchesBruteForceCoefficients) {
  Rng rng(8);
  const auto img = oracle::random_image(rng, 64, 64);
  const auto y = encode(img, BlockDctTransform());
  const auto zz = oracle::zigzag_prefix(16, 64);
  for (int c = 0; c < 3; ++c)
    for (int by = 0; by < 4; by += 3)
      for (int bx = 0; bx < 4; bx += 2)
        for (int z = 0; z < 64; ++z) {
          const double ref = oracle::dct16_coefficient(img, by * 16, bx * 16, c, zz[z].first, zz[z].second);
          EXPECT_NEAR(y.at(c * 64 + z, by, bx), ref, 1e-10);
        }
}

TEST(Synthesize, ConstantIsExact) {
  for (double c : {0.0, 0.25, 1.0}) {
    const ImageBuffer img(37, 91, c);
    const BlockDctTransform t;
    const auto out = synthesize(encode(img, t), t);
    ASSERT_EQ(out.height(), 37);
    ASSERT_EQ(out.width(), 91);
    for (double v : out.data()) EXPECT_NEAR(v, c, 1e-12);
  }
}

TEST(Synthesize, ShapeMismatch) {
  const BlockDctTransform t;
  auto y = encode(ImageBuffer(64, 64, 0.5), t);
  EXPECT_THROW(synthesize(y, BlockDctTransform(32)), CodecError);
  y.orig_h = 200;
  EXPECT_THROW(synthesize(y, t), CodecError);
  y.orig_h = 64;
  y.data.pop_back();
  EXPECT_THROW(synthesize(y, t), CodecError);
}

TEST(Synthesize, FullCoefficientSetIsLossless) {
  Rng rng(12);
  const auto img = oracle::random_image(rng, 50, 70);
  const BlockDctTransform t(256);
  const auto out = synthesize(encode(img, t), t);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-10);
}

TEST(Quantize, ErrorWithinHalfStep) {
  Rng rng(31);
  for (int n : {2, 4, 8, 16})
    for (int trial = 0; trial < 20; ++trial) {
      const auto y = random_latent(rng, 12, 3, 5);
      const auto q = quantize(y, n);
      EXPECT_EQ(q.bits, 32 / n);
      const auto yh = dequantize(q);
      const double half = q.step() / 2.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_LE(std::abs(y.data[i] - yh.data[i]), half * (1 + 1e-12));
        EXPECT_LE(q.levels[i], q.max_level());
      }
    }
}

TEST(Quantize, OnGridIsIdempotent) {
  Rng rng(32);
  for (int n : {2, 4, 8, 16}) {
    const auto y = random_latent(rng, 8, 2, 4);
    const auto q1 = quantize(y, n);
    const auto q2 = quantize(dequantize(q1), n);
    EXPECT_EQ(q1.levels, q2.levels);
    EXPECT_EQ(dequantize(q2).data, dequantize(q1).data);
  }
}

TEST(Quantize, Degenerate) {
  LatentTensor y;
  y.m = 2;
  y.lh = 1;
  y.lw = 2;
  y.data = {3.5, 3.5, 3.5, 3.5};
  const auto q = quantize(y, 4);
  for (auto l : q.levels) EXPECT_EQ(l, 0u);
  for (double v : dequantize(q).data) EXPECT_EQ(v, 3.5);

  y.data = {1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), 0.0};
  EXPECT_THROW(quantize(y, 4), CodecError);
  y.data = {1.0, 2.0, 0.0, 0.0};
  EXPECT_THROW(quantize(y, 5), ParameterError);
}

TEST(Dequantize, Extremes) {
  QuantizedLatent q;
  q.n = 8;
  q.bits = 4;
  q.y_min = -2.0;
  q.y_max = 7.0;
  q.levels.assign(10, 0u);
  for (double v : dequantize(q).data) EXPECT_EQ(v, -2.0);
  q.levels.assign(10, 15u);
  for (double v : dequantize(q).data) EXPECT_EQ(v, 7.0);
}

TEST(Wire, HeaderIs32BytesAndRoundTrips) {
  Rng rng(40);
  const auto y = random_latent(rng, 192, 2, 3);
  const auto q = quantize(y, 8);
  const auto s = phy::pack_latent(q.levels, 8);
  const auto bytes = serialize_payload(header_of(q), s);
  EXPECT_EQ(bytes.size(), phy::kLatentHeaderBytes + 4 * s.words.size());
  const auto p = parse_payload(bytes);
  EXPECT_EQ(p.stream, s);
  EXPECT_EQ(reassemble(p.header, p.stream), q);
}

TEST(Wire, RejectsCorruption) {
  Rng rng(41);
  const auto q = quantize(random_latent(rng, 16, 2, 2), 4);
  auto bytes = serialize_payload(header_of(q), phy::pack_latent(q.levels, 4));
  auto bad = bytes;
  bad[0] ^= 0xFF;
  EXPECT_THROW(parse_payload(bad), DecodingError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(parse_payload(bad), DecodingError);
  bad = bytes;
  bad[6] = 3;  // n
  EXPECT_THROW(parse_payload(bad), DecodingError);
  EXPECT_THROW(parse_payload(std::vector<std::uint8_t>{1, 2}), DecodingError);
}

TEST(Reassemble, DroppedTailComesBackAsZero) {
  QuantizedLatent q;
  q.n = 4;
  q.bits = 8;
  q.m = 1;
  q.lh = 1;
  q.lw = 13;  // 13 levels, only 8 fit whole symbols
  q.y_max = 1.0;
  q.levels.assign(13, 200u);
  const auto s = phy::pack_latent(q.levels, 4);
  const auto back = reassemble(header_of(q), s);
  ASSERT_EQ(back.levels.size(), 13u);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(back.levels[i], 200u);
  for (int i = 8; i < 13; ++i) EXPECT_EQ(back.levels[i], 0u);
}

TEST(EndToEnd, ParsevalBound) {
  Rng rng(50);
  for (int trial = 0; trial < 6; ++trial) {
    const int h = static_cast<int>(rng.uniform_int(1, 120)), w = static_cast<int>(rng.uniform_int(1, 120));
    const auto img = oracle::random_image(rng, h, w);
    const double trunc = oracle::truncation_energy(img);
    for (int n : {2, 4, 8, 16}) {
      const BlockDctTransform t;
      const auto y = encode(img, t);
      const auto q = quantize(y, n);
      const double half = q.step() / 2.0;
      const double bound = trunc + static_cast<double>(y.size()) * half * half;
      const double err = oracle::squared_error(img, roundtrip(img, n));
      EXPECT_LE(err, bound * (1 + 1e-6) + 1e-12) << h << "x" << w << " n=" << n;
    }
  }
}

TEST(EndToEnd, FinerQuantizationIsBetter) {
  Rng rng(51);
  const auto img = oracle::random_image(rng, 96, 128);
  EXPECT_GT(metrics::psnr(img, roundtrip(img, 2)), metrics::psnr(img, roundtrip(img, 16)));
}

TEST(BaselineCodec, RoundTripQuality) {
  Rng rng(60);
  const auto img = oracle::random_image(rng, 61, 83);
  const auto enc = baseline::encode(img, 75);
  const auto dec = baseline::decode(enc.bytes);
  ASSERT_EQ(dec.height(), 61);
  ASSERT_EQ(dec.width(), 83);
  EXPECT_TRUE(dec.in_unit_range());
  EXPECT_GT(metrics::psnr(img, dec), 22.0);
  EXPECT_LT(baseline::encode(img, 20).bytes.size(), enc.bytes.size());
  EXPECT_EQ(baseline::encode(img, 75).bytes, enc.bytes);
}

TEST(BaselineCodec, RejectsGarbage) {
  EXPECT_THROW(baseline::decode(std::vector<std::uint8_t>{1, 2, 3}), DecodingError);
  auto enc = baseline::encode(ImageBuffer(16, 16, 0.5)).bytes;
  enc[0] ^= 1;
  EXPECT_THROW(baseline::decode(enc), DecodingError);
  EXPECT_THROW(baseline::encode(ImageBuffer(8, 8), 0), ParameterError);
}
