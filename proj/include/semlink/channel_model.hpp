#ifndef SEMLINK_CHANNEL_MODEL_HPP
#define SEMLINK_CHANNEL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "semlink/error.hpp"
#include "semlink/random.hpp"

namespace semlink::channel {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) {
  if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(lin);
}

/// One block-fading OFDM channel: per-subcarrier complex gains and the
/// per-subcarrier SNRs they induce at the given transmit SNR.
struct ChannelRealization {
  std::vector<std::complex<double>> gains;
  double tx_snr_db = 0.0;
  std::vector<double> snrs_linear;
  std::uint64_t seed = 0;

  std::size_t subcarriers() const noexcept { return gains.size(); }
};

/// EESM parameter and the erfc-shaped BLER curve.
struct LinkAbstractionConfig {
  double beta = 5.0;
  double bler_threshold_db = 4.0;
  double bler_slope_db = 1.0;

  void validate() const {
    if (!(beta > 0.0)) throw ParameterError("EESM beta must be positive");
    if (!(bler_slope_db > 0.0)) throw ParameterError("BLER slope must be positive");
  }
};

namespace detail {

inline ChannelRealization from_gains(std::vector<std::complex<double>> gains, double tx_snr_db,
                                     std::uint64_t seed) {
  ChannelRealization ch;
  ch.tx_snr_db = tx_snr_db;
  ch.seed = seed;
  const double snr = db_to_linear(tx_snr_db);
  ch.snrs_linear.reserve(gains.size());
  for (const auto& g : gains) ch.snrs_linear.push_back(std::norm(g) * snr);
  ch.gains = std::move(gains);
  return ch;
}

}  // namespace detail

/// Frequency response on K subcarriers of `num_taps` i.i.d. CN(0, 1/num_taps)
/// taps, so that E|H_k|^2 = 1. Deterministic in `seed`.
inline ChannelRealization sample_channel(std::uint64_t seed, int k, int num_taps, double tx_snr_db) {
  if (k < 1) throw ParameterError("subcarrier count K must be >= 1");
  if (num_taps < 1 || num_taps > k) throw ParameterError("num_taps must lie in [1, K]");

  Rng rng(seed);
  const double tap_sigma = std::sqrt(0.5 / num_taps);
  std::vector<std::complex<double>> taps(num_taps);
  for (auto& t : taps) {
    const double re = rng.normal() * tap_sigma;
    const double im = rng.normal() * tap_sigma;
    t = {re, im};
  }

  std::vector<std::complex<double>> gains(k);
  for (int bin = 0; bin < k; ++bin) {
    std::complex<double> acc{0.0, 0.0};
    for (int l = 0; l < num_taps; ++l) {
      const double phase = -2.0 * std::numbers::pi * bin * l / k;
      acc += taps[l] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    gains[bin] = acc;
  }
  return detail::from_gains(std::move(gains), tx_snr_db, seed);
}

/// Unit-gain channel (AWGN): every subcarrier sees exactly the transmit SNR.
inline ChannelRealization flat_channel(int k, double tx_snr_db) {
  if (k < 1) throw ParameterError("subcarrier count K must be >= 1");
  return detail::from_gains(std::vector<std::complex<double>>(k, {1.0, 0.0}), tx_snr_db, 0);
}

/// Exponential effective SNR mapping, evaluated as
/// m - beta * ln(mean(exp(-(snr_k - m) / beta))) with m = min(snr) so that
/// large SNRs cannot underflow the mean to zero.
inline double eesm(std::span<const double> snrs_linear, double beta) {
  if (snrs_linear.empty()) throw ParameterError("eesm needs at least one SNR");
  if (!(beta > 0.0)) throw ParameterError("EESM beta must be positive");
  const auto [lo_it, hi_it] = std::minmax_element(snrs_linear.begin(), snrs_linear.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo < 0.0) throw ParameterError("SNRs must be non-negative");
  if (lo == hi) return lo;

  double sum = 0.0;
  for (double s : snrs_linear) sum += std::exp(-(s - lo) / beta);
  const double mean = sum / static_cast<double>(snrs_linear.size());
  return std::clamp(lo - beta * std::log(mean), lo, hi);
}

inline double eesm(const ChannelRealization& ch, double beta) { return eesm(ch.snrs_linear, beta); }

/// Block error probability 0.5 * erfc((esnr_dB - threshold) / slope).
inline double bler(double esnr_linear, const LinkAbstractionConfig& cfg) {
  if (esnr_linear <= 0.0) return 1.0;
  if (std::isinf(esnr_linear)) return 0.0;
  const double z = (linear_to_db(esnr_linear) - cfg.bler_threshold_db) / cfg.bler_slope_db;
  return std::clamp(0.5 * std::erfc(z), 0.0, 1.0);
}

}  // namespace semlink::channel

#endif  // SEMLINK_CHANNEL_MODEL_HPP
