#ifndef SEMLINK_DCT_HPP
#define SEMLINK_DCT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

namespace semlink::dct {

/// Orthonormal type-II DCT matrix: basis[u][x] = a(u) cos((2x + 1) u pi / 2N).
template <int N>
const std::array<std::array<double, N>, N>& basis() {
  static const auto table = [] {
    std::array<std::array<double, N>, N> b{};
    for (int u = 0; u < N; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
      for (int x = 0; x < N; ++x) b[u][x] = a * std::cos((2 * x + 1) * u * std::numbers::pi / (2.0 * N));
    }
    return b;
  }();
  return table;
}

template <int N>
using Block = std::array<std::array<double, N>, N>;

/// Forward 2-D transform of one N x N block (rows are y, columns are x).
template <int N>
Block<N> forward(const Block<N>& in) {
  const auto& c = basis<N>();
  Block<N> tmp{}, out{};
  for (int y = 0; y < N; ++y)
    for (int v = 0; v < N; ++v) {
      double s = 0.0;
      for (int x = 0; x < N; ++x) s += c[v][x] * in[y][x];
      tmp[y][v] = s;
    }
  for (int u = 0; u < N; ++u)
    for (int v = 0; v < N; ++v) {
      double s = 0.0;
      for (int y = 0; y < N; ++y) s += c[u][y] * tmp[y][v];
      out[u][v] = s;
    }
  return out;
}

template <int N>
Block<N> inverse(const Block<N>& coef) {
  const auto& c = basis<N>();
  Block<N> tmp{}, out{};
  for (int u = 0; u < N; ++u)
    for (int x = 0; x < N; ++x) {
      double s = 0.0;
      for (int v = 0; v < N; ++v) s += c[v][x] * coef[u][v];
      tmp[u][x] = s;
    }
  for (int y = 0; y < N; ++y)
    for (int x = 0; x < N; ++x) {
      double s = 0.0;
      for (int u = 0; u < N; ++u) s += c[u][y] * tmp[u][x];
      out[y][x] = s;
    }
  return out;
}

/// JPEG-style zigzag scan generalised to N x N: (row, col) of each scan index.
template <int N>
const std::array<std::pair<int, int>, N * N>& zigzag() {
  static const auto table = [] {
    std::array<std::pair<int, int>, N * N> z{};
    int idx = 0;
    for (int s = 0; s <= 2 * (N - 1); ++s) {
      if (s % 2 == 0) {
        for (int row = std::min(s, N - 1); row >= 0 && s - row < N; --row) z[idx++] = {row, s - row};
      } else {
        for (int row = std::max(0, s - N + 1); row <= s && row < N; ++row) z[idx++] = {row, s - row};
      }
    }
    return z;
  }();
  return table;
}

}  // namespace semlink::dct

#endif  // SEMLINK_DCT_HPP
