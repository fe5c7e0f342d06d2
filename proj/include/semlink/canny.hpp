#ifndef SEMLINK_CANNY_HPP
#define SEMLINK_CANNY_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "semlink/image.hpp"

namespace semlink::tools {

/// Binary edge map; 1 marks an edge pixel.
struct EdgeMap {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> v;

  std::uint8_t operator()(int y, int x) const noexcept { return v[static_cast<std::size_t>(y) * w + x]; }
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto e : v) n += e;
    return n;
  }
};

struct CannyConfig {
  double sigma = 1.4;
  /// Hysteresis thresholds on the Sobel magnitude of [0, 1] luma.
  double low = 0.5;
  double high = 1.2;
};

/// Canny edge detector: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression along the quantized gradient direction, double-threshold
/// hysteresis with 8-connectivity. Samples outside the frame read as 0, so a
/// bright region touching the border produces border edges.
inline EdgeMap canny(const GrayImage& gray, const CannyConfig& cfg) {
  const int h = gray.h, w = gray.w;
  const double zero = 0.0;
  const GrayImage smooth = gaussian_blur(gray, cfg.sigma, &zero);
  auto px = [&](int y, int x) { return (y < 0 || y >= h || x < 0 || x >= w) ? 0.0 : smooth(y, x); };

  GrayImage mag(h, w);
  std::vector<std::uint8_t> dir(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = (px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2 * px(y - 1, x) + px(y - 1, x + 1));
      mag(y, x) = std::hypot(gx, gy);
      double angle = std::atan2(gy, gx) * 180.0 / 3.14159265358979323846;
      if (angle < 0) angle += 180.0;
      std::uint8_t d;
      if (angle < 22.5 || angle >= 157.5) d = 0;       // horizontal gradient
      else if (angle < 67.5) d = 1;                    // 45 degrees
      else if (angle < 112.5) d = 2;                   // vertical gradient
      else d = 3;                                      // 135 degrees
      dir[static_cast<std::size_t>(y) * w + x] = d;
    }

  // Offsets of the neighbour along the gradient for each direction bin.
  static constexpr int kDx[4] = {1, 1, 0, -1};
  static constexpr int kDy[4] = {0, 1, 1, 1};
  auto m = [&](int y, int x) { return (y < 0 || y >= h || x < 0 || x >= w) ? 0.0 : mag(y, x); };

  // 0 = none, 1 = weak, 2 = strong
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(h) * w, 0);
  std::vector<int> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = mag(y, x);
      if (v < cfg.low) continue;
      const auto d = dir[static_cast<std::size_t>(y) * w + x];
      const double behind = m(y - kDy[d], x - kDx[d]);
      const double ahead = m(y + kDy[d], x + kDx[d]);
      if (!(v > behind && v >= ahead)) continue;
      const auto idx = static_cast<std::size_t>(y) * w + x;
      cls[idx] = v >= cfg.high ? 2 : 1;
      if (cls[idx] == 2) stack.push_back(static_cast<int>(idx));
    }

  EdgeMap edges{h, w, std::vector<std::uint8_t>(static_cast<std::size_t>(h) * w, 0)};
  for (int idx : stack) edges.v[idx] = 1;
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const int y = idx / w, x = idx % w;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int ny = y + dy, nx = x + dx;
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const auto n = static_cast<std::size_t>(ny) * w + nx;
        if (cls[n] == 1 && !edges.v[n]) {
          edges.v[n] = 1;
          stack.push_back(static_cast<int>(n));
        }
      }
  }
  return edges;
}

struct EdgeComponent {
  PixelBox bounds;
  std::size_t pixels = 0;
};

/// 8-connected components of an edge map, in raster order of their first pixel.
inline std::vector<EdgeComponent> edge_components(const EdgeMap& edges) {
  std::vector<EdgeComponent> out;
  std::vector<std::uint8_t> seen(edges.v.size(), 0);
  std::vector<int> stack;
  for (int y0 = 0; y0 < edges.h; ++y0)
    for (int x0 = 0; x0 < edges.w; ++x0) {
      const auto start = static_cast<std::size_t>(y0) * edges.w + x0;
      if (!edges.v[start] || seen[start]) continue;
      EdgeComponent comp{{x0, y0, x0 + 1, y0 + 1}, 0};
      seen[start] = 1;
      stack.push_back(static_cast<int>(start));
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int y = idx / edges.w, x = idx % edges.w;
        ++comp.pixels;
        comp.bounds.x0 = std::min(comp.bounds.x0, x);
        comp.bounds.y0 = std::min(comp.bounds.y0, y);
        comp.bounds.x1 = std::max(comp.bounds.x1, x + 1);
        comp.bounds.y1 = std::max(comp.bounds.y1, y + 1);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= edges.h || nx < 0 || nx >= edges.w) continue;
            const auto n = static_cast<std::size_t>(ny) * edges.w + nx;
            if (edges.v[n] && !seen[n]) {
              seen[n] = 1;
              stack.push_back(static_cast<int>(n));
            }
          }
      }
      out.push_back(comp);
    }
  return out;
}

}  // namespace semlink::tools

#endif  // SEMLINK_CANNY_HPP
