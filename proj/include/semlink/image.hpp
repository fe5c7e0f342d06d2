#ifndef SEMLINK_IMAGE_HPP
#define SEMLINK_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "semlink/error.hpp"

namespace semlink {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  long area() const noexcept { return static_cast<long>(width()) * height(); }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }

  bool contains(const PixelBox& other) const noexcept {
    return other.x0 >= x0 && other.y0 >= y0 && other.x1 <= x1 && other.y1 <= y1;
  }

  PixelBox intersect(const PixelBox& other) const noexcept {
    return {std::max(x0, other.x0), std::max(y0, other.y0), std::min(x1, other.x1),
            std::min(y1, other.y1)};
  }

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// H x W x 3 raster with interleaved RGB samples in [0, 1], row-major.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;

  ImageBuffer(int h, int w, double fill = 0.0) : h_(h), w_(w) {
    if (h < 1 || w < 1) throw ParameterError("image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(h) * w * kChannels, fill);
  }

  ImageBuffer(int h, int w, std::vector<double> data) : h_(h), w_(w), data_(std::move(data)) {
    if (h < 1 || w < 1) throw ParameterError("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(h) * w * kChannels)
      throw ParameterError("image data size does not match dimensions");
  }

  int height() const noexcept { return h_; }
  int width() const noexcept { return w_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  PixelBox frame() const noexcept { return {0, 0, w_, h_}; }

  double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// True when every sample lies in [0, 1].
  bool in_unit_range() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
  }

  void clamp_unit() noexcept {
    for (auto& v : data_) v = std::clamp(v, 0.0, 1.0);
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * w_ + x) * kChannels + c;
  }

  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

/// Single-channel raster used by the edge and sharpness tools.
struct GrayImage {
  int h = 0;
  int w = 0;
  std::vector<double> v;

  GrayImage() = default;
  GrayImage(int h_, int w_, double fill = 0.0)
      : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, fill) {}

  double& operator()(int y, int x) noexcept { return v[static_cast<std::size_t>(y) * w + x]; }
  double operator()(int y, int x) const noexcept { return v[static_cast<std::size_t>(y) * w + x]; }

  /// Sample with edge replication.
  double clamped(int y, int x) const noexcept {
    return (*this)(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
  }
};

/// ITU-R BT.601 luma.
inline GrayImage to_luma(const ImageBuffer& img) {
  GrayImage g(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      g(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
  return g;
}

/// Copies the pixels inside `box` (which must lie within the frame).
inline ImageBuffer crop(const ImageBuffer& img, const PixelBox& box) {
  if (box.empty() || !img.frame().contains(box)) throw ParameterError("crop box outside frame");
  ImageBuffer out(box.height(), box.width());
  for (int y = 0; y < box.height(); ++y)
    for (int x = 0; x < box.width(); ++x)
      for (int c = 0; c < ImageBuffer::kChannels; ++c)
        out.at(y, x, c) = img.at(box.y0 + y, box.x0 + x, c);
  return out;
}

/// Normalized 1-D Gaussian taps with radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& t : k) t /= sum;
  return k;
}

/// Separable Gaussian blur. Out-of-frame samples take `border` when given,
/// otherwise the nearest edge sample.
inline GrayImage gaussian_blur(const GrayImage& src, double sigma, const double* border = nullptr) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  auto sample = [&](const GrayImage& g, int y, int x) {
    if (border && (y < 0 || y >= g.h || x < 0 || x >= g.w)) return *border;
    return g.clamped(y, x);
  };
  GrayImage tmp(src.h, src.w), out(src.h, src.w);
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * sample(src, y, x + i);
      tmp(y, x) = s;
    }
  for (int y = 0; y < src.h; ++y)
    for (int x = 0; x < src.w; ++x) {
      double s = 0.0;
      for (int i = -r; i <= r; ++i) s += k[i + r] * sample(tmp, y + i, x);
      out(y, x) = s;
    }
  return out;
}

/// Per-channel Gaussian blur of a colour image with edge replication.
inline ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  ImageBuffer out(img.height(), img.width());
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    GrayImage g(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) g(y, x) = img.at(y, x, c);
    const auto b = gaussian_blur(g, sigma);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(y, x, c) = b(y, x);
  }
  return out;
}

}  // namespace semlink

#endif  // SEMLINK_IMAGE_HPP
