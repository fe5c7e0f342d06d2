#ifndef SEMLINK_EDGE_TOOLS_HPP
#define SEMLINK_EDGE_TOOLS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "semlink/canny.hpp"
#include "semlink/error.hpp"
#include "semlink/image.hpp"
#include "semlink/random.hpp"

namespace semlink::tools {

enum class ToolId { ocr, canny, object, none };

inline std::string_view to_string(ToolId t) noexcept {
  switch (t) {
    case ToolId::ocr: return "ocr";
    case ToolId::canny: return "canny";
    case ToolId::object: return "object";
    case ToolId::none: return "none";
  }
  return "none";
}

inline ToolId tool_from_string(std::string_view s) {
  if (s == "ocr") return ToolId::ocr;
  if (s == "canny") return ToolId::canny;
  if (s == "object") return ToolId::object;
  if (s == "none") return ToolId::none;
  throw ToolError("unknown tool id '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Sharpness and blur filtering

/// Variance of the 4-neighbour Laplacian of the BT.601 luma, edge replicated.
inline double sharpness_score(const ImageBuffer& img) {
  const auto g = to_luma(img);
  const std::size_t count = static_cast<std::size_t>(g.h) * g.w;
  double sum = 0.0, sum_sq = 0.0;
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x) {
      const double lap = g.clamped(y - 1, x) + g.clamped(y + 1, x) + g.clamped(y, x - 1) +
                         g.clamped(y, x + 1) - 4.0 * g(y, x);
      sum += lap;
      sum_sq += lap * lap;
    }
  const double mean = sum / count;
  return std::max(0.0, sum_sq / count - mean * mean);
}

/// Drops the floor(fraction * N) lowest-scoring entries (lower index first on
/// ties) and returns the surviving indices in ascending order.
inline std::vector<std::size_t> filter_by_score(std::span<const double> scores, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ParameterError("blur filter fraction must lie in [0, 1)");
  const std::size_t n = scores.size();
  const auto removed = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(removed), order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline std::vector<std::size_t> filter_blurry(std::span<const ImageBuffer> corpus, double fraction = 0.10) {
  std::vector<double> scores;
  scores.reserve(corpus.size());
  for (const auto& img : corpus) scores.push_back(sharpness_score(img));
  return filter_by_score(scores, fraction);
}

// ---------------------------------------------------------------------------
// Probe downsampling

/// Bilinear resampling with pixel-centre alignment and edge clamping.
inline ImageBuffer resize_bilinear(const ImageBuffer& img, int out_h, int out_w) {
  ImageBuffer out(out_h, out_w);
  const double sy = static_cast<double>(img.height()) / out_h;
  const double sx = static_cast<double>(img.width()) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ty = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < ImageBuffer::kChannels; ++c) {
        const double top = img.at(y0, x0, c) * (1 - tx) + img.at(y0, x1, c) * tx;
        const double bot = img.at(y1, x0, c) * (1 - tx) + img.at(y1, x1, c) * tx;
        out.at(y, x, c) = top * (1 - ty) + bot * ty;
      }
    }
  }
  return out;
}

inline constexpr int kProbeSize = 256;

inline ImageBuffer downsample_probe(const ImageBuffer& img) {
  if (img.height() == kProbeSize && img.width() == kProbeSize) return img;
  return resize_bilinear(img, kProbeSize, kProbeSize);
}

// ---------------------------------------------------------------------------
// Document ROI

struct CannyRoiConfig {
  CannyConfig canny;
  /// Below this fraction of the frame the detected box is not trusted.
  double min_coverage = 0.05;
};

/// Bounding box of the edge component with the largest bounding-box area
/// (ties: more pixels, then raster order), or the full frame when that box
/// covers less than `min_coverage` of it.
inline PixelBox canny_roi_box(const ImageBuffer& img, const CannyRoiConfig& cfg = {}) {
  if (!(cfg.canny.low >= 0.0 && cfg.canny.low < cfg.canny.high))
    throw ParameterError("Canny thresholds must satisfy 0 <= low < high");
  const auto edges = canny(to_luma(img), cfg.canny);
  const auto comps = edge_components(edges);
  const EdgeComponent* best = nullptr;
  for (const auto& c : comps) {
    if (!best || c.bounds.area() > best->bounds.area() ||
        (c.bounds.area() == best->bounds.area() && c.pixels > best->pixels))
      best = &c;
  }
  const PixelBox frame = img.frame();
  if (!best || static_cast<double>(best->bounds.area()) < cfg.min_coverage * static_cast<double>(frame.area()))
    return frame;
  return best->bounds;
}

inline ImageBuffer canny_roi(const ImageBuffer& img, double low, double high) {
  CannyRoiConfig cfg;
  cfg.canny.low = low;
  cfg.canny.high = high;
  return crop(img, canny_roi_box(img, cfg));
}

// ---------------------------------------------------------------------------
// Object ROI

struct Detection {
  PixelBox box;
  double confidence = 0.0;
  std::string category;
  /// Free-form attribute (the corpus uses colour names).
  std::string attribute;
};

using DetectionSet = std::vector<Detection>;

inline void validate(const DetectionSet& set, const PixelBox& frame) {
  for (const auto& d : set) {
    if (d.box.empty() || !frame.contains(d.box)) throw ToolError("detection box outside the frame");
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) throw ToolError("detection confidence outside [0, 1]");
  }
}

/// Object detector behind which a real model can sit.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectionSet detect(const ImageBuffer& img, std::string_view image_id) const = 0;
};

/// Reference detector replaying corpus annotations.
class AnnotatedDetector final : public Detector {
 public:
  void add(std::string image_id, DetectionSet detections) { table_[std::move(image_id)] = std::move(detections); }

  DetectionSet detect(const ImageBuffer& img, std::string_view image_id) const override {
    const auto it = table_.find(std::string(image_id));
    if (it == table_.end()) throw ToolError("no detection annotation for image '" + std::string(image_id) + "'");
    validate(it->second, img.frame());
    return it->second;
  }

 private:
  std::map<std::string, DetectionSet, std::less<>> table_;
};

/// Optional narrowing of which detections the ROI must enclose.
struct ObjectFocus {
  std::vector<std::string> categories;
  std::vector<std::string> attributes;

  bool empty() const noexcept { return categories.empty() && attributes.empty(); }
  bool matches(const Detection& d) const {
    const bool cat_ok = categories.empty() || std::find(categories.begin(), categories.end(), d.category) != categories.end();
    const bool attr_ok = attributes.empty() || std::find(attributes.begin(), attributes.end(), d.attribute) != attributes.end();
    return cat_ok && attr_ok;
  }
};

struct ObjectRoiConfig {
  double conf_threshold = 0.30;
  double margin = 0.05;
};

/// Detections passing the confidence threshold and, if any of them match,
/// the focus. A focus that matches nothing is ignored.
inline DetectionSet surviving_detections(const DetectionSet& detections, const ObjectRoiConfig& cfg,
                                         const ObjectFocus& focus = {}) {
  DetectionSet kept;
  for (const auto& d : detections)
    if (d.confidence >= cfg.conf_threshold) kept.push_back(d);
  if (focus.empty()) return kept;
  DetectionSet focused;
  for (const auto& d : kept)
    if (focus.matches(d)) focused.push_back(d);
  return focused.empty() ? kept : focused;
}

/// Minimal enclosing rectangle of the surviving boxes, each side pushed out by
/// margin times the merged width/height, rounded to the nearest pixel and
/// clamped to the frame. Full frame when nothing survives.
inline PixelBox object_roi_box(const DetectionSet& detections, const PixelBox& frame,
                               const ObjectRoiConfig& cfg = {}, const ObjectFocus& focus = {}) {
  if (!(cfg.conf_threshold >= 0.0 && cfg.conf_threshold <= 1.0) || !(cfg.margin >= 0.0 && cfg.margin <= 1.0))
    throw ParameterError("object ROI thresholds must lie in [0, 1]");
  const auto kept = surviving_detections(detections, cfg, focus);
  if (kept.empty()) return frame;

  PixelBox merged = kept.front().box;
  for (const auto& d : kept) {
    merged.x0 = std::min(merged.x0, d.box.x0);
    merged.y0 = std::min(merged.y0, d.box.y0);
    merged.x1 = std::max(merged.x1, d.box.x1);
    merged.y1 = std::max(merged.y1, d.box.y1);
  }
  const double mx = cfg.margin * merged.width();
  const double my = cfg.margin * merged.height();
  PixelBox out{static_cast<int>(std::round(merged.x0 - mx)), static_cast<int>(std::round(merged.y0 - my)),
               static_cast<int>(std::round(merged.x1 + mx)), static_cast<int>(std::round(merged.y1 + my))};
  return out.intersect(frame);
}

inline ImageBuffer object_roi(const ImageBuffer& img, const Detector& det, std::string_view image_id,
                              const ObjectRoiConfig& cfg = {}, const ObjectFocus& focus = {}) {
  return crop(img, object_roi_box(det.detect(img, image_id), img.frame(), cfg, focus));
}

// ---------------------------------------------------------------------------
// OCR

class OcrEngine {
 public:
  virtual ~OcrEngine() = default;
  virtual std::string extract(const ImageBuffer& img, std::string_view image_id) const = 0;
};

/// Reference OCR: returns the annotated text with each character replaced
/// independently with probability corruption * (1 - sharpness / max_sharpness).
class AnnotatedOcrEngine final : public OcrEngine {
 public:
  AnnotatedOcrEngine(double max_sharpness, double corruption = 0.3, std::uint64_t seed = 0)
      : max_sharpness_(max_sharpness), corruption_(corruption), seed_(seed) {
    if (!(corruption >= 0.0 && corruption <= 1.0)) throw ParameterError("OCR corruption must lie in [0, 1]");
  }

  void add(std::string image_id, std::string text) { truth_[std::move(image_id)] = std::move(text); }

  double error_rate(const ImageBuffer& img) const {
    const double s = sharpness_score(img);
    const double normalized = max_sharpness_ > 0.0 ? std::clamp(s / max_sharpness_, 0.0, 1.0) : 0.0;
    return corruption_ * (1.0 - normalized);
  }

  std::string extract(const ImageBuffer& img, std::string_view image_id) const override {
    const auto it = truth_.find(std::string(image_id));
    if (it == truth_.end()) throw ToolError("no OCR annotation for image '" + std::string(image_id) + "'");
    return corrupt(it->second, error_rate(img), derive_seed({seed_, hash_string(image_id)}));
  }

  /// Misreads each ASCII character with probability `rate`; the substitute
  /// always differs from the original.
  static std::string corrupt(std::string_view text, double rate, std::uint64_t seed) {
    static constexpr char kDigitConfusion[] = "8774968134";  // 0->8, 1->7, 2->7, 3->4, ...
    static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
    Rng rng(seed);
    std::string out(text);
    for (auto& ch : out) {
      if (static_cast<unsigned char>(ch) >= 0x80) continue;
      if (!rng.bernoulli(rate)) continue;
      if (ch >= '0' && ch <= '9') {
        ch = kDigitConfusion[ch - '0'];
      } else {
        char repl;
        do {
          repl = kLetters[static_cast<std::size_t>(rng.uniform_int(0, 25))];
          if (ch >= 'A' && ch <= 'Z') repl = static_cast<char>(repl - 'a' + 'A');
        } while (repl == ch);
        ch = repl;
      }
    }
    return out;
  }

 private:
  std::map<std::string, std::string, std::less<>> truth_;
  double max_sharpness_;
  double corruption_;
  std::uint64_t seed_;
};

inline std::string ocr_extract(const ImageBuffer& img, const OcrEngine& engine, std::string_view image_id) {
  return engine.extract(img, image_id);
}

// ---------------------------------------------------------------------------
// Registry

/// Text for OCR, an image crop for the other tools.
using ToolOutput = std::variant<std::string, ImageBuffer>;

/// The glasses-side tool set g_pre and its per-tool configuration.
class ToolRegistry {
 public:
  std::shared_ptr<const OcrEngine> ocr;
  std::shared_ptr<const Detector> detector;
  CannyRoiConfig canny_cfg;
  ObjectRoiConfig object_cfg;

  bool has(ToolId id) const noexcept {
    switch (id) {
      case ToolId::ocr: return ocr != nullptr;
      case ToolId::object: return detector != nullptr;
      case ToolId::canny:
      case ToolId::none: return true;
    }
    return false;
  }

  /// Crop box the tool would transmit (the full frame for ocr/none).
  PixelBox roi(ToolId id, const ImageBuffer& img, std::string_view image_id, const ObjectFocus& focus = {}) const {
    switch (id) {
      case ToolId::canny: return canny_roi_box(img, canny_cfg);
      case ToolId::object:
        if (!detector) throw ToolError("object tool requested but no detector is registered");
        return object_roi_box(detector->detect(img, image_id), img.frame(), object_cfg, focus);
      case ToolId::ocr:
      case ToolId::none: return img.frame();
    }
    return img.frame();
  }

  ToolOutput apply(ToolId id, const ImageBuffer& img, std::string_view image_id, const ObjectFocus& focus = {}) const {
    if (id == ToolId::ocr) {
      if (!ocr) throw ToolError("ocr tool requested but no engine is registered");
      return ocr->extract(img, image_id);
    }
    if (id == ToolId::none) return img;
    return crop(img, roi(id, img, image_id, focus));
  }
};

}  // namespace semlink::tools

#endif  // SEMLINK_EDGE_TOOLS_HPP
