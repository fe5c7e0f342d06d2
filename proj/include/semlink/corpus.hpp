#ifndef SEMLINK_CORPUS_HPP
#define SEMLINK_CORPUS_HPP

// Synthetic desk-scale corpus: receipts, documents with a chart, and object
// scenes, each with a sidecar annotation record.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semlink/edge_tools.hpp"
#include "semlink/error.hpp"
#include "semlink/image.hpp"
#include "semlink/random.hpp"

namespace semlink::corpus {

enum class Kind { receipt, document, scene };

inline std::string_view to_string(Kind k) noexcept {
  switch (k) {
    case Kind::receipt: return "receipt";
    case Kind::document: return "document";
    case Kind::scene: return "scene";
  }
  return "unknown";
}

inline Kind kind_from_string(std::string_view s) {
  if (s == "receipt" || s == "text") return Kind::receipt;
  if (s == "document") return Kind::document;
  if (s == "scene") return Kind::scene;
  throw ConfigError("unknown corpus kind '" + std::string(s) + "'");
}

struct QaPair {
  std::string question;
  std::vector<std::string> answers;
  /// Where the answer is printed, in canvas pixels.
  std::optional<PixelBox> region;
};

struct Annotation {
  std::string id;
  Kind kind = Kind::receipt;
  std::string text;
  /// Detector output for the image; may include low-confidence clutter.
  tools::DetectionSet boxes;
  /// Ground-truth object categories (scenes).
  std::vector<std::string> categories;
  std::vector<QaPair> qa_pairs;
};

struct Item {
  ImageBuffer image;
  Annotation annotation;
};

struct Spec {
  Kind kind = Kind::receipt;
  int count = 1;
  std::uint64_t seed = 1;
  /// Content size before background padding; 0 picks the kind's default.
  int content_w = 0;
  int content_h = 0;
  double padding = 0.30;
  double noise_min = 0.01;
  double noise_max = 0.02;
  double lighting_jitter = 0.10;
  /// Fraction of receipts captured out of focus.
  double blurred_fraction = 0.10;

  void validate() const {
    if (count < 1) throw ConfigError("corpus count must be at least 1");
    if (content_w < 0 || content_h < 0) throw ConfigError("corpus content dims must be non-negative");
    if (!(padding >= 0.0 && padding <= 4.0)) throw ConfigError("corpus padding fraction must lie in [0, 4]");
    if (!(noise_min >= 0.0 && noise_min <= noise_max)) throw ConfigError("corpus noise range is invalid");
    if (!(lighting_jitter >= 0.0 && lighting_jitter < 1.0)) throw ConfigError("lighting jitter must lie in [0, 1)");
    if (!(blurred_fraction >= 0.0 && blurred_fraction <= 1.0)) throw ConfigError("blurred fraction must lie in [0, 1]");
  }

  int width() const { return content_w > 0 ? content_w : (kind == Kind::receipt ? 320 : 640); }
  int height() const { return content_h > 0 ? content_h : 480; }
};

/// Canvas size after padding, rounded to even.
inline int padded_extent(int content, double fraction) {
  return 2 * static_cast<int>(std::lround(content * (1.0 + fraction) / 2.0));
}

using Rgb = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Drawing

namespace draw {

inline void fill_rect(ImageBuffer& img, PixelBox box, const Rgb& c) {
  box = box.intersect(img.frame());
  for (int y = box.y0; y < box.y1; ++y)
    for (int x = box.x0; x < box.x1; ++x)
      for (int k = 0; k < 3; ++k) img.at(y, x, k) = c[k];
}

inline void outline(ImageBuffer& img, const PixelBox& box, int t, const Rgb& c) {
  fill_rect(img, {box.x0, box.y0, box.x1, box.y0 + t}, c);
  fill_rect(img, {box.x0, box.y1 - t, box.x1, box.y1}, c);
  fill_rect(img, {box.x0, box.y0, box.x0 + t, box.y1}, c);
  fill_rect(img, {box.x1 - t, box.y0, box.x1, box.y1}, c);
}

/// Ellipse inscribed in `box`.
inline void fill_ellipse(ImageBuffer& img, const PixelBox& box, const Rgb& c) {
  const double cx = 0.5 * (box.x0 + box.x1), cy = 0.5 * (box.y0 + box.y1);
  const double rx = 0.5 * box.width(), ry = 0.5 * box.height();
  const PixelBox clip = box.intersect(img.frame());
  for (int y = clip.y0; y < clip.y1; ++y)
    for (int x = clip.x0; x < clip.x1; ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0)
        for (int k = 0; k < 3; ++k) img.at(y, x, k) = c[k];
    }
}

/// 5x7 glyph bitmap derived from the character code. Not a real font: the
/// reference OCR reads annotations, so glyphs only need text-like statistics.
inline std::uint64_t glyph_bits(char ch) {
  if (ch == ' ') return 0;
  std::uint64_t bits = mix64(0x9E3779B97F4A7C15ULL ^ static_cast<unsigned char>(ch)) & ((1ULL << 35) - 1);
  bits |= 1ULL << 17;  // keep the centre cell so no glyph is blank
  return bits;
}

inline int text_width(std::string_view text, int scale) { return static_cast<int>(text.size()) * 6 * scale; }

/// Draws `text` with its top-left at (x, y); returns the covered box.
inline PixelBox text(ImageBuffer& img, int x, int y, std::string_view s, int scale, const Rgb& c) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto bits = glyph_bits(s[i]);
    const int gx = x + static_cast<int>(i) * 6 * scale;
    for (int r = 0; r < 7; ++r)
      for (int col = 0; col < 5; ++col)
        if (bits >> (r * 5 + col) & 1ULL)
          fill_rect(img, {gx + col * scale, y + r * scale, gx + (col + 1) * scale, y + (r + 1) * scale}, c);
  }
  return PixelBox{x, y, x + text_width(s, scale), y + 7 * scale}.intersect(img.frame());
}

}  // namespace draw

// ---------------------------------------------------------------------------
// Content generators (content-local coordinates)

namespace detail {

inline std::string money(long cents) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld.%02ld", cents / 100, cents % 100);
  return buf;
}

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> w = {
      "COFFEE", "BAGEL",  "MILK",   "BREAD",  "APPLES", "RICE",   "SOAP",    "PASTA",  "TEA",
      "JUICE",  "EGGS",   "BUTTER", "CHEESE", "SUGAR",  "SALT",   "FLOUR",   "BEANS",  "SOUP",
      "REPORT", "BUDGET", "REGION", "SALES",  "TOTAL",  "UNITS",  "QUARTER", "REVIEW", "PLAN",
      "NOTES",  "STATUS", "TARGET", "MARGIN", "GROWTH", "OFFICE", "SUPPLY",  "LEDGER", "AUDIT"};
  return w;
}

inline const std::string& pick(Rng& rng, const std::vector<std::string>& v) {
  return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(v.size()) - 1))];
}

struct Content {
  ImageBuffer image;
  Annotation annotation;  // boxes and regions in content coordinates
};

inline Content receipt(Rng& rng, int w, int h) {
  Content out{ImageBuffer(h, w), {}};
  const double sheet = rng.uniform(0.88, 0.97);
  draw::fill_rect(out.image, {0, 0, w, h}, {sheet, sheet, sheet * 0.97});
  const Rgb ink{0.08, 0.08, 0.1};
  const int scale = 2;
  const int line_h = 7 * scale + 8;
  const int x0 = 12;
  int y = 14;
  std::vector<std::string> lines;
  auto put = [&](const std::string& s) {
    const auto box = draw::text(out.image, x0, y, s, scale, ink);
    lines.push_back(s);
    y += line_h;
    return box;
  };

  static const std::vector<std::string> shops = {"CORNER MART", "DAILY FOODS", "CITY GROCER", "FRESH STOP"};
  put(pick(rng, shops));
  char date[32];
  const long month = rng.uniform_int(1, 12), day = rng.uniform_int(1, 28);
  const long hour = rng.uniform_int(7, 21), minute = rng.uniform_int(0, 59);
  std::snprintf(date, sizeof date, "2024-%02ld-%02ld %02ld:%02ld", month, day, hour, minute);
  put(date);
  y += line_h / 2;

  const int cols = (w - 2 * x0) / (6 * scale);
  const int max_items = std::max(1, (h - y - 3 * line_h) / line_h);
  const int items = static_cast<int>(std::min<long>(max_items, rng.uniform_int(5, 9)));
  long total = 0;
  for (int i = 0; i < items; ++i) {
    const long cents = rng.uniform_int(99, 2499);
    total += cents;
    std::string name = pick(rng, words());
    const std::string price = money(cents);
    const int gap = std::max(1, cols - static_cast<int>(name.size() + price.size()));
    put(name + std::string(static_cast<std::size_t>(gap), ' ') + price);
  }
  y += line_h / 2;
  const std::string amount = money(total);
  const int gap = std::max(1, cols - 5 - static_cast<int>(amount.size()));
  const auto box = put("TOTAL" + std::string(static_cast<std::size_t>(gap), ' ') + amount);

  auto& a = out.annotation;
  a.kind = Kind::receipt;
  for (std::size_t i = 0; i < lines.size(); ++i) a.text += (i ? "\n" : "") + lines[i];
  a.qa_pairs.push_back({"What is the total amount?", {amount}, box});
  return out;
}

inline Content document(Rng& rng, int w, int h) {
  Content out{ImageBuffer(h, w), {}};
  const double sheet = rng.uniform(0.9, 0.98);
  draw::fill_rect(out.image, {0, 0, w, h}, {sheet, sheet, sheet});
  const Rgb ink{0.06, 0.06, 0.08};
  draw::outline(out.image, {4, 4, w - 4, h - 4}, 2, ink);

  auto& a = out.annotation;
  a.kind = Kind::document;
  std::vector<std::string> lines;
  const int scale = 2;
  const int line_h = 7 * scale + 8;
  const int x0 = 20;
  int y = 20;

  char title[64];
  const long ref = rng.uniform_int(10000, 99999);
  const std::string w1 = pick(rng, words()), w2 = pick(rng, words());
  std::snprintf(title, sizeof title, "%s %s NO %ld", w1.c_str(), w2.c_str(), ref);
  const auto title_box = draw::text(out.image, x0, y, title, 3, ink);
  lines.push_back(title);
  y += 7 * 3 + 14;

  // Body text occupies the left part; the chart sits bottom right.
  const int chart_w = std::min(w / 2, 280), chart_h = std::min(h / 2, 170);
  const PixelBox chart{w - chart_w - 20, h - chart_h - 20, w - 20, h - 20};
  const int body_cols = std::max(4, (w - 2 * x0) / (6 * scale));
  while (y + line_h < h - 20) {
    const bool beside_chart = y + 7 * scale >= chart.y0 - 6;
    const int cols = beside_chart ? std::max(4, (chart.x0 - x0 - 12) / (6 * scale)) : body_cols;
    std::string line;
    while (true) {
      std::string word = rng.bernoulli(0.2) ? std::to_string(rng.uniform_int(1, 999)) : pick(rng, words());
      if (static_cast<int>(line.size() + word.size() + 1) > cols) break;
      line += (line.empty() ? "" : " ") + word;
    }
    draw::text(out.image, x0, y, line, scale, ink);
    lines.push_back(line);
    y += line_h;
  }

  // Bar chart with value labels.
  draw::outline(out.image, chart, 1, ink);
  const int bars = static_cast<int>(rng.uniform_int(4, 6));
  const int slot = (chart.width() - 20) / bars;
  static const Rgb palette[] = {{0.2, 0.4, 0.8}, {0.85, 0.35, 0.2}, {0.25, 0.65, 0.3}, {0.8, 0.7, 0.15}};
  std::vector<std::pair<std::string, PixelBox>> labelled;
  for (int b = 0; b < bars; ++b) {
    const long value = rng.uniform_int(10, 99);
    const int bh = static_cast<int>((chart.height() - 50) * value / 100.0);
    const int bx0 = chart.x0 + 10 + b * slot + slot / 6, bx1 = chart.x0 + 10 + (b + 1) * slot - slot / 6;
    const int base = chart.y1 - 22;
    draw::fill_rect(out.image, {bx0, base - bh, bx1, base}, palette[b % 4]);
    const std::string v = std::to_string(value);
    const auto vbox = draw::text(out.image, bx0, base - bh - 12, v, 1, ink);
    const std::string name(1, static_cast<char>('A' + b));
    draw::text(out.image, bx0, base + 6, name, 1, ink);
    lines.push_back(name + " " + v);
    labelled.push_back({v, PixelBox{bx0, vbox.y0, bx1, base + 13}});
  }

  for (std::size_t i = 0; i < lines.size(); ++i) a.text += (i ? "\n" : "") + lines[i];
  if (rng.bernoulli(0.5)) {
    a.qa_pairs.push_back({"What is the reference number?", {std::to_string(ref)}, title_box});
  } else {
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, bars - 1));
    const std::string q = std::string("What is the value of bar ") + static_cast<char>('A' + b) + "?";
    a.qa_pairs.push_back({q, {labelled[b].first}, labelled[b].second});
  }
  return out;
}

struct ColourName {
  const char* name;
  Rgb rgb;
};

inline const std::vector<ColourName>& colours() {
  static const std::vector<ColourName> c = {{"black", {0.05, 0.05, 0.06}}, {"white", {0.95, 0.95, 0.95}},
                                            {"red", {0.8, 0.1, 0.1}},      {"green", {0.15, 0.6, 0.2}},
                                            {"blue", {0.15, 0.3, 0.85}},   {"yellow", {0.9, 0.8, 0.1}}};
  return c;
}

/// Draws one object of `category` at (x, y) and returns its box.
inline PixelBox scene_object(ImageBuffer& img, std::string_view category, int x, int y, const Rgb& c, double s) {
  auto sz = [&](double v) { return std::max(2, static_cast<int>(std::lround(v * s))); };
  if (category == "person") {
    const int bw = sz(26), bh = sz(78), head = sz(18);
    draw::fill_ellipse(img, {x + (bw - head) / 2, y, x + (bw + head) / 2, y + head}, {0.85, 0.7, 0.55});
    draw::fill_ellipse(img, {x, y + head - 2, x + bw, y + bh}, c);
    return {x, y, x + bw, y + bh};
  }
  if (category == "car") {
    const int bw = sz(110), bh = sz(46);
    draw::fill_rect(img, {x + bw / 5, y, x + 4 * bw / 5, y + bh / 2}, c);
    draw::fill_rect(img, {x, y + bh / 3, x + bw, y + 4 * bh / 5}, c);
    draw::fill_ellipse(img, {x + bw / 8, y + 3 * bh / 5, x + bw / 8 + sz(18), y + bh}, {0.1, 0.1, 0.1});
    draw::fill_ellipse(img, {x + bw - bw / 8 - sz(18), y + 3 * bh / 5, x + bw - bw / 8, y + bh}, {0.1, 0.1, 0.1});
    return {x, y, x + bw, y + bh};
  }
  if (category == "dog") {
    const int bw = sz(48), bh = sz(30);
    draw::fill_ellipse(img, {x, y + bh / 3, x + 4 * bw / 5, y + bh}, c);
    draw::fill_ellipse(img, {x + 3 * bw / 5, y, x + bw, y + bh / 2}, c);
    return {x, y, x + bw, y + bh};
  }
  if (category == "bicycle") {
    const int bw = sz(64), bh = sz(40), wheel = sz(26);
    draw::fill_ellipse(img, {x, y + bh - wheel, x + wheel, y + bh}, c);
    draw::fill_ellipse(img, {x + bw - wheel, y + bh - wheel, x + bw, y + bh}, c);
    draw::fill_rect(img, {x + wheel / 2, y + bh / 3, x + bw - wheel / 2, y + bh / 3 + sz(5)}, c);
    return {x, y, x + bw, y + bh};
  }
  // bench
  const int bw = sz(90), bh = sz(32);
  draw::fill_rect(img, {x, y, x + bw, y + bh / 3}, c);
  draw::fill_rect(img, {x, y + bh / 2, x + bw, y + 2 * bh / 3}, c);
  draw::fill_rect(img, {x + sz(6), y + 2 * bh / 3, x + sz(12), y + bh}, c);
  draw::fill_rect(img, {x + bw - sz(12), y + 2 * bh / 3, x + bw - sz(6), y + bh}, c);
  return {x, y, x + bw, y + bh};
}

inline Content scene(Rng& rng, int w, int h) {
  Content out{ImageBuffer(h, w), {}};
  // Sky-to-ground gradient.
  const double horizon = rng.uniform(0.35, 0.5);
  for (int y = 0; y < h; ++y) {
    const double t = static_cast<double>(y) / h;
    const Rgb c = t < horizon ? Rgb{0.55 + 0.2 * t, 0.7 + 0.1 * t, 0.9} : Rgb{0.45 - 0.1 * t, 0.45 - 0.05 * t, 0.4};
    draw::fill_rect(out.image, {0, y, w, y + 1}, c);
  }

  auto& a = out.annotation;
  a.kind = Kind::scene;
  const double s = std::min(w / 640.0, h / 480.0);
  // Objects cluster inside a sub-window of the frame.
  const int cw = static_cast<int>(w * rng.uniform(0.38, 0.5)), ch = static_cast<int>(h * rng.uniform(0.45, 0.6));
  const int cx = static_cast<int>(rng.uniform_int(0, w - cw)), cy = static_cast<int>(rng.uniform_int(0, h - ch));

  static const std::vector<std::string> others = {"car", "dog", "bicycle", "bench"};
  std::vector<std::pair<std::string, std::string>> objects;  // category, colour
  objects.push_back({"person", "black"});
  objects.push_back({"person", colours()[static_cast<std::size_t>(rng.uniform_int(2, 5))].name});
  const int extra = static_cast<int>(rng.uniform_int(2, 4));
  for (int i = 0; i < extra; ++i)
    objects.push_back({pick(rng, others), colours()[static_cast<std::size_t>(rng.uniform_int(1, 5))].name});

  for (const auto& [cat, colour] : objects) {
    const auto it = std::find_if(colours().begin(), colours().end(),
                                 [&](const ColourName& c) { return colour == c.name; });
    // Draw off-canvas first to learn the size, then place it inside the cluster.
    ImageBuffer probe(1, 1);
    const PixelBox size = scene_object(probe, cat, 0, 0, it->rgb, s);
    const int x = static_cast<int>(rng.uniform_int(cx, std::max(cx, cx + cw - size.width())));
    const int y = static_cast<int>(rng.uniform_int(cy, std::max(cy, cy + ch - size.height())));
    const PixelBox box = scene_object(out.image, cat, x, y, it->rgb, s).intersect(out.image.frame());
    a.boxes.push_back({box, rng.uniform(0.55, 0.98), cat, colour});
    if (std::find(a.categories.begin(), a.categories.end(), cat) == a.categories.end()) a.categories.push_back(cat);
  }
  // Detector clutter below the confidence threshold.
  static const std::vector<std::string> clutter = {"cup", "bottle", "kite", "umbrella"};
  const int fp = static_cast<int>(rng.uniform_int(1, 3));
  for (int i = 0; i < fp; ++i) {
    const int bw = static_cast<int>(rng.uniform_int(16, 60)), bh = static_cast<int>(rng.uniform_int(16, 60));
    const int x = static_cast<int>(rng.uniform_int(0, w - bw)), y = static_cast<int>(rng.uniform_int(0, h - bh));
    a.boxes.push_back({{x, y, x + bw, y + bh}, rng.uniform(0.05, 0.28), pick(rng, clutter), ""});
  }
  a.qa_pairs.push_back({"Which object should be observed?", {"person"}, std::nullopt});
  return out;
}

inline PixelBox shifted(PixelBox b, int dx, int dy) { return {b.x0 + dx, b.y0 + dy, b.x1 + dx, b.y1 + dy}; }

}  // namespace detail

/// Renders item `index` of the corpus described by `spec`.
inline Item generate_item(const Spec& spec, int index) {
  spec.validate();
  Rng rng(derive_seed({spec.seed, static_cast<std::uint64_t>(spec.kind), static_cast<std::uint64_t>(index)}));
  const int w = spec.width(), h = spec.height();

  detail::Content c = spec.kind == Kind::receipt    ? detail::receipt(rng, w, h)
                      : spec.kind == Kind::document ? detail::document(rng, w, h)
                                                    : detail::scene(rng, w, h);

  if (spec.kind == Kind::receipt && rng.bernoulli(spec.blurred_fraction))
    c.image = gaussian_blur(c.image, rng.uniform(1.6, 3.0));

  // Background padding around the content.
  const int cw = padded_extent(w, spec.padding), chh = padded_extent(h, spec.padding);
  const int ox = static_cast<int>(rng.uniform_int(0, cw - w)), oy = static_cast<int>(rng.uniform_int(0, chh - h));
  const double bg = rng.uniform(0.02, 0.15);
  ImageBuffer canvas(chh, cw, bg);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < 3; ++k) canvas.at(y + oy, x + ox, k) = c.image.at(y, x, k);

  // Lighting and sensor noise.
  const double gain = rng.uniform(1.0 - spec.lighting_jitter, 1.0 + spec.lighting_jitter);
  const double offset = rng.uniform(-spec.lighting_jitter, spec.lighting_jitter) * 0.3;
  const double sigma = rng.uniform(spec.noise_min, spec.noise_max);
  for (auto& v : canvas.data()) v = v * gain + offset + sigma * rng.normal();
  canvas.clamp_unit();

  Item item{std::move(canvas), std::move(c.annotation)};
  auto& a = item.annotation;
  char id[64];
  std::snprintf(id, sizeof id, "%s-%04d", std::string(to_string(spec.kind)).c_str(), index);
  a.id = id;
  a.kind = spec.kind;
  for (auto& d : a.boxes) d.box = detail::shifted(d.box, ox, oy).intersect(item.image.frame());
  for (auto& q : a.qa_pairs)
    if (q.region) q.region = detail::shifted(*q.region, ox, oy).intersect(item.image.frame());
  return item;
}

inline std::vector<Item> generate_corpus(const Spec& spec) {
  spec.validate();
  std::vector<Item> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) out.push_back(generate_item(spec, i));
  return out;
}

}  // namespace semlink::corpus

#endif  // SEMLINK_CORPUS_HPP
