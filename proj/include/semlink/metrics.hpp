#ifndef SEMLINK_METRICS_HPP
#define SEMLINK_METRICS_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semlink/error.hpp"
#include "semlink/image.hpp"
#include "semlink/phy_transport.hpp"

namespace semlink::metrics {

inline constexpr double kPsnrCapDb = 99.0;

/// PSNR for [0, 1] images; zero error reports the 99 dB cap.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw MetricError("psnr needs images of identical dims");
  double se = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(da.size());
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

/// PSNR restricted to `region` of both images.
inline double region_psnr(const ImageBuffer& a, const ImageBuffer& b, const PixelBox& region) {
  return psnr(crop(a, region), crop(b, region));
}

/// Lowercase alphanumeric tokens; everything else separates.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u) || u >= 0x80 || ch == '.' ) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  // Sentence-final periods are separators; decimal points are kept.
  for (auto& t : out) {
    while (!t.empty() && t.back() == '.') t.pop_back();
    while (!t.empty() && t.front() == '.') t.erase(t.begin());
  }
  std::erase_if(out, [](const std::string& t) { return t.empty(); });
  return out;
}

/// Lowercased, whitespace-collapsed, trimmed.
inline std::string normalize_answer(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

/// Default match policy: case-insensitive, whitespace-normalized exact match
/// against any alternative.
inline bool answer_matches(std::string_view predicted, std::span<const std::string> truths) {
  const auto p = normalize_answer(predicted);
  return std::any_of(truths.begin(), truths.end(), [&](const std::string& t) { return normalize_answer(t) == p; });
}

/// One task evaluation; `records` lists every transmission spent on it.
struct TaskOutcome {
  std::string task_id;
  std::string predicted;
  std::vector<std::string> truths;
  bool success = false;
  std::vector<phy::TransmissionRecord> records;
  double psnr_db = 0.0;
  double coverage = -1.0;  // scene tasks only
  std::string response;

  std::size_t payload_bytes() const {
    std::size_t s = 0;
    for (const auto& r : records) s += r.payload_bytes;
    return s;
  }
  std::size_t complex_symbols() const {
    std::size_t s = 0;
    for (const auto& r : records) s += r.complex_symbols;
    return s;
  }
};

inline double success_rate(std::span<const TaskOutcome> outcomes) {
  if (outcomes.empty()) throw MetricError("success_rate needs at least one outcome");
  std::size_t ok = 0;
  for (const auto& o : outcomes) ok += o.success ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

/// Category name -> alternative phrasings (each may span several tokens).
using SynonymTable = std::map<std::string, std::vector<std::string>, std::less<>>;

inline bool contains_sequence(std::span<const std::string> hay, std::span<const std::string> needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline bool mentions(std::span<const std::string> response_tokens, std::string_view category,
                     const SynonymTable& synonyms) {
  if (contains_sequence(response_tokens, tokenize(category))) return true;
  const auto it = synonyms.find(category);
  if (it == synonyms.end()) return false;
  for (const auto& alt : it->second)
    if (contains_sequence(response_tokens, tokenize(alt))) return true;
  return false;
}

/// Fraction of categories named in the response, directly or via a synonym.
inline double object_coverage(std::string_view response, std::span<const std::string> categories,
                              const SynonymTable& synonyms) {
  if (categories.empty()) throw MetricError("object_coverage needs at least one category");
  const auto tokens = tokenize(response);
  std::size_t covered = 0;
  for (const auto& c : categories) covered += mentions(tokens, c, synonyms) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(categories.size());
}

/// Linear-interpolation quantile of an unsorted sample (q in [0, 1]).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw MetricError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

struct ChainSummary {
  std::size_t count = 0;
  std::size_t total_bytes = 0;
  std::size_t total_symbols = 0;
  double mean_bytes = 0.0;
  double mean_symbols = 0.0;
  double bytes_q25 = 0.0;
  double bytes_q50 = 0.0;
  double bytes_q75 = 0.0;
  double symbols_q25 = 0.0;
  double symbols_q50 = 0.0;
  double symbols_q75 = 0.0;
};

struct BandwidthSummary {
  ChainSummary overall;
  std::map<std::string, ChainSummary, std::less<>> per_chain;
};

namespace detail {

inline ChainSummary summarize(std::span<const phy::TransmissionRecord* const> records) {
  ChainSummary s;
  std::vector<double> bytes, symbols;
  for (const auto* r : records) {
    ++s.count;
    s.total_bytes += r->payload_bytes;
    s.total_symbols += r->complex_symbols;
    bytes.push_back(static_cast<double>(r->payload_bytes));
    symbols.push_back(static_cast<double>(r->complex_symbols));
  }
  s.mean_bytes = static_cast<double>(s.total_bytes) / static_cast<double>(s.count);
  s.mean_symbols = static_cast<double>(s.total_symbols) / static_cast<double>(s.count);
  s.bytes_q25 = quantile(bytes, 0.25);
  s.bytes_q50 = quantile(bytes, 0.50);
  s.bytes_q75 = quantile(bytes, 0.75);
  s.symbols_q25 = quantile(symbols, 0.25);
  s.symbols_q50 = quantile(symbols, 0.50);
  s.symbols_q75 = quantile(symbols, 0.75);
  return s;
}

}  // namespace detail

/// Per-chain and overall byte/symbol aggregates with quartiles.
inline BandwidthSummary bandwidth_summary(std::span<const phy::TransmissionRecord> records) {
  if (records.empty()) throw MetricError("bandwidth_summary needs at least one record");
  std::vector<const phy::TransmissionRecord*> all;
  std::map<std::string, std::vector<const phy::TransmissionRecord*>, std::less<>> by_chain;
  for (const auto& r : records) {
    all.push_back(&r);
    by_chain[std::string(phy::to_string(r.chain))].push_back(&r);
  }
  BandwidthSummary out;
  out.overall = detail::summarize(all);
  for (const auto& [chain, rs] : by_chain) out.per_chain[chain] = detail::summarize(rs);
  return out;
}

}  // namespace semlink::metrics

#endif  // SEMLINK_METRICS_HPP
