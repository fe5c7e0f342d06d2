#ifndef SEMLINK_HARNESS_HPP
#define SEMLINK_HARNESS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semlink/baseline_codec.hpp"
#include "semlink/channel_model.hpp"
#include "semlink/corpus.hpp"
#include "semlink/edge_tools.hpp"
#include "semlink/error.hpp"
#include "semlink/intent_controller.hpp"
#include "semlink/metrics.hpp"
#include "semlink/phy_transport.hpp"
#include "semlink/random.hpp"
#include "semlink/scripted_oracle.hpp"
#include "semlink/semantic_codec.hpp"

namespace semlink::sim {

enum class Mode { full_image, intention_aware, intention_stored, direct_voice };

inline std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::full_image: return "full_image";
    case Mode::intention_aware: return "intention_aware";
    case Mode::intention_stored: return "intention_stored";
    case Mode::direct_voice: return "direct_voice";
  }
  return "unknown";
}

inline Mode mode_from_string(std::string_view s) {
  if (s == "full_image") return Mode::full_image;
  if (s == "intention_aware") return Mode::intention_aware;
  if (s == "intention_stored") return Mode::intention_stored;
  if (s == "direct_voice") return Mode::direct_voice;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

struct ChannelSettings {
  int k = 64;
  int num_taps = 8;
  /// Unit-gain channel instead of Rayleigh taps; the sweep SNR is then the ESNR.
  bool flat = false;
  channel::LinkAbstractionConfig abstraction;
};

struct TaskPolicy {
  /// Answer-region PSNR needed to read an answer off a reconstruction.
  double psnr_threshold_db = 18.0;
  /// Object-box PSNR needed to recognise an object in a reconstruction.
  double scene_psnr_threshold_db = 15.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Mode mode = Mode::full_image;
  phy::Chain chain = phy::Chain::baseline;
  std::vector<int> n = {4};
  std::vector<double> snr_db = {10.0};
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t master_seed = 1;

  corpus::Spec corpus;
  ChannelSettings channel;
  phy::CodedLinkConfig link;
  int baseline_quality = 75;

  int probe_n = 4;
  /// Simulated seconds each corpus image stays in view.
  int frames_per_task = 1;
  double check_period = 1.0;
  /// Fraction of the blurriest images excluded before the run.
  double blur_filter = 0.0;

  tools::CannyRoiConfig canny;
  tools::ObjectRoiConfig object;
  double ocr_corruption = 0.3;
  TaskPolicy policy;

  metrics::SynonymTable synonyms;
  std::vector<std::string> attribute_words = {"black", "white", "red", "green", "blue", "yellow"};
  std::vector<std::string> stored_commands;
  intent::TaskSpace space = intent::TaskSpace::defaults();

  /// Builds a fresh oracle for each sweep cell.
  std::function<std::unique_ptr<intent::VlmOracle>()> oracle_factory;

  void validate() const {
    if (n.empty() || snr_db.empty() || seeds.empty()) throw ConfigError("n, snr_db and seeds must be non-empty");
    if (chain == phy::Chain::text) throw ConfigError("scenario chain must be baseline or semantic");
    for (int v : n)
      if (chain == phy::Chain::semantic && !phy::valid_ratio(v)) throw ConfigError("n must be one of 2, 4, 8, 16");
    if (!phy::valid_ratio(probe_n)) throw ConfigError("probe_n must be one of 2, 4, 8, 16");
    if (frames_per_task < 1) throw ConfigError("frames_per_task must be at least 1");
    if (!(check_period > 0.0)) throw ConfigError("check_period must be positive");
    if (!(blur_filter >= 0.0 && blur_filter < 1.0)) throw ConfigError("blur_filter must lie in [0, 1)");
    if (channel.k < 1 || channel.num_taps < 1 || channel.num_taps > channel.k)
      throw ConfigError("channel needs k >= 1 and 1 <= num_taps <= k");
    if (baseline_quality < 1 || baseline_quality > 100) throw ConfigError("baseline quality must lie in [1, 100]");
    try {
      channel.abstraction.validate();
      link.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    corpus.validate();
    if (mode != Mode::full_image && !oracle_factory) throw ConfigError("this mode needs an oracle script");
  }
};

/// One sweep cell.
struct Cell {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int n = 0;  // 0 for the baseline chain
};

enum class Purpose { probe, task };

inline std::string_view to_string(Purpose p) noexcept { return p == Purpose::probe ? "probe" : "task"; }

struct LedgerEntry {
  std::size_t cell = 0;
  long step = 0;
  std::string task_id;
  Purpose purpose = Purpose::task;
  phy::TransmissionRecord record;
  /// Pixel dims of the transmitted image (0 x 0 for text).
  int height = 0;
  int width = 0;
};

struct CellStats {
  long steps = 0;
  long probes = 0;
  long tool_runs = 0;
  long consistency_checks = 0;
  long fallbacks = 0;
  long prediction_failures = 0;
};

struct ResponseLog {
  std::size_t cell = 0;
  long step = 0;
  std::string task_id;
  std::string response;
};

struct RunResult {
  std::vector<Cell> cells;
  std::vector<std::vector<metrics::TaskOutcome>> outcomes;  // per cell
  std::vector<CellStats> stats;                             // per cell
  std::vector<LedgerEntry> ledger;
  std::vector<ResponseLog> responses;
  std::vector<std::string> log;
  std::size_t corpus_size = 0;
  std::vector<std::size_t> kept;
};

/// Cross product snr x seed x n in sorted order.
inline std::vector<Cell> make_cells(const ScenarioConfig& cfg) {
  auto snrs = cfg.snr_db;
  auto seeds = cfg.seeds;
  std::vector<int> ns = cfg.chain == phy::Chain::baseline ? std::vector<int>{0} : cfg.n;
  std::sort(snrs.begin(), snrs.end());
  std::sort(seeds.begin(), seeds.end());
  std::sort(ns.begin(), ns.end());
  std::vector<Cell> cells;
  for (double s : snrs)
    for (int n : ns)
      for (auto seed : seeds) cells.push_back({s, seed, n});
  return cells;
}

/// Object focus named by a command: categories via the synonym table (with
/// plural stripping) and attribute words.
inline tools::ObjectFocus focus_from_command(std::string_view command, const metrics::SynonymTable& synonyms,
                                             const std::vector<std::string>& attribute_words) {
  tools::ObjectFocus f;
  const auto tokens = intent::token_set(command);
  auto has_all = [&](std::string_view phrase) {
    const auto p = intent::token_set(phrase);
    return !p.empty() && std::all_of(p.begin(), p.end(), [&](const std::string& t) { return tokens.count(t) > 0; });
  };
  for (const auto& [cat, alts] : synonyms) {
    bool hit = has_all(cat);
    for (const auto& a : alts) hit = hit || has_all(a);
    if (hit) f.categories.push_back(cat);
  }
  for (const auto& a : attribute_words)
    if (tokens.count(a)) f.attributes.push_back(a);
  return f;
}

namespace detail {

inline std::string box_key(const PixelBox& b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%d", b.x0, b.y0, b.x1, b.y1);
  return buf;
}

inline std::string focus_key(const tools::ObjectFocus& f) {
  std::string k;
  for (const auto& c : f.categories) k += c + ";";
  k += "|";
  for (const auto& a : f.attributes) k += a + ";";
  return k;
}

inline PixelBox shifted(const PixelBox& b, int dx, int dy) { return {b.x0 + dx, b.y0 + dy, b.x1 + dx, b.y1 + dy}; }

inline std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

struct SemanticArtifact {
  codec::LatentHeader header;
  phy::SymbolStream stream;
};

struct BaselineArtifact {
  std::size_t bytes = 0;
  ImageBuffer decoded;
};

/// Deterministic encoder outputs shared by all cells of a run.
class Cache {
 public:
  /// With retain off only the most recent artifact of each kind is kept.
  void set_retain(bool on) { retain_ = on; }

  const SemanticArtifact& semantic(const std::string& key, const ImageBuffer& img, int n,
                                   const codec::Transform& transform) {
    auto it = semantic_.find(key);
    if (it != semantic_.end()) return it->second;
    const auto q = codec::quantize(codec::encode(img, transform), n);
    SemanticArtifact a{codec::header_of(q), phy::pack_latent(q.levels, n)};
    if (!retain_) semantic_.clear();
    return semantic_.emplace(key, std::move(a)).first->second;
  }

  const BaselineArtifact& baseline(const std::string& key, const ImageBuffer& img, int quality) {
    auto it = baseline_.find(key);
    if (it != baseline_.end()) return it->second;
    const auto enc = baseline::encode(img, quality);
    BaselineArtifact a{enc.bytes.size(), baseline::decode(enc.bytes)};
    if (!retain_) baseline_.clear();
    return baseline_.emplace(key, std::move(a)).first->second;
  }

  std::optional<PixelBox> roi(const std::string& key) const {
    const auto it = roi_.find(key);
    if (it == roi_.end()) return std::nullopt;
    return it->second;
  }
  void put_roi(const std::string& key, const PixelBox& b) { roi_[key] = b; }

 private:
  std::map<std::string, SemanticArtifact> semantic_;
  std::map<std::string, BaselineArtifact> baseline_;
  std::map<std::string, PixelBox> roi_;
  bool retain_ = true;
};

}  // namespace detail

/// Runs every cell of the scenario over the (optionally blur-filtered) corpus.
class Runner {
 public:
  explicit Runner(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    items_ = corpus::generate_corpus(cfg_.corpus);
    result_.corpus_size = items_.size();

    if (cfg_.blur_filter > 0.0) {
      std::vector<ImageBuffer> images;
      images.reserve(items_.size());
      for (const auto& it : items_) images.push_back(it.image);
      result_.kept = tools::filter_blurry(images, cfg_.blur_filter);
    } else {
      for (std::size_t i = 0; i < items_.size(); ++i) result_.kept.push_back(i);
    }

    double max_sharp = 0.0;
    for (const auto& it : items_) max_sharp = std::max(max_sharp, tools::sharpness_score(it.image));
    auto ocr = std::make_shared<tools::AnnotatedOcrEngine>(max_sharp, cfg_.ocr_corruption, cfg_.master_seed);
    auto det = std::make_shared<tools::AnnotatedDetector>();
    for (const auto& it : items_) {
      ocr->add(it.annotation.id, it.annotation.text);
      det->add(it.annotation.id, it.annotation.boxes);
    }
    registry_.ocr = ocr;
    registry_.detector = det;
    registry_.canny_cfg = cfg_.canny;
    registry_.object_cfg = cfg_.object;
  }

  const std::vector<corpus::Item>& items() const noexcept { return items_; }

  RunResult run() {
    result_.cells = make_cells(cfg_);
    cache_.set_retain(result_.cells.size() > 1);
    for (std::size_t c = 0; c < result_.cells.size(); ++c) run_cell(c);
    return std::move(result_);
  }

 private:
  struct TaskRun {
    const corpus::Item* item = nullptr;
    std::size_t index = 0;
    metrics::TaskOutcome outcome;
    tools::ToolId tool = tools::ToolId::none;
    tools::ObjectFocus focus;
    std::optional<ImageBuffer> last_received;
    long tx = 0;
  };

  // -- transmissions --------------------------------------------------------

  channel::ChannelRealization channel_for(std::uint64_t seed, double snr_db) const {
    if (cfg_.channel.flat) return channel::flat_channel(cfg_.channel.k, snr_db);
    return channel::sample_channel(seed, cfg_.channel.k, cfg_.channel.num_taps, snr_db);
  }

  std::uint64_t tx_seed(const TaskRun& t, long tx, std::uint64_t salt) const {
    return derive_seed({cell_seed_, static_cast<std::uint64_t>(t.index), static_cast<std::uint64_t>(tx), salt});
  }

  void ledger(TaskRun& t, long step, Purpose p, const phy::TransmissionRecord& r, int h, int w) {
    result_.ledger.push_back({cell_index_, step, t.item->annotation.id, p, r, h, w});
    t.outcome.records.push_back(r);
  }

  /// Semantic chain end to end; returns the reconstruction.
  ImageBuffer send_semantic(TaskRun& t, long step, Purpose p, const ImageBuffer& img, const std::string& key, int n) {
    const auto& art = cache_.semantic(key + "#n" + std::to_string(n), img, n, transform_);
    const long tx = t.tx++;
    const auto ch = channel_for(tx_seed(t, tx, 1), cell_.snr_db);
    const auto impaired = phy::semantic_transmit(art.stream, ch, tx_seed(t, tx, 2));
    ledger(t, step, p, phy::semantic_record(art.stream, ch, cfg_.channel.abstraction.beta), img.height(),
           img.width());
    return codec::synthesize(codec::dequantize(codec::reassemble(art.header, impaired)), transform_);
  }

  /// Coded chain; an erased payload reconstructs as a black frame.
  ImageBuffer send_baseline(TaskRun& t, long step, const ImageBuffer& img, const std::string& key, bool& delivered) {
    const auto& art = cache_.baseline(key, img, cfg_.baseline_quality);
    const long tx = t.tx++;
    const auto ch = channel_for(tx_seed(t, tx, 1), cell_.snr_db);
    const auto rec = phy::baseline_transmit(art.bytes, ch, cfg_.link, cfg_.channel.abstraction, tx_seed(t, tx, 2));
    ledger(t, step, Purpose::task, rec, img.height(), img.width());
    delivered = rec.delivered;
    return rec.delivered ? art.decoded : ImageBuffer(img.height(), img.width(), 0.0);
  }

  // -- controller actions ---------------------------------------------------

  std::optional<std::string> capture_probe(TaskRun& t, long step) {
    ++stats().probes;
    const auto probe = tools::downsample_probe(t.item->image);
    const auto received = send_semantic(t, step, Purpose::probe, probe, t.item->annotation.id + "#probe", cfg_.probe_n);
    return intent::predict_intention(received, state_.space, *oracle_, step);
  }

  void select(TaskRun& t, long step, const std::string& label) {
    t.tool = intent::select_tool(label, registry_, state_.space);
    t.focus = {};
    if (cfg_.mode == Mode::direct_voice && !voice_command_.empty()) {
      t.focus = focus_from_command(voice_command_, cfg_.synonyms, cfg_.attribute_words);
    } else if (cfg_.mode == Mode::intention_stored) {
      const auto ctx = oracle_->context(step);
      if (ctx) {
        if (const auto cmd = intent::retrieve_command(state_.memory, *ctx)) {
          t.focus = focus_from_command(*cmd, cfg_.synonyms, cfg_.attribute_words);
          result_.log.push_back("step " + std::to_string(step) + ": retrieved stored command '" + *cmd + "'");
        }
      }
    }
  }

  void capture_task(TaskRun& t, long step) {
    const auto& item = *t.item;
    const auto& ann = item.annotation;
    auto& o = t.outcome;
    if (cfg_.mode != Mode::full_image && t.tool != tools::ToolId::none) ++stats().tool_runs;

    if (t.tool == tools::ToolId::ocr) {
      const auto text = tools::ocr_extract(item.image, *registry_.ocr, ann.id);
      const long tx = t.tx++;
      const auto ch = channel_for(tx_seed(t, tx, 1), cell_.snr_db);
      const auto rec = phy::text_transmit(text, ch, cfg_.link, cfg_.channel.abstraction, tx_seed(t, tx, 2));
      ledger(t, step, Purpose::task, rec, 0, 0);
      const std::string received = rec.delivered ? text : std::string();
      o.response = received;
      o.psnr_db = std::nan("");
      o.success = false;
      o.predicted.clear();
      const auto tokens = metrics::tokenize(received);
      for (const auto& q : ann.qa_pairs)
        for (const auto& a : q.answers)
          if (!o.success && metrics::contains_sequence(tokens, metrics::tokenize(a))) {
            o.success = true;
            o.predicted = a;
          }
      t.last_received = ImageBuffer(1, 1, 0.0);
      log_response(t, step);
      return;
    }

    // Image tools: pick the crop the tool would transmit.
    PixelBox box = item.image.frame();
    if (t.tool != tools::ToolId::none) {
      const std::string key = ann.id + "#" + std::string(tools::to_string(t.tool)) + "#" + detail::focus_key(t.focus);
      if (auto cached = cache_.roi(key)) {
        box = *cached;
      } else {
        box = registry_.roi(t.tool, item.image, ann.id, t.focus);
        cache_.put_roi(key, box);
      }
    }
    const ImageBuffer sent = crop(item.image, box);
    const std::string key = ann.id + "#" + detail::box_key(box);

    bool delivered = true;
    ImageBuffer received = cfg_.chain == phy::Chain::semantic ? send_semantic(t, step, Purpose::task, sent, key, cell_.n)
                                                              : send_baseline(t, step, sent, key, delivered);
    o.psnr_db = metrics::psnr(sent, received);

    if (ann.kind == corpus::Kind::scene) {
      std::vector<std::string> seen;
      for (const auto& d : ann.boxes) {
        if (d.confidence < cfg_.object.conf_threshold) continue;
        if (std::find(ann.categories.begin(), ann.categories.end(), d.category) == ann.categories.end()) continue;
        const int cx = (d.box.x0 + d.box.x1) / 2, cy = (d.box.y0 + d.box.y1) / 2;
        if (!box.contains({cx, cy, cx + 1, cy + 1}) || !delivered) continue;
        const PixelBox local = detail::shifted(d.box.intersect(box), -box.x0, -box.y0);
        if (local.empty() || metrics::region_psnr(sent, received, local) < cfg_.policy.scene_psnr_threshold_db)
          continue;
        if (std::find(seen.begin(), seen.end(), d.category) == seen.end()) seen.push_back(d.category);
      }
      std::string response;
      for (std::size_t i = 0; i < seen.size(); ++i) response += (i ? ", " : "") + seen[i];
      o.response = seen.empty() ? "nothing recognisable" : "the view shows " + response;
      const auto tokens = metrics::tokenize(o.response);
      o.success = false;
      o.predicted.clear();
      for (const auto& q : ann.qa_pairs)
        for (const auto& a : q.answers)
          if (!o.success && metrics::mentions(tokens, a, cfg_.synonyms)) {
            o.success = true;
            o.predicted = a;
          }
      if (!ann.categories.empty()) o.coverage = metrics::object_coverage(o.response, ann.categories, cfg_.synonyms);
    } else {
      o.success = false;
      o.predicted.clear();
      for (const auto& q : ann.qa_pairs) {
        if (!q.region || !box.contains(*q.region) || !delivered) continue;
        const PixelBox local = detail::shifted(*q.region, -box.x0, -box.y0);
        if (metrics::region_psnr(sent, received, local) >= cfg_.policy.psnr_threshold_db && !q.answers.empty()) {
          o.success = true;
          o.predicted = q.answers.front();
          break;
        }
      }
      o.response = o.predicted;
    }
    t.last_received = std::move(received);
    log_response(t, step);
  }

  void log_response(const TaskRun& t, long step) {
    result_.responses.push_back({cell_index_, step, t.item->annotation.id, t.outcome.response});
  }

  // -- cell loop ------------------------------------------------------------

  CellStats& stats() { return result_.stats[cell_index_]; }

  using Queue = std::vector<intent::Action>;

  void apply_event(const intent::Event& ev, Queue& queue) {
    auto r = intent::step(state_, ev, tagger_);
    state_ = std::move(r.state);
    for (auto& d : r.diagnostics) result_.log.push_back(std::move(d));
    for (auto& a : r.actions) queue.push_back(std::move(a));
  }

  /// Executes actions in order; a probe requested by a consistency failure
  /// is deferred to the next frame.
  void drain(TaskRun& t, long step, Queue& queue, bool& deferred_probe) {
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const auto a = queue[i];
      switch (a.kind) {
        case intent::ActionKind::capture_probe: {
          const auto label = capture_probe(t, step);
          if (!label) ++stats().prediction_failures;
          apply_event(intent::event::ProbeResult{label}, queue);
          break;
        }
        case intent::ActionKind::select_tool: select(t, step, a.label); break;
        case intent::ActionKind::capture_task: capture_task(t, step); break;
        case intent::ActionKind::consistency_check: {
          ++stats().consistency_checks;
          const auto verdict = oracle_->consistent(t.last_received ? *t.last_received : t.item->image, a.label, step);
          int delta = 1;
          if (!verdict) result_.log.push_back("step " + std::to_string(step) + ": consistency oracle failed; staying on task");
          else delta = *verdict ? 1 : 0;
          if (delta == 0) {
            ++stats().fallbacks;
            Queue follow;
            apply_event(intent::event::Delta{0}, follow);
            for (const auto& f : follow)
              if (f.kind == intent::ActionKind::capture_probe) deferred_probe = true;
          } else {
            Queue ignore;
            apply_event(intent::event::Delta{1}, ignore);
          }
          break;
        }
      }
    }
    queue.clear();
  }

  void run_cell(std::size_t c) {
    cell_index_ = c;
    cell_ = result_.cells[c];
    cell_seed_ = derive_seed({cfg_.master_seed, detail::double_bits(cell_.snr_db), cell_.seed,
                              static_cast<std::uint64_t>(cell_.n)});
    result_.stats.emplace_back();
    result_.outcomes.emplace_back();
    oracle_ = cfg_.oracle_factory ? cfg_.oracle_factory() : nullptr;

    state_ = intent::IntentState{};
    state_.space = cfg_.space;
    state_.check_period = cfg_.check_period;
    for (std::size_t i = 0; i < cfg_.stored_commands.size(); ++i)
      state_.memory.add(cfg_.stored_commands[i], -static_cast<double>(cfg_.stored_commands.size() - i));

    long step = 0;
    for (std::size_t k : result_.kept) {
      TaskRun t;
      t.item = &items_[k];
      t.index = k;
      t.outcome.task_id = t.item->annotation.id;
      for (const auto& q : t.item->annotation.qa_pairs)
        t.outcome.truths.insert(t.outcome.truths.end(), q.answers.begin(), q.answers.end());

      // A new capture target starts a new session; learned state persists.
      state_.mode = intent::Mode::probing;
      state_.label.clear();
      state_.last_check_time.reset();
      state_.last_probe_time.reset();
      state_.probe_outstanding = false;
      voice_command_.clear();
      bool deferred_probe = false;

      for (int f = 0; f < cfg_.frames_per_task; ++f, ++step) {
        ++stats().steps;
        const double now = static_cast<double>(step) * cfg_.check_period;
        if (cfg_.mode == Mode::full_image) {
          t.tool = tools::ToolId::none;
          capture_task(t, step);
          continue;
        }
        Queue queue;
        if (cfg_.mode == Mode::direct_voice && f == 0) {
          voice_command_ = oracle_->voice(step);
          if (metrics::normalize_answer(voice_command_).empty()) throw OracleGapError("voice", step);
          state_.now = now;
          apply_event(intent::event::Voice{voice_command_}, queue);
        }
        apply_event(intent::event::Tick{now}, queue);
        if (deferred_probe) {
          deferred_probe = false;
          queue.insert(queue.begin(), {intent::ActionKind::capture_probe, ""});
        }
        drain(t, step, queue, deferred_probe);
      }
      result_.outcomes[c].push_back(std::move(t.outcome));
    }
  }

  ScenarioConfig cfg_;
  std::vector<corpus::Item> items_;
  tools::ToolRegistry registry_;
  codec::BlockDctTransform transform_;
  intent::StopListTagger tagger_;
  detail::Cache cache_;
  RunResult result_;

  std::size_t cell_index_ = 0;
  Cell cell_;
  std::uint64_t cell_seed_ = 0;
  std::unique_ptr<intent::VlmOracle> oracle_;
  intent::IntentState state_;
  std::string voice_command_;
};

inline RunResult run_scenario(const ScenarioConfig& cfg) { return Runner(cfg).run(); }

// ---------------------------------------------------------------------------
// Reports

struct CellSummary {
  Cell cell;
  double payload_bytes = 0.0;    // mean per task, probes included
  double complex_symbols = 0.0;  // mean per task, probes included
  double delivered = 0.0;        // fraction of transmissions delivered
  std::optional<double> psnr_db;
  double success = 0.0;
  std::optional<double> coverage;
};

inline std::vector<CellSummary> summarize_cells(const RunResult& r) {
  std::vector<CellSummary> out;
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    CellSummary s;
    s.cell = r.cells[c];
    const auto& oc = r.outcomes[c];
    if (oc.empty()) {
      out.push_back(s);
      continue;
    }
    double bytes = 0, syms = 0, psnr_sum = 0, cov_sum = 0;
    std::size_t tx = 0, ok = 0, psnr_n = 0, cov_n = 0;
    for (const auto& o : oc) {
      bytes += static_cast<double>(o.payload_bytes());
      syms += static_cast<double>(o.complex_symbols());
      for (const auto& rec : o.records) {
        ++tx;
        ok += rec.delivered ? 1 : 0;
      }
      if (std::isfinite(o.psnr_db)) {
        psnr_sum += o.psnr_db;
        ++psnr_n;
      }
      if (o.coverage >= 0.0) {
        cov_sum += o.coverage;
        ++cov_n;
      }
    }
    const double n = static_cast<double>(oc.size());
    s.payload_bytes = bytes / n;
    s.complex_symbols = syms / n;
    s.delivered = tx ? static_cast<double>(ok) / static_cast<double>(tx) : 0.0;
    if (psnr_n) s.psnr_db = psnr_sum / static_cast<double>(psnr_n);
    s.success = metrics::success_rate(oc);
    if (cov_n) s.coverage = cov_sum / static_cast<double>(cov_n);
    out.push_back(s);
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string sweep_csv_header() {
  return "scenario,chain,snr_db,seed,n,payload_bytes,complex_symbols,delivered,psnr_db,success,coverage";
}

/// One row per cell, rows sorted by (snr_db, n, seed).
inline std::string sweep_csv(const ScenarioConfig& cfg, const RunResult& r) {
  auto rows = summarize_cells(r);
  std::stable_sort(rows.begin(), rows.end(), [](const CellSummary& a, const CellSummary& b) {
    if (a.cell.snr_db != b.cell.snr_db) return a.cell.snr_db < b.cell.snr_db;
    if (a.cell.n != b.cell.n) return a.cell.n < b.cell.n;
    return a.cell.seed < b.cell.seed;
  });
  std::string out = sweep_csv_header() + "\n";
  for (const auto& s : rows) {
    out += cfg.name + "," + std::string(phy::to_string(cfg.chain)) + "," + fmt(s.cell.snr_db) + "," +
           std::to_string(s.cell.seed) + "," + std::to_string(s.cell.n) + "," + fmt(s.payload_bytes) + "," +
           fmt(s.complex_symbols) + "," + fmt(s.delivered) + "," + (s.psnr_db ? fmt(*s.psnr_db) : "") + "," +
           fmt(s.success) + "," + (s.coverage ? fmt(*s.coverage) : "") + "\n";
  }
  return out;
}

inline std::vector<phy::TransmissionRecord> ledger_records(const RunResult& r) {
  std::vector<phy::TransmissionRecord> out;
  out.reserve(r.ledger.size());
  for (const auto& e : r.ledger) out.push_back(e.record);
  return out;
}

/// Per-chain bandwidth aggregates of the whole ledger.
inline std::string bandwidth_csv(const RunResult& r) {
  std::string out =
      "chain,count,total_bytes,total_symbols,mean_bytes,mean_symbols,bytes_q25,bytes_q50,bytes_q75,"
      "symbols_q25,symbols_q50,symbols_q75\n";
  if (r.ledger.empty()) return out;
  const auto records = ledger_records(r);
  const auto summary = metrics::bandwidth_summary(records);
  auto row = [&](const std::string& name, const metrics::ChainSummary& s) {
    out += name + "," + std::to_string(s.count) + "," + std::to_string(s.total_bytes) + "," +
           std::to_string(s.total_symbols) + "," + fmt(s.mean_bytes) + "," + fmt(s.mean_symbols) + "," +
           fmt(s.bytes_q25) + "," + fmt(s.bytes_q50) + "," + fmt(s.bytes_q75) + "," + fmt(s.symbols_q25) + "," +
           fmt(s.symbols_q50) + "," + fmt(s.symbols_q75) + "\n";
  };
  for (const auto& [chain, s] : summary.per_chain) row(chain, s);
  row("overall", summary.overall);
  return out;
}

/// Ledger rows in transmission order.
inline std::string ledger_csv(const RunResult& r) {
  std::string out = "cell,step,task_id,purpose,height,width," + phy::csv_header() + "\n";
  for (const auto& e : r.ledger)
    out += std::to_string(e.cell) + "," + std::to_string(e.step) + "," + e.task_id + "," +
           std::string(to_string(e.purpose)) + "," + std::to_string(e.height) + "," + std::to_string(e.width) + "," +
           phy::to_csv(e.record) + "\n";
  return out;
}

}  // namespace semlink::sim

#endif  // SEMLINK_HARNESS_HPP
