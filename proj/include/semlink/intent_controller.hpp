#ifndef SEMLINK_INTENT_CONTROLLER_HPP
#define SEMLINK_INTENT_CONTROLLER_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semlink/edge_tools.hpp"
#include "semlink/error.hpp"
#include "semlink/image.hpp"
#include "semlink/metrics.hpp"

namespace semlink::intent {

// ---------------------------------------------------------------------------
// Task space

struct Intention {
  std::string label;
  tools::ToolId tool = tools::ToolId::none;
  std::string prompt;
  /// Words in a voice command that select this intention.
  std::vector<std::string> keywords;
  /// Added by the VLM and awaiting user confirmation.
  bool pending = false;
};

class TaskSpace {
 public:
  TaskSpace() = default;
  explicit TaskSpace(std::vector<Intention> intentions) {
    for (auto& i : intentions) add(std::move(i));
  }

  /// text-reading -> ocr, document -> canny, scene -> object.
  static TaskSpace defaults() {
    return TaskSpace({
        {"text-reading", tools::ToolId::ocr, "Read the text in the image and answer the question.",
         {"read", "text", "translate", "translation", "receipt", "menu", "sign"}, false},
        {"document", tools::ToolId::canny, "Answer the question about this document.",
         {"document", "chart", "page", "form", "diagram", "flowchart", "table"}, false},
        {"scene", tools::ToolId::object, "Describe the scene and the objects in it.",
         {"observe", "scene", "describe", "look", "watch", "count", "pedestrian", "pedestrians", "person",
          "people", "object", "objects"},
         false},
    });
  }

  const std::vector<Intention>& intentions() const noexcept { return intentions_; }
  std::size_t size() const noexcept { return intentions_.size(); }

  const Intention* find(std::string_view label) const {
    const auto it = std::find_if(intentions_.begin(), intentions_.end(),
                                 [&](const Intention& i) { return i.label == label; });
    return it == intentions_.end() ? nullptr : &*it;
  }
  bool contains(std::string_view label) const { return find(label) != nullptr; }

  void add(Intention i) {
    if (i.label.empty()) throw ConfigError("intention label must be non-empty");
    if (contains(i.label)) throw ConfigError("duplicate intention label '" + i.label + "'");
    intentions_.push_back(std::move(i));
  }

  /// Registers a label proposed by the VLM with no tool, flagged for the user.
  void add_pending(std::string label) {
    if (contains(label)) return;
    add({std::move(label), tools::ToolId::none, "", {}, true});
  }

  void confirm(std::string_view label) {
    for (auto& i : intentions_)
      if (i.label == label) i.pending = false;
  }

  friend bool operator==(const TaskSpace& a, const TaskSpace& b) {
    if (a.intentions_.size() != b.intentions_.size()) return false;
    for (std::size_t k = 0; k < a.intentions_.size(); ++k) {
      const auto& x = a.intentions_[k];
      const auto& y = b.intentions_[k];
      if (x.label != y.label || x.tool != y.tool || x.prompt != y.prompt || x.keywords != y.keywords ||
          x.pending != y.pending)
        return false;
    }
    return true;
  }

 private:
  std::vector<Intention> intentions_;
};

// ---------------------------------------------------------------------------
// Stored commands

struct StoredCommand {
  std::string text;
  double timestamp = 0.0;

  friend bool operator==(const StoredCommand&, const StoredCommand&) = default;
};

/// Bounded command history, oldest first. Re-adding a command refreshes it.
class CommandMemory {
 public:
  CommandMemory() : CommandMemory(16) {}
  explicit CommandMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("command memory capacity must be positive");
  }

  void add(std::string text, double timestamp) {
    std::erase_if(entries_, [&](const StoredCommand& c) { return c.text == text; });
    entries_.push_back({std::move(text), timestamp});
    if (entries_.size() > capacity_) entries_.erase(entries_.begin());
  }

  const std::vector<StoredCommand>& entries() const noexcept { return entries_; }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const CommandMemory&, const CommandMemory&) = default;

 private:
  std::size_t capacity_;
  std::vector<StoredCommand> entries_;
};

/// Lowercase tokens with a plural 's' stripped ("pedestrians" -> "pedestrian").
inline std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> out;
  for (auto t : metrics::tokenize(text)) {
    if (t.size() > 3 && t.back() == 's' && t[t.size() - 2] != 's') t.pop_back();
    out.insert(std::move(t));
  }
  return out;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

inline constexpr double kMinRetrievalScore = 0.1;

/// Stored command most similar (token-set Jaccard) to `context`; newest wins
/// ties; nothing below the minimum score.
inline std::optional<std::string> retrieve_command(const CommandMemory& memory, std::string_view context) {
  const auto ctx = token_set(context);
  std::optional<std::string> best;
  double best_score = kMinRetrievalScore;
  // Newest first, so a later equal score never displaces it.
  for (auto it = memory.entries().rbegin(); it != memory.entries().rend(); ++it) {
    const double s = jaccard(token_set(it->text), ctx);
    if (s > best_score || (!best && s >= best_score)) {
      best_score = s;
      best = it->text;
    }
  }
  return best;
}

/// Decides whether a voice command is worth keeping for other tasks.
class CommandTagger {
 public:
  virtual ~CommandTagger() = default;
  virtual bool generalizable(std::string_view command) const = 0;
};

/// Rejects commands carrying attribute modifiers (colours, clothing terms).
class StopListTagger final : public CommandTagger {
 public:
  StopListTagger() : stop_{default_stop_list()} {}
  explicit StopListTagger(std::vector<std::string> stop) : stop_(std::move(stop)) {}

  static std::vector<std::string> default_stop_list() {
    return {"black", "white", "red",   "green",  "blue",  "yellow", "orange", "purple", "pink",
            "brown", "gray",  "grey",  "clothing", "clothes", "shirt", "jacket", "coat", "dress",
            "hat",   "wearing"};
  }

  bool generalizable(std::string_view command) const override {
    const auto tokens = token_set(command);
    if (tokens.empty()) return false;
    return std::none_of(stop_.begin(), stop_.end(), [&](const std::string& s) {
      const auto stem = token_set(s);
      return std::any_of(stem.begin(), stem.end(), [&](const std::string& t) { return tokens.count(t) > 0; });
    });
  }

  const std::vector<std::string>& stop_list() const noexcept { return stop_; }

 private:
  std::vector<std::string> stop_;
};

// ---------------------------------------------------------------------------
// State machine

enum class Mode { probing, task_active };

struct IntentState {
  Mode mode = Mode::probing;
  std::string label;
  double now = 0.0;
  std::optional<double> last_check_time;
  std::optional<double> last_probe_time;
  bool probe_outstanding = false;
  double check_period = 1.0;
  int retries = 0;
  TaskSpace space = TaskSpace::defaults();
  CommandMemory memory;

  friend bool operator==(const IntentState&, const IntentState&) = default;
};

namespace event {
struct Tick {
  double t = 0.0;
};
struct Voice {
  std::string command;
};
/// Result of a probe round trip; empty when the oracle failed.
struct ProbeResult {
  std::optional<std::string> label;
};
struct Delta {
  int value = 1;
};
}  // namespace event

using Event = std::variant<event::Tick, event::Voice, event::ProbeResult, event::Delta>;

enum class ActionKind { capture_probe, select_tool, capture_task, consistency_check };

inline std::string_view to_string(ActionKind k) noexcept {
  switch (k) {
    case ActionKind::capture_probe: return "capture_probe";
    case ActionKind::select_tool: return "select_tool";
    case ActionKind::capture_task: return "capture_task";
    case ActionKind::consistency_check: return "consistency_check";
  }
  return "unknown";
}

struct Action {
  ActionKind kind;
  std::string label;

  friend bool operator==(const Action&, const Action&) = default;
};

struct StepResult {
  IntentState state;
  std::vector<Action> actions;
  std::vector<std::string> diagnostics;
};

inline constexpr double kTimeEpsilon = 1e-9;

inline bool period_elapsed(const std::optional<double>& last, double now, double period) {
  return !last || now - *last >= period - kTimeEpsilon;
}

/// Maps a spoken command onto a label: an exact label mention, then intention
/// keywords in task-space order; otherwise the normalized command itself.
inline std::string parse_voice_label(std::string_view command, const TaskSpace& space) {
  const auto norm = metrics::normalize_answer(command);
  for (const auto& i : space.intentions())
    if (norm == i.label) return i.label;
  const auto tokens = metrics::tokenize(command);
  for (const auto& i : space.intentions())
    for (const auto& t : tokens)
      if (t == i.label || std::find(i.keywords.begin(), i.keywords.end(), t) != i.keywords.end()) return i.label;
  return norm;
}

/// Pure transition function of the intention loop.
///   Probing    + tick          -> capture_probe (once per period, none while one is outstanding)
///   Probing    + probe_result  -> TaskActive(l), select_tool, capture_task
///   TaskActive + tick          -> capture_task, consistency_check (once per period)
///   TaskActive + delta(0)      -> Probing, capture_probe
///   any        + voice(cmd)    -> TaskActive(parsed), select_tool, capture_task
/// Anything else leaves the state unchanged and records a diagnostic.
inline StepResult step(const IntentState& state, const Event& ev, const CommandTagger& tagger) {
  StepResult r{state, {}, {}};
  auto& s = r.state;

  auto enter_task = [&](std::string label) {
    s.mode = Mode::task_active;
    s.label = std::move(label);
    s.last_check_time = s.now;
    s.probe_outstanding = false;
    r.actions.push_back({ActionKind::select_tool, s.label});
    r.actions.push_back({ActionKind::capture_task, s.label});
  };

  if (const auto* tick = std::get_if<event::Tick>(&ev)) {
    if (tick->t < s.now - kTimeEpsilon) {
      r.state = state;
      r.diagnostics.push_back("tick moves time backwards");
      return r;
    }
    s.now = tick->t;
    if (s.mode == Mode::probing) {
      if (!s.probe_outstanding && period_elapsed(s.last_probe_time, s.now, s.check_period)) {
        s.last_probe_time = s.now;
        s.probe_outstanding = true;
        r.actions.push_back({ActionKind::capture_probe, ""});
      }
    } else if (period_elapsed(s.last_check_time, s.now, s.check_period)) {
      s.last_check_time = s.now;
      r.actions.push_back({ActionKind::capture_task, s.label});
      r.actions.push_back({ActionKind::consistency_check, s.label});
    }
    return r;
  }

  if (const auto* voice = std::get_if<event::Voice>(&ev)) {
    if (metrics::normalize_answer(voice->command).empty()) {
      r.diagnostics.push_back("empty voice command");
      return r;
    }
    auto label = parse_voice_label(voice->command, s.space);
    if (!s.space.contains(label)) s.space.add_pending(label);
    if (tagger.generalizable(voice->command)) s.memory.add(voice->command, s.now);
    enter_task(std::move(label));
    return r;
  }

  if (const auto* probe = std::get_if<event::ProbeResult>(&ev)) {
    if (s.mode != Mode::probing) {
      r.diagnostics.push_back("probe result while a task is active");
      return r;
    }
    s.probe_outstanding = false;
    if (!probe->label || probe->label->empty()) {
      ++s.retries;
      r.diagnostics.push_back("intention prediction failed; retrying next period");
      return r;
    }
    if (!s.space.contains(*probe->label)) s.space.add_pending(*probe->label);
    enter_task(*probe->label);
    return r;
  }

  const auto& delta = std::get<event::Delta>(ev);
  if (s.mode != Mode::task_active) {
    r.diagnostics.push_back("consistency verdict while probing");
    return r;
  }
  if (delta.value != 0 && delta.value != 1) {
    r.diagnostics.push_back("consistency verdict must be 0 or 1");
    return r;
  }
  if (delta.value == 0) {
    s.mode = Mode::probing;
    s.label.clear();
    s.last_probe_time = s.now;
    s.probe_outstanding = true;
    r.actions.push_back({ActionKind::capture_probe, ""});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Oracle-facing operations

/// Cloud-side VLM plus the scripted user inputs that drive a scenario. Every
/// call receives the scenario step it belongs to. Empty optionals mean the
/// oracle failed; implementations throw OracleGapError when they have no
/// answer at all.
class VlmOracle {
 public:
  virtual ~VlmOracle() = default;
  virtual std::optional<std::string> predict(const ImageBuffer& probe, const TaskSpace& space, long step) = 0;
  virtual std::optional<bool> consistent(const ImageBuffer& task_image, std::string_view label, long step) = 0;
  /// Free-text description of the inferred intention, used for command retrieval.
  virtual std::optional<std::string> context(long step) = 0;
  /// Voice command the user speaks at this step ("" for none).
  virtual std::string voice(long step) = 0;
};

/// Asks the oracle for the intention behind a 256 x 256 probe. Unknown labels
/// join the task space as pending. Empty on oracle failure.
inline std::optional<std::string> predict_intention(const ImageBuffer& probe, TaskSpace& space, VlmOracle& oracle,
                                                    long step) {
  if (probe.height() != tools::kProbeSize || probe.width() != tools::kProbeSize)
    throw ParameterError("intention probes must be 256x256");
  auto label = oracle.predict(probe, space, step);
  if (!label || label->empty()) return std::nullopt;
  if (!space.contains(*label)) space.add_pending(*label);
  return label;
}

/// Consistency verdict delta, at most once per check period. Empty when the
/// cadence suppresses the check; oracle failure counts as delta = 1.
inline std::optional<int> check_consistency(const ImageBuffer& task_image, std::string_view label,
                                            VlmOracle& oracle, IntentState& state, double now, long step,
                                            std::vector<std::string>* log = nullptr) {
  if (state.mode != Mode::task_active || state.label != label)
    throw ParameterError("consistency check requires the matching active task");
  if (!period_elapsed(state.last_check_time, now, state.check_period)) return std::nullopt;
  state.last_check_time = now;
  const auto verdict = oracle.consistent(task_image, label, step);
  if (!verdict) {
    if (log) log->push_back("consistency oracle failed at step " + std::to_string(step) + "; staying on task");
    return 1;
  }
  return *verdict ? 1 : 0;
}

/// Tool bound to `label`; pending labels are bound to `none` (full frame).
inline tools::ToolId select_tool(std::string_view label, const tools::ToolRegistry& registry,
                                 const TaskSpace& space) {
  const auto* i = space.find(label);
  if (!i) throw ToolError("label '" + std::string(label) + "' has no tool binding");
  if (i->pending || !registry.has(i->tool)) return tools::ToolId::none;
  return i->tool;
}

}  // namespace semlink::intent

#endif  // SEMLINK_INTENT_CONTROLLER_HPP
