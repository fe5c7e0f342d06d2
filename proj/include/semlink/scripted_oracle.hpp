#ifndef SEMLINK_SCRIPTED_ORACLE_HPP
#define SEMLINK_SCRIPTED_ORACLE_HPP

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semlink/error.hpp"
#include "semlink/intent_controller.hpp"

namespace semlink::intent {

enum class Trigger { predict, consistency, context, voice };

inline std::string_view to_string(Trigger t) noexcept {
  switch (t) {
    case Trigger::predict: return "predict";
    case Trigger::consistency: return "consistency";
    case Trigger::context: return "context";
    case Trigger::voice: return "voice";
  }
  return "unknown";
}

inline Trigger trigger_from_string(std::string_view s) {
  if (s == "predict") return Trigger::predict;
  if (s == "consistency") return Trigger::consistency;
  if (s == "context") return Trigger::context;
  if (s == "voice") return Trigger::voice;
  throw ConfigError("unknown oracle trigger '" + std::string(s) + "'");
}

/// Replays scripted responses keyed by (trigger, step). A record whose step
/// is "*" answers any step without an exact record. The response "!fail"
/// simulates an oracle failure. Consistency responses are "1"/"0" (or
/// true/false in JSON).
class ScriptedOracle final : public VlmOracle {
 public:
  static constexpr std::string_view kFailure = "!fail";

  struct Record {
    Trigger trigger;
    std::optional<long> step;  // empty = wildcard
    std::string response;
  };

  ScriptedOracle() = default;
  explicit ScriptedOracle(std::vector<Record> records) {
    for (auto& r : records) add(std::move(r));
  }

  void add(Record r) {
    auto& slot = table_[static_cast<int>(r.trigger)];
    if (r.step) slot.exact[*r.step] = std::move(r.response);
    else slot.wildcard = std::move(r.response);
  }

  /// Accepts either a bare array of records or {"records": [...]}.
  static ScriptedOracle from_json(const nlohmann::json& doc) {
    const auto& arr = doc.is_object() && doc.contains("records") ? doc.at("records") : doc;
    if (!arr.is_array()) throw ConfigError("oracle script must be an array of records");
    ScriptedOracle o;
    for (const auto& rec : arr) {
      if (!rec.is_object() || !rec.contains("trigger") || !rec.contains("response"))
        throw ConfigError("oracle record needs 'trigger' and 'response'");
      Record r{trigger_from_string(rec.at("trigger").get<std::string>()), std::nullopt, {}};
      if (rec.contains("step")) {
        const auto& s = rec.at("step");
        if (s.is_string() && s.get<std::string>() == "*") r.step = std::nullopt;
        else if (s.is_number_integer()) r.step = s.get<long>();
        else throw ConfigError("oracle record step must be an integer or \"*\"");
      }
      const auto& resp = rec.at("response");
      if (resp.is_boolean()) r.response = resp.get<bool>() ? "1" : "0";
      else if (resp.is_number_integer()) r.response = std::to_string(resp.get<long>());
      else if (resp.is_string()) r.response = resp.get<std::string>();
      else throw ConfigError("oracle response must be a string, integer or boolean");
      o.add(std::move(r));
    }
    return o;
  }

  static ScriptedOracle load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open oracle script '" + path + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("oracle script '" + path + "': " + e.what());
    }
  }

  std::optional<std::string> predict(const ImageBuffer&, const TaskSpace&, long step) override {
    const auto& r = lookup(Trigger::predict, step);
    if (r == kFailure) return std::nullopt;
    return r;
  }

  std::optional<bool> consistent(const ImageBuffer&, std::string_view, long step) override {
    const auto& r = lookup(Trigger::consistency, step);
    if (r == kFailure) return std::nullopt;
    if (r == "1" || r == "true") return true;
    if (r == "0" || r == "false") return false;
    throw ConfigError("consistency response at step " + std::to_string(step) + " must be 0 or 1");
  }

  std::optional<std::string> context(long step) override {
    const auto& r = lookup(Trigger::context, step);
    if (r == kFailure) return std::nullopt;
    return r;
  }

  std::string voice(long step) override { return lookup(Trigger::voice, step); }

  /// Number of lookups served so far, per trigger.
  long calls(Trigger t) const { return calls_[static_cast<int>(t)]; }

 private:
  struct Slot {
    std::map<long, std::string> exact;
    std::optional<std::string> wildcard;
  };

  const std::string& lookup(Trigger t, long step) {
    const auto& slot = table_[static_cast<int>(t)];
    ++calls_[static_cast<int>(t)];
    if (const auto it = slot.exact.find(step); it != slot.exact.end()) return it->second;
    if (slot.wildcard) return *slot.wildcard;
    throw OracleGapError(std::string(to_string(t)), step);
  }

  Slot table_[4];
  long calls_[4] = {0, 0, 0, 0};
};

}  // namespace semlink::intent

#endif  // SEMLINK_SCRIPTED_ORACLE_HPP
