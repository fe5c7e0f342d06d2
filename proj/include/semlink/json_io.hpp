#ifndef SEMLINK_JSON_IO_HPP
#define SEMLINK_JSON_IO_HPP

// JSON persistence for the task space, command memory, corpus annotations,
// corpus specs and synonym tables.

#include <fstream>
#include <string>

#include <json.hpp>

#include "semlink/corpus.hpp"
#include "semlink/error.hpp"
#include "semlink/intent_controller.hpp"
#include "semlink/metrics.hpp"

namespace semlink::io {

using nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

/// Typed field access that reports ConfigError instead of json exceptions.
template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

// -- task space / command memory -------------------------------------------

inline json to_json(const intent::TaskSpace& space) {
  json arr = json::array();
  for (const auto& i : space.intentions())
    arr.push_back({{"label", i.label},
                   {"tool", std::string(tools::to_string(i.tool))},
                   {"prompt", i.prompt},
                   {"keywords", i.keywords},
                   {"pending", i.pending}});
  return {{"intentions", arr}};
}

inline intent::TaskSpace task_space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("intentions") || !j.at("intentions").is_array())
    throw ConfigError("task space needs an 'intentions' array");
  intent::TaskSpace space;
  for (const auto& e : j.at("intentions")) {
    intent::Intention i;
    i.label = get_or<std::string>(e, "label", "");
    if (!e.contains("tool")) throw ConfigError("intention '" + i.label + "' has no tool binding");
    try {
      i.tool = tools::tool_from_string(e.at("tool").get<std::string>());
    } catch (const Error& err) {
      throw ConfigError(err.what());
    }
    i.prompt = get_or<std::string>(e, "prompt", "");
    i.keywords = get_or<std::vector<std::string>>(e, "keywords", {});
    i.pending = get_or<bool>(e, "pending", false);
    space.add(std::move(i));
  }
  return space;
}

inline json to_json(const intent::CommandMemory& memory) {
  json entries = json::array();
  for (const auto& c : memory.entries()) entries.push_back({{"text", c.text}, {"timestamp", c.timestamp}});
  return {{"capacity", memory.capacity()}, {"entries", entries}};
}

inline intent::CommandMemory command_memory_from_json(const json& j) {
  intent::CommandMemory memory(get_or<std::size_t>(j, "capacity", 16));
  if (j.contains("entries"))
    for (const auto& e : j.at("entries"))
      memory.add(get_or<std::string>(e, "text", ""), get_or<double>(e, "timestamp", 0.0));
  return memory;
}

// -- corpus --------------------------------------------------------------------

inline json to_json(const PixelBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

inline PixelBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("a box is [x0, y0, x1, y1]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline json to_json(const corpus::Annotation& a) {
  json boxes = json::array();
  for (const auto& d : a.boxes)
    boxes.push_back({{"box", to_json(d.box)},
                     {"confidence", d.confidence},
                     {"category", d.category},
                     {"attribute", d.attribute}});
  json qa = json::array();
  for (const auto& q : a.qa_pairs) {
    json e = {{"question", q.question}, {"answers", q.answers}};
    if (q.region) e["region"] = to_json(*q.region);
    qa.push_back(std::move(e));
  }
  return {{"id", a.id},
          {"kind", std::string(corpus::to_string(a.kind))},
          {"text", a.text},
          {"boxes", boxes},
          {"categories", a.categories},
          {"qa_pairs", qa}};
}

inline corpus::Annotation annotation_from_json(const json& j) {
  corpus::Annotation a;
  a.id = get_or<std::string>(j, "id", "");
  a.kind = corpus::kind_from_string(get_or<std::string>(j, "kind", "receipt"));
  a.text = get_or<std::string>(j, "text", "");
  if (j.contains("boxes"))
    for (const auto& b : j.at("boxes"))
      a.boxes.push_back({box_from_json(b.at("box")), get_or<double>(b, "confidence", 1.0),
                         get_or<std::string>(b, "category", ""), get_or<std::string>(b, "attribute", "")});
  a.categories = get_or<std::vector<std::string>>(j, "categories", {});
  if (j.contains("qa_pairs"))
    for (const auto& q : j.at("qa_pairs")) {
      corpus::QaPair p{get_or<std::string>(q, "question", ""), get_or<std::vector<std::string>>(q, "answers", {}),
                       std::nullopt};
      if (q.contains("region")) p.region = box_from_json(q.at("region"));
      a.qa_pairs.push_back(std::move(p));
    }
  return a;
}

inline corpus::Spec corpus_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("corpus spec must be an object");
  corpus::Spec s;
  s.kind = corpus::kind_from_string(get_or<std::string>(j, "kind", "receipt"));
  s.count = get_or<int>(j, "count", 1);
  s.seed = get_or<std::uint64_t>(j, "seed", 1);
  s.content_w = get_or<int>(j, "width", 0);
  s.content_h = get_or<int>(j, "height", 0);
  if (j.contains("augmentation")) {
    const auto& aug = j.at("augmentation");
    s.padding = get_or<double>(aug, "padding", s.padding);
    if (aug.contains("noise_sigma")) {
      const auto& n = aug.at("noise_sigma");
      if (n.is_array() && n.size() == 2) {
        s.noise_min = n[0].get<double>();
        s.noise_max = n[1].get<double>();
      } else if (n.is_number()) {
        s.noise_min = s.noise_max = n.get<double>();
      } else {
        throw ConfigError("noise_sigma is a number or a [min, max] pair");
      }
    }
    s.lighting_jitter = get_or<double>(aug, "lighting_jitter", s.lighting_jitter);
  }
  s.blurred_fraction = get_or<double>(j, "blurred_fraction", s.blurred_fraction);
  s.validate();
  return s;
}

// -- synonyms ------------------------------------------------------------------

inline metrics::SynonymTable synonyms_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("synonym table must map categories to lists");
  metrics::SynonymTable t;
  for (const auto& [k, v] : j.items()) t[k] = v.get<std::vector<std::string>>();
  return t;
}

}  // namespace semlink::io

#endif  // SEMLINK_JSON_IO_HPP
