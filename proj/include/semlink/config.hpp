#ifndef SEMLINK_CONFIG_HPP
#define SEMLINK_CONFIG_HPP

// Scenario configuration from JSON. Relative paths inside a config resolve
// against the config file's directory.

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "semlink/harness.hpp"
#include "semlink/json_io.hpp"
#include "semlink/scripted_oracle.hpp"

namespace semlink::sim {

inline constexpr const char* kSeedEnv = "SEMLINK_SEED";

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

template <typename T>
std::vector<T> list_or_scalar(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

inline std::vector<std::uint64_t> parse_seeds(const nlohmann::json& j) {
  if (!j.contains("seeds")) return {1};
  const auto& s = j.at("seeds");
  if (s.is_object()) {
    const auto count = io::get_or<long>(s, "count", 1);
    const auto start = io::get_or<std::uint64_t>(s, "start", 1);
    if (count < 1) throw ConfigError("seeds.count must be positive");
    std::vector<std::uint64_t> out;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<std::uint64_t>(i));
    return out;
  }
  return list_or_scalar<std::uint64_t>(j, "seeds", {1});
}

inline std::vector<double> parse_snr(const nlohmann::json& j) {
  if (!j.contains("snr_db")) return {10.0};
  const auto& s = j.at("snr_db");
  if (s.is_object()) {
    const double from = io::get_or<double>(s, "from", 0.0), to = io::get_or<double>(s, "to", 0.0);
    const double step = io::get_or<double>(s, "step", 1.0);
    if (!(step > 0.0) || to < from) throw ConfigError("snr_db range needs step > 0 and to >= from");
    std::vector<double> out;
    for (long i = 0; from + i * step <= to + 1e-9; ++i) out.push_back(from + i * step);
    return out;
  }
  return list_or_scalar<double>(j, "snr_db", {10.0});
}

}  // namespace detail

/// Master seed override from the environment, if set and numeric.
inline std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv(kSeedEnv);
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const auto seed = std::strtoull(v, &end, 10);
  if (*end != '\0') throw ConfigError(std::string(kSeedEnv) + " must be a non-negative integer");
  return seed;
}

inline ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  ScenarioConfig c;
  try {
    c.name = io::get_or<std::string>(j, "scenario", c.name);
    c.mode = mode_from_string(io::get_or<std::string>(j, "mode", "full_image"));
    c.chain = phy::chain_from_string(io::get_or<std::string>(j, "chain", "baseline"));
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  c.n = detail::list_or_scalar<int>(j, "n", c.n);
  c.snr_db = detail::parse_snr(j);
  c.seeds = detail::parse_seeds(j);
  c.master_seed = io::get_or<std::uint64_t>(j, "master_seed", c.master_seed);
  c.probe_n = io::get_or<int>(j, "probe_n", c.probe_n);
  c.frames_per_task = io::get_or<int>(j, "frames_per_task", c.frames_per_task);
  c.check_period = io::get_or<double>(j, "check_period", c.check_period);
  c.blur_filter = io::get_or<double>(j, "blur_filter", c.blur_filter);
  c.baseline_quality = io::get_or<int>(j, "baseline_quality", c.baseline_quality);

  if (j.contains("corpus")) {
    const auto& cj = j.at("corpus");
    c.corpus = cj.is_string() ? io::corpus_spec_from_json(io::read_json_file(detail::resolve(base_dir, cj.get<std::string>())))
                              : io::corpus_spec_from_json(cj);
  }
  if (j.contains("case")) c.corpus.kind = corpus::kind_from_string(j.at("case").get<std::string>());

  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    c.channel.k = io::get_or<int>(ch, "k", c.channel.k);
    c.channel.num_taps = io::get_or<int>(ch, "num_taps", c.channel.num_taps);
    c.channel.abstraction.beta = io::get_or<double>(ch, "beta", c.channel.abstraction.beta);
    c.channel.abstraction.bler_threshold_db =
        io::get_or<double>(ch, "bler_threshold_db", c.channel.abstraction.bler_threshold_db);
    c.channel.abstraction.bler_slope_db = io::get_or<double>(ch, "bler_slope_db", c.channel.abstraction.bler_slope_db);
    const auto model = io::get_or<std::string>(ch, "model", "rayleigh");
    if (model != "rayleigh" && model != "flat") throw ConfigError("channel.model must be 'rayleigh' or 'flat'");
    c.channel.flat = model == "flat";
  }
  if (j.contains("link")) {
    c.link.rate = io::get_or<double>(j.at("link"), "rate", c.link.rate);
    c.link.bits_per_symbol = io::get_or<int>(j.at("link"), "bits_per_symbol", c.link.bits_per_symbol);
  }
  if (j.contains("tools")) {
    const auto& t = j.at("tools");
    c.canny.canny.low = io::get_or<double>(t, "canny_low", c.canny.canny.low);
    c.canny.canny.high = io::get_or<double>(t, "canny_high", c.canny.canny.high);
    c.canny.canny.sigma = io::get_or<double>(t, "canny_sigma", c.canny.canny.sigma);
    c.canny.min_coverage = io::get_or<double>(t, "canny_min_coverage", c.canny.min_coverage);
    c.object.conf_threshold = io::get_or<double>(t, "conf_threshold", c.object.conf_threshold);
    c.object.margin = io::get_or<double>(t, "margin", c.object.margin);
    c.ocr_corruption = io::get_or<double>(t, "ocr_corruption", c.ocr_corruption);
  }
  if (j.contains("task")) {
    c.policy.psnr_threshold_db = io::get_or<double>(j.at("task"), "psnr_threshold_db", c.policy.psnr_threshold_db);
    c.policy.scene_psnr_threshold_db =
        io::get_or<double>(j.at("task"), "scene_psnr_threshold_db", c.policy.scene_psnr_threshold_db);
  }
  if (j.contains("synonyms")) {
    const auto& s = j.at("synonyms");
    c.synonyms = io::synonyms_from_json(s.is_string() ? io::read_json_file(detail::resolve(base_dir, s.get<std::string>())) : s);
  }
  c.attribute_words = io::get_or<std::vector<std::string>>(j, "attribute_words", c.attribute_words);
  c.stored_commands = io::get_or<std::vector<std::string>>(j, "stored_commands", {});
  if (j.contains("task_space")) {
    const auto& s = j.at("task_space");
    c.space = io::task_space_from_json(s.is_string() ? io::read_json_file(detail::resolve(base_dir, s.get<std::string>())) : s);
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    auto script = std::make_shared<const intent::ScriptedOracle>(
        o.is_string() ? intent::ScriptedOracle::load(detail::resolve(base_dir, o.get<std::string>()))
                      : intent::ScriptedOracle::from_json(o));
    c.oracle_factory = [script] { return std::make_unique<intent::ScriptedOracle>(*script); };
  }

  if (const auto env = seed_from_env()) c.master_seed = *env;
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  const auto j = io::read_json_file(path);
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace semlink::sim

#endif  // SEMLINK_CONFIG_HPP
