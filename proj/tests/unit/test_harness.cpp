#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "semlink/semlink.hpp"

using namespace semlink;
using namespace semlink::sim;
using intent::ScriptedOracle;
using intent::Trigger;

namespace {

std::function<std::unique_ptr<intent::VlmOracle>()> oracle_of(std::vector<ScriptedOracle::Record> records) {
  auto shared = std::make_shared<const ScriptedOracle>(std::move(records));
  return [shared] { return std::make_unique<ScriptedOracle>(*shared); };
}

ScenarioConfig small(corpus::Kind kind, int count, int w = 160, int h = 120) {
  ScenarioConfig c;
  c.corpus.kind = kind;
  c.corpus.count = count;
  c.corpus.seed = 3;
  c.corpus.content_w = w;
  c.corpus.content_h = h;
  c.synonyms = io::synonyms_from_json(io::read_json_file(SEMLINK_DATA_DIR "/synonyms.json"));
  return c;
}

}  // namespace

TEST(Corpus, PaddingArithmetic) {
  EXPECT_EQ(corpus::padded_extent(640, 0.30), 832);
  EXPECT_EQ(corpus::padded_extent(480, 0.30), 624);
  corpus::Spec s;
  s.kind = corpus::Kind::document;
  const auto item = corpus::generate_item(s, 0);
  EXPECT_EQ(item.image.width(), 832);
  EXPECT_EQ(item.image.height(), 624);
}

TEST(Corpus, Deterministic) {
  corpus::Spec s;
  s.kind = corpus::Kind::receipt;
  s.count = 4;
  s.seed = 1;
  const auto a = corpus::generate_corpus(s);
  const auto b = corpus::generate_corpus(s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(io::to_json(a[i].annotation), io::to_json(b[i].annotation));
  }
  EXPECT_NE(a[0].image, a[1].image);
}

TEST(Corpus, AnnotationsAreConsistent) {
  for (auto kind : {corpus::Kind::receipt, corpus::Kind::document, corpus::Kind::scene}) {
    corpus::Spec s;
    s.kind = kind;
    s.count = 12;
    s.seed = 9;
    for (const auto& item : corpus::generate_corpus(s)) {
      const auto& a = item.annotation;
      EXPECT_TRUE(item.image.in_unit_range());
      ASSERT_FALSE(a.qa_pairs.empty()) << a.id;
      for (const auto& q : a.qa_pairs) {
        EXPECT_FALSE(q.answers.empty());
        if (q.region) {
          EXPECT_TRUE(item.image.frame().contains(*q.region));
        }
      }
      for (const auto& d : a.boxes) EXPECT_TRUE(item.image.frame().contains(d.box));
      if (kind == corpus::Kind::receipt) {
        for (const auto& q : a.qa_pairs)
          EXPECT_NE(a.text.find(q.answers.front()), std::string::npos) << a.id;
      }
      if (kind == corpus::Kind::scene) {
        EXPECT_GE(a.boxes.size(), 4u) << a.id;
        EXPECT_GE(a.categories.size(), 2u) << a.id;
      }
      const auto back = io::annotation_from_json(io::to_json(a));
      EXPECT_EQ(io::to_json(back), io::to_json(a));
    }
  }
}

TEST(Corpus, BlurredReceiptsAreLessSharp) {
  corpus::Spec sharp;
  sharp.kind = corpus::Kind::receipt;
  sharp.blurred_fraction = 0.0;
  auto blurred = sharp;
  blurred.blurred_fraction = 1.0;
  double s0 = 0, s1 = 0;
  for (int i = 0; i < 5; ++i) {
    s0 += tools::sharpness_score(corpus::generate_item(sharp, i).image);
    s1 += tools::sharpness_score(corpus::generate_item(blurred, i).image);
  }
  EXPECT_LT(s1, 0.5 * s0);
}

TEST(Cells, CrossProduct) {
  ScenarioConfig c;
  c.chain = phy::Chain::semantic;
  c.snr_db = {15, 0, 10, 5};
  c.seeds.clear();
  for (std::uint64_t s = 1; s <= 50; ++s) c.seeds.push_back(s);
  EXPECT_EQ(make_cells(c).size(), 200u);
  c.n = {2, 4};
  const auto cells = make_cells(c);
  EXPECT_EQ(cells.size(), 400u);
  EXPECT_EQ(cells.front().snr_db, 0.0);
  EXPECT_EQ(cells.front().n, 2);
  c.chain = phy::Chain::baseline;
  EXPECT_EQ(make_cells(c).size(), 200u);
  EXPECT_EQ(make_cells(c).front().n, 0);
}

TEST(Focus, FromCommand) {
  const auto syn = io::synonyms_from_json(io::read_json_file(SEMLINK_DATA_DIR "/synonyms.json"));
  const std::vector<std::string> attrs = {"black", "red"};
  auto f = focus_from_command("Observe the person in black clothing", syn, attrs);
  EXPECT_EQ(f.categories, std::vector<std::string>{"person"});
  EXPECT_EQ(f.attributes, std::vector<std::string>{"black"});
  f = focus_from_command("Observe pedestrians", syn, attrs);
  EXPECT_EQ(f.categories, std::vector<std::string>{"person"});
  EXPECT_TRUE(f.attributes.empty());
  EXPECT_TRUE(focus_from_command("read the menu", syn, attrs).empty());
}

TEST(Harness, BaselineFarBelowThresholdFails) {
  auto c = small(corpus::Kind::document, 3);
  c.snr_db = {-10.0};
  const auto r = run_scenario(c);
  ASSERT_EQ(r.outcomes.size(), 1u);
  for (const auto& o : r.outcomes[0]) {
    EXPECT_FALSE(o.success);
    for (const auto& rec : o.records) EXPECT_FALSE(rec.delivered);
  }
}

TEST(Harness, BaselineHighSnrSucceeds) {
  auto c = small(corpus::Kind::document, 3, 320, 240);
  c.snr_db = {40.0};
  const auto r = run_scenario(c);
  EXPECT_EQ(metrics::success_rate(r.outcomes[0]), 1.0);
}

TEST(Harness, DirectVoiceReceiptsSendText) {
  auto c = small(corpus::Kind::receipt, 6, 320, 480);
  c.mode = Mode::direct_voice;
  c.snr_db = {20.0};
  c.oracle_factory = oracle_of({{Trigger::voice, std::nullopt, "Read the receipt"}});
  const auto r = run_scenario(c);
  double bytes = 0;
  for (const auto& e : r.ledger) {
    EXPECT_EQ(e.record.chain, phy::Chain::text);
    bytes += static_cast<double>(e.record.payload_bytes);
  }
  EXPECT_EQ(r.ledger.size(), 6u);
  EXPECT_LT(bytes / static_cast<double>(r.ledger.size()), 1024.0);
}

TEST(Harness, EmptyVoiceIsAnOracleGap) {
  auto c = small(corpus::Kind::receipt, 1);
  c.mode = Mode::direct_voice;
  c.oracle_factory = oracle_of({{Trigger::voice, std::nullopt, ""}});
  EXPECT_THROW(run_scenario(c), OracleGapError);
}

TEST(Harness, MissingScriptIsAnOracleGap) {
  auto c = small(corpus::Kind::scene, 1);
  c.mode = Mode::intention_aware;
  c.chain = phy::Chain::semantic;
  c.oracle_factory = oracle_of({{Trigger::consistency, std::nullopt, "1"}});
  EXPECT_THROW(run_scenario(c), OracleGapError);
}

TEST(Harness, FallbackProbeFollowsDeltaZero) {
  auto c = small(corpus::Kind::scene, 1);
  c.mode = Mode::intention_aware;
  c.chain = phy::Chain::semantic;
  c.snr_db = {15.0};
  c.frames_per_task = 12;
  c.oracle_factory = oracle_of({{Trigger::predict, std::nullopt, "scene"},
                                {Trigger::consistency, std::nullopt, "1"},
                                {Trigger::consistency, 5, "0"}});
  const auto r = run_scenario(c);
  std::vector<long> probe_steps;
  for (const auto& e : r.ledger)
    if (e.purpose == Purpose::probe) {
      probe_steps.push_back(e.step);
      EXPECT_EQ(e.height, 256);
      EXPECT_EQ(e.width, 256);
    }
  EXPECT_EQ(probe_steps, (std::vector<long>{0, 6}));
  EXPECT_EQ(r.stats[0].fallbacks, 1);
  EXPECT_EQ(r.stats[0].consistency_checks, 10);
}

TEST(Harness, SemanticGracefulWithSnr) {
  auto c = small(corpus::Kind::document, 2);
  c.chain = phy::Chain::semantic;
  c.channel.flat = true;
  c.snr_db = {0, 5, 10, 15, 20, 25};
  const auto rows = summarize_cells(run_scenario(c));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(*rows[i].psnr_db, *rows[i - 1].psnr_db);
}

TEST(Harness, SweepCsvIsDeterministic) {
  auto c = small(corpus::Kind::scene, 2);
  c.mode = Mode::intention_aware;
  c.chain = phy::Chain::semantic;
  c.snr_db = {5, 10};
  c.seeds = {1, 2};
  c.n = {4, 8};
  c.oracle_factory = oracle_of({{Trigger::predict, std::nullopt, "scene"}, {Trigger::consistency, std::nullopt, "1"}});
  const auto a = sweep_csv(c, run_scenario(c));
  const auto b = sweep_csv(c, run_scenario(c));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), sweep_csv_header());
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 9);
  c.master_seed = 2;
  EXPECT_NE(sweep_csv(c, run_scenario(c)), a);
}

TEST(Harness, BlurFilterKeepsFraction) {
  auto c = small(corpus::Kind::receipt, 20, 80, 120);
  c.blur_filter = 0.10;
  c.mode = Mode::direct_voice;
  c.oracle_factory = oracle_of({{Trigger::voice, std::nullopt, "read"}});
  const auto r = run_scenario(c);
  EXPECT_EQ(r.corpus_size, 20u);
  EXPECT_EQ(r.kept.size(), 18u);
  EXPECT_EQ(r.outcomes[0].size(), 18u);
}

TEST(Config, ParsesAndValidates) {
  const auto j = nlohmann::json::parse(R"({
    "scenario": "t", "case": "document", "mode": "full_image", "chain": "semantic",
    "n": [4, 8], "snr_db": {"from": 0, "to": 10, "step": 5}, "seeds": {"start": 3, "count": 2},
    "corpus": {"kind": "scene", "count": 2, "width": 64, "height": 48},
    "channel": {"k": 32, "num_taps": 4, "model": "flat"}
  })");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.corpus.kind, corpus::Kind::document);
  EXPECT_EQ(c.n, (std::vector<int>{4, 8}));
  EXPECT_EQ(c.snr_db, (std::vector<double>{0, 5, 10}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_TRUE(c.channel.flat);
  EXPECT_EQ(c.channel.k, 32);

  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"mode": "telepathy"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"mode": "intention_aware"})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"chain": "semantic", "n": 3})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"channel": {"model": "rician"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse("[1]")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = std::filesystem::path(SEMLINK_DATA_DIR).parent_path() / "configs";
  int loaded = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json" || entry.path().stem().string().rfind("corpus_", 0) == 0) continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    ++loaded;
  }
  EXPECT_GE(loaded, 8);
}
