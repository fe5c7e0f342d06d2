#include <gtest/gtest.h>

#include <json.hpp>

#include "semlink/intent_controller.hpp"
#include "semlink/json_io.hpp"
#include "semlink/scripted_oracle.hpp"

using namespace semlink;
using namespace semlink::intent;

namespace {

const StopListTagger kTagger;

IntentState active(const std::string& label, double now = 0.0) {
  IntentState s;
  s.mode = Mode::task_active;
  s.label = label;
  s.now = now;
  s.last_check_time = now;
  return s;
}

ScriptedOracle script(std::vector<ScriptedOracle::Record> records) { return ScriptedOracle(std::move(records)); }

std::vector<ActionKind> kinds(const StepResult& r) {
  std::vector<ActionKind> out;
  for (const auto& a : r.actions) out.push_back(a.kind);
  return out;
}

const ImageBuffer kProbe(256, 256, 0.5);

}  // namespace

TEST(TaskSpace, DefaultsAndPending) {
  auto space = TaskSpace::defaults();
  EXPECT_EQ(space.size(), 3u);
  EXPECT_EQ(space.find("text-reading")->tool, tools::ToolId::ocr);
  EXPECT_EQ(space.find("document")->tool, tools::ToolId::canny);
  EXPECT_EQ(space.find("scene")->tool, tools::ToolId::object);
  space.add_pending("whiteboard");
  ASSERT_TRUE(space.contains("whiteboard"));
  EXPECT_TRUE(space.find("whiteboard")->pending);
  space.add_pending("whiteboard");
  EXPECT_EQ(space.size(), 4u);
  space.confirm("whiteboard");
  EXPECT_FALSE(space.find("whiteboard")->pending);
  EXPECT_THROW(space.add({"scene", tools::ToolId::none, "", {}, false}), ConfigError);
  EXPECT_THROW(space.add({"", tools::ToolId::none, "", {}, false}), ConfigError);
}

TEST(TaskSpace, JsonRoundTrip) {
  auto space = TaskSpace::defaults();
  space.add_pending("whiteboard");
  EXPECT_EQ(io::task_space_from_json(io::to_json(space)), space);
}

TEST(CommandMemory, BoundedAndRefreshing) {
  CommandMemory m(2);
  m.add("a", 1);
  m.add("b", 2);
  m.add("a", 3);
  ASSERT_EQ(m.entries().size(), 2u);
  EXPECT_EQ(m.entries().back().text, "a");
  m.add("c", 4);
  EXPECT_EQ(m.entries().front().text, "a");
  EXPECT_THROW(CommandMemory(0), ConfigError);
  EXPECT_EQ(io::command_memory_from_json(io::to_json(m)), m);
}

TEST(Retrieve, PedestrianContext) {
  CommandMemory m;
  m.add("Read the menu", 0);
  m.add("Observe pedestrians", 1);
  m.add("Describe the chart", 2);
  EXPECT_EQ(retrieve_command(m, "pedestrian crossing scene"), "Observe pedestrians");
}

TEST(Retrieve, EmptyAndTies) {
  EXPECT_EQ(retrieve_command(CommandMemory{}, "anything"), std::nullopt);
  CommandMemory m;
  m.add("watch cars", 0);
  m.add("watch dogs", 1);
  EXPECT_EQ(retrieve_command(m, "watch"), "watch dogs");
  EXPECT_EQ(retrieve_command(m, "unrelated words"), std::nullopt);
}

TEST(Tagger, RejectsAttributeModifiers) {
  EXPECT_TRUE(kTagger.generalizable("Observe pedestrians"));
  EXPECT_FALSE(kTagger.generalizable("Observe the person in black clothing"));
  EXPECT_FALSE(kTagger.generalizable("find my red clothes"));
  EXPECT_FALSE(kTagger.generalizable("   "));
}

TEST(Step, DeltaZeroRevertsToProbing) {
  const auto r = step(active("document", 5.0), event::Delta{0}, kTagger);
  EXPECT_EQ(r.state.mode, Mode::probing);
  EXPECT_TRUE(r.state.label.empty());
  EXPECT_EQ(kinds(r), std::vector<ActionKind>{ActionKind::capture_probe});
  EXPECT_TRUE(r.state.probe_outstanding);
}

TEST(Step, DeltaOneStays) {
  const auto s = active("document", 5.0);
  const auto r = step(s, event::Delta{1}, kTagger);
  EXPECT_EQ(r.state, s);
  EXPECT_TRUE(r.actions.empty());
}

TEST(Step, VoiceEntersTask) {
  const auto r = step(IntentState{}, event::Voice{"document"}, kTagger);
  EXPECT_EQ(r.state.mode, Mode::task_active);
  EXPECT_EQ(r.state.label, "document");
  ASSERT_FALSE(r.actions.empty());
  EXPECT_EQ(r.actions.front(), (Action{ActionKind::select_tool, "document"}));
}

TEST(Step, VoiceKeywordsAndUnknownLabels) {
  auto r = step(IntentState{}, event::Voice{"Read the receipt total"}, kTagger);
  EXPECT_EQ(r.state.label, "text-reading");
  r = step(IntentState{}, event::Voice{"Observe the person in black clothing"}, kTagger);
  EXPECT_EQ(r.state.label, "scene");
  EXPECT_TRUE(r.state.memory.empty());
  r = step(IntentState{}, event::Voice{"Observe pedestrians"}, kTagger);
  EXPECT_EQ(r.state.memory.entries().size(), 1u);
  r = step(IntentState{}, event::Voice{"Juggle Oranges"}, kTagger);
  EXPECT_EQ(r.state.label, "juggle oranges");
  EXPECT_TRUE(r.state.space.find("juggle oranges")->pending);
  r = step(IntentState{}, event::Voice{""}, kTagger);
  EXPECT_EQ(r.state, IntentState{});
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Step, TickCadence) {
  const auto s = active("scene", 0.0);
  auto r = step(s, event::Tick{0.5}, kTagger);
  EXPECT_TRUE(r.actions.empty());
  EXPECT_EQ(r.state.mode, s.mode);
  EXPECT_EQ(r.state.last_check_time, s.last_check_time);
  r = step(r.state, event::Tick{1.0}, kTagger);
  EXPECT_EQ(kinds(r), (std::vector<ActionKind>{ActionKind::capture_task, ActionKind::consistency_check}));
  r = step(r.state, event::Tick{0.2}, kTagger);
  EXPECT_FALSE(r.diagnostics.empty());
  EXPECT_TRUE(r.actions.empty());
}

TEST(Step, ProbingTicks) {
  auto r = step(IntentState{}, event::Tick{0.0}, kTagger);
  EXPECT_EQ(kinds(r), std::vector<ActionKind>{ActionKind::capture_probe});
  r = step(r.state, event::Tick{3.0}, kTagger);
  EXPECT_TRUE(r.actions.empty());  // still outstanding
  r = step(r.state, event::ProbeResult{std::nullopt}, kTagger);
  EXPECT_EQ(r.state.retries, 1);
  EXPECT_EQ(r.state.mode, Mode::probing);
  r = step(r.state, event::Tick{3.5}, kTagger);
  EXPECT_EQ(kinds(r), std::vector<ActionKind>{ActionKind::capture_probe});
  r = step(r.state, event::ProbeResult{"whiteboard"}, kTagger);
  EXPECT_EQ(r.state.label, "whiteboard");
  EXPECT_TRUE(r.state.space.find("whiteboard")->pending);
}

TEST(Step, InvalidEventsAreDiagnosed) {
  auto r = step(IntentState{}, event::Delta{0}, kTagger);
  EXPECT_FALSE(r.diagnostics.empty());
  r = step(active("scene"), event::Delta{2}, kTagger);
  EXPECT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.state.mode, Mode::task_active);
  r = step(active("scene"), event::ProbeResult{"document"}, kTagger);
  EXPECT_EQ(r.state.label, "scene");
}

TEST(Step, RandomTracesKeepInvariants) {
  Rng rng(77);
  for (int trace = 0; trace < 200; ++trace) {
    IntentState s;
    double t = 0.0;
    int checks = 0;
    for (int k = 0; k < 200; ++k) {
      Event ev;
      switch (rng.uniform_int(0, 4)) {
        case 0: ev = event::Voice{rng.bernoulli(0.5) ? "read this" : "look at the whiteboard"}; break;
        case 1: ev = event::ProbeResult{rng.bernoulli(0.3) ? std::nullopt : std::optional<std::string>("document")}; break;
        case 2: ev = event::Delta{static_cast<int>(rng.uniform_int(0, 1))}; break;
        default: t += rng.uniform(0.0, 0.7); ev = event::Tick{t};
      }
      const auto r1 = step(s, ev, kTagger);
      const auto r2 = step(s, ev, kTagger);
      ASSERT_EQ(r1.state, r2.state);
      ASSERT_EQ(r1.actions, r2.actions);
      s = r1.state;
      for (const auto& a : r1.actions) checks += a.kind == ActionKind::consistency_check;
      if (s.mode == Mode::task_active) ASSERT_TRUE(s.space.contains(s.label));
      else ASSERT_TRUE(s.label.empty());
    }
    ASSERT_LE(checks, static_cast<int>(std::floor(t / s.check_period)) + 1);
  }
}

TEST(Predict, KnownUnknownAndFailure) {
  auto space = TaskSpace::defaults();
  auto o = script({{Trigger::predict, 0, "document"}, {Trigger::predict, 1, "whiteboard"}, {Trigger::predict, 2, "!fail"}});
  EXPECT_EQ(predict_intention(kProbe, space, o, 0), "document");
  EXPECT_EQ(space.size(), 3u);
  EXPECT_EQ(predict_intention(kProbe, space, o, 1), "whiteboard");
  EXPECT_EQ(space.size(), 4u);
  EXPECT_TRUE(space.find("whiteboard")->pending);
  EXPECT_EQ(predict_intention(kProbe, space, o, 2), std::nullopt);
  EXPECT_THROW(predict_intention(kProbe, space, o, 3), OracleGapError);
  EXPECT_THROW(predict_intention(ImageBuffer(128, 128), space, o, 0), ParameterError);
}

TEST(Consistency, VerdictsAndCadence) {
  auto o = script({{Trigger::consistency, std::nullopt, "1"}, {Trigger::consistency, 7, "0"}, {Trigger::consistency, 9, "!fail"}});
  auto s = active("scene", 0.0);
  s.last_check_time.reset();
  EXPECT_EQ(check_consistency(kProbe, "scene", o, s, 0.0, 0), 1);
  EXPECT_EQ(check_consistency(kProbe, "scene", o, s, 0.2, 1), std::nullopt);
  EXPECT_EQ(o.calls(Trigger::consistency), 1);
  EXPECT_EQ(check_consistency(kProbe, "scene", o, s, 1.0, 7), 0);
  std::vector<std::string> log;
  EXPECT_EQ(check_consistency(kProbe, "scene", o, s, 2.0, 9, &log), 1);
  EXPECT_EQ(log.size(), 1u);
  EXPECT_THROW(check_consistency(kProbe, "document", o, s, 5.0, 10), ParameterError);
}

TEST(SelectTool, Bindings) {
  tools::ToolRegistry reg;
  reg.ocr = std::make_shared<tools::AnnotatedOcrEngine>(1.0);
  reg.detector = std::make_shared<tools::AnnotatedDetector>();
  auto space = TaskSpace::defaults();
  space.add_pending("whiteboard");
  EXPECT_EQ(select_tool("text-reading", reg, space), tools::ToolId::ocr);
  EXPECT_EQ(select_tool("document", reg, space), tools::ToolId::canny);
  EXPECT_EQ(select_tool("scene", reg, space), tools::ToolId::object);
  EXPECT_EQ(select_tool("whiteboard", reg, space), tools::ToolId::none);
  EXPECT_THROW(select_tool("nothing", reg, space), ToolError);
  EXPECT_EQ(select_tool("scene", tools::ToolRegistry{}, space), tools::ToolId::none);
}

TEST(ScriptedOracle, JsonForms) {
  const auto doc = nlohmann::json::parse(R"({"records": [
    {"trigger": "predict", "step": "*", "response": "scene"},
    {"trigger": "predict", "step": 4, "response": "document"},
    {"trigger": "consistency", "step": 2, "response": false},
    {"trigger": "consistency", "response": true},
    {"trigger": "voice", "step": 0, "response": "Observe pedestrians"}
  ]})");
  auto o = ScriptedOracle::from_json(doc);
  EXPECT_EQ(o.predict(kProbe, TaskSpace::defaults(), 1), "scene");
  EXPECT_EQ(o.predict(kProbe, TaskSpace::defaults(), 4), "document");
  EXPECT_EQ(o.consistent(kProbe, "scene", 2), false);
  EXPECT_EQ(o.consistent(kProbe, "scene", 3), true);
  EXPECT_EQ(o.voice(0), "Observe pedestrians");
  EXPECT_THROW(o.voice(1), OracleGapError);
  EXPECT_THROW(o.context(0), OracleGapError);
  EXPECT_THROW(ScriptedOracle::from_json(nlohmann::json::parse(R"([{"trigger": "smell", "response": "x"}])")),
               ConfigError);
  EXPECT_THROW(ScriptedOracle::from_json(nlohmann::json::parse(R"({"records": 3})")), ConfigError);
}
