#include <algorithm>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "lfgc/sim.hpp"

using namespace lfgc;

namespace {

bool has_issue(const ScenarioError& e, const std::string& needle) {
  return std::any_of(e.issues().begin(), e.issues().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

const char* kScenario = R"({
  "schema_version": 1,
  "name": "two_agents",
  "seed": 3,
  "max_steps": 20,
  "log_timing": false,
  "road": {"merge_lane_end_x": 250},
  "ego": {"state": {"x": 0, "y": 0, "v": 20, "psi": 0}},
  "agents": [
    {"id": 1, "kind": "game", "role": "follower", "interacting": true, "noise": true,
     "state": {"x": -6, "y": 3.6, "v": 20, "psi": 0}},
    {"id": 2, "kind": "idm", "target": "front", "interacting": true,
     "state": {"x": -40, "y": 3.6, "v": 20, "psi": 0}}
  ]
})";

StepRecord step(int k, VehicleState ego, bool changing, std::vector<VehicleRecord> vehicles) {
  StepRecord r;
  r.step = k;
  r.time = k;
  r.ego = ego;
  r.ego_changing_lane = changing;
  r.vehicles = std::move(vehicles);
  return r;
}

// Ego drifts across at 20 m/s; completes its change at step 6.
EventLog clean_merge_log() {
  EventLog log;
  log.header.scenario = "synthetic";
  log.header.vehicle_params[1] = {};
  log.header.vehicle_params[2] = {};
  const double ys[] = {0, 0, 0, 0.4, 1.8, 3.2, 3.6, 3.6};
  for (int k = 0; k < 8; ++k) {
    log.steps.push_back(step(k, {20.0 * k, ys[k], 20, 0}, k >= 3 && k < 6,
                             {{1, {20.0 * k + 40, 3.6, 20, 0}}, {2, {20.0 * k - 30, 3.6, 20, 0}}}));
  }
  return log;
}

ScenarioConfig with_outcome(const std::string& name, double end_x, double ego_x) {
  ScenarioConfig cfg = parse_scenario(kScenario);
  cfg.name = name;
  cfg.road.merge_lane_end_x = end_x;
  cfg.ego_initial.x = ego_x;
  return cfg;
}

}  // namespace

TEST(Scenario, ParsesAndRoundTrips) {
  const ScenarioConfig cfg = parse_scenario(kScenario);
  EXPECT_EQ(cfg.name, "two_agents");
  ASSERT_EQ(cfg.agents.size(), 2u);
  EXPECT_EQ(cfg.agents[0].spec.role, Role::follower);
  EXPECT_TRUE(cfg.agents[0].noise);
  EXPECT_EQ(cfg.agents[1].spec.kind, AgentKind::idm);
  EXPECT_EQ(cfg.road.merge_lane_end_x, 250.0);
  const ScenarioConfig again = parse_scenario(scenario_to_json(cfg));
  EXPECT_EQ(scenario_to_json(again), scenario_to_json(cfg));
}

TEST(Scenario, ErrorsNameTheirFieldPaths) {
  try {
    parse_scenario(R"({"schema_version": 1, "ego": {"state": {"x": 0, "y": 0, "v": "fast"}},
                       "road": {"lane_width": -1, "bogus": 2},
                       "agents": [{"id": 1, "kind": "teleporter"}, {"id": 1}]})");
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_TRUE(has_issue(e, "ego.state.v")) << e.what();
    EXPECT_TRUE(has_issue(e, "road.bogus: unknown field")) << e.what();
    EXPECT_TRUE(has_issue(e, "agents[0].kind")) << e.what();
  }
  try {
    parse_scenario(R"({"schema_version": 1, "ego": {"state": {"x": 0, "y": 0, "v": 20}},
                       "road": {"lane_width": -1},
                       "agents": [{"id": 1, "state": {"y": 3.6}}, {"id": 1, "state": {"y": 3.6}}]})");
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError& e) {
    EXPECT_TRUE(has_issue(e, "road: ")) << e.what();
    EXPECT_TRUE(has_issue(e, "agents[1].id")) << e.what();
  }
  EXPECT_THROW(parse_scenario("{not json"), ScenarioError);
  EXPECT_THROW(parse_scenario(R"({"schema_version": 99, "ego": {"state": {}}})"), ScenarioError);
}

TEST(Scenario, EgoMustStartInMergeLane) {
  ScenarioConfig cfg = parse_scenario(kScenario);
  cfg.ego_initial.y = 3.6;
  EXPECT_THROW(cfg.validate(), ScenarioError);
}

TEST(EventLog, JsonlRoundTrip) {
  const EpisodeResult r = run_scenario(parse_scenario(kScenario));
  const std::string text = r.log.to_jsonl();
  const EventLog back = EventLog::from_jsonl(text);
  EXPECT_EQ(back.to_jsonl(), text);
  EXPECT_EQ(back.steps.size(), r.log.steps.size());
  ASSERT_TRUE(back.live_outcome);
  EXPECT_EQ(back.live_outcome->cls, r.outcome.cls);
}

TEST(EventLog, ReclassificationMatchesLive) {
  const EpisodeResult r = run_scenario(parse_scenario(kScenario));
  const EventLog back = EventLog::from_jsonl(r.log.to_jsonl());
  const Outcome o = classify_outcome(back, back.header.road);
  EXPECT_EQ(o.cls, r.outcome.cls);
  EXPECT_EQ(o.merge_step, r.outcome.merge_step);
  EXPECT_EQ(o.ahead_id, r.outcome.ahead_id);
  EXPECT_EQ(o.behind_id, r.outcome.behind_id);
}

TEST(EventLog, RejectsGarbage) {
  EXPECT_THROW(EventLog::from_jsonl("{\"type\": \"step\"}\n"), std::runtime_error);
  EXPECT_THROW(EventLog::from_jsonl("nonsense\n"), std::runtime_error);
}

TEST(Classify, CleanMergeAtStepSix) {
  const EventLog log = clean_merge_log();
  const Outcome o = classify_outcome(log, RoadGeometry{});
  EXPECT_EQ(o.cls, OutcomeClass::success);
  EXPECT_EQ(o.merge_step, 6);
  EXPECT_EQ(o.ahead_id, 1);
  EXPECT_EQ(o.behind_id, 2);
}

TEST(Classify, OverlapIsCollision) {
  EventLog log = clean_merge_log();
  log.steps[4].vehicles[0].state = {log.steps[4].ego.x + 1.0, 3.0, 20, 0};
  const Outcome o = classify_outcome(log, RoadGeometry{});
  EXPECT_EQ(o.cls, OutcomeClass::collision);
}

TEST(Classify, LaneEndIsFailToMerge) {
  EventLog log;
  for (int k = 0; k < 17; ++k) log.steps.push_back(step(k, {20.0 * k, 0, 20, 0}, false, {}));
  const Outcome o = classify_outcome(log, RoadGeometry{});
  EXPECT_EQ(o.cls, OutcomeClass::fail_to_merge);
}

TEST(Simulation, InvariantsAlongEpisode) {
  const ScenarioConfig cfg = parse_scenario(kScenario);
  const EpisodeResult r = run_scenario(cfg);
  ASSERT_GE(r.log.steps.size(), 2u);
  const VehicleParams p = cfg.ego_params;
  for (std::size_t k = 0; k < r.log.steps.size(); ++k) {
    const StepRecord& s = r.log.steps[k];
    EXPECT_EQ(s.step, static_cast<int>(k));
    for (const auto& b : s.beliefs) EXPECT_TRUE(b.belief.valid()) << "step " << k;
    if (k + 1 < r.log.steps.size()) {
      ASSERT_TRUE(s.plan);
      // the logged control reproduces the next ego state
      const VehicleState next = propagate(s.ego, s.plan->control, p, cfg.planner.integration);
      EXPECT_NEAR(next.x, r.log.steps[k + 1].ego.x, 1e-9);
      EXPECT_NEAR(next.y, r.log.steps[k + 1].ego.y, 1e-9);
      EXPECT_NEAR(next.v, r.log.steps[k + 1].ego.v, 1e-9);
    }
    EXPECT_FALSE(s.planning_time) << "timing disabled";
  }
}

TEST(Simulation, Deterministic) {
  const ScenarioConfig cfg = parse_scenario(kScenario);
  EXPECT_EQ(run_scenario(cfg).log.to_jsonl(), run_scenario(cfg).log.to_jsonl());
}

TEST(Simulation, SeedChangesNoise) {
  ScenarioConfig a = parse_scenario(kScenario), b = a;
  b.seed = a.seed + 1;
  EXPECT_NE(run_scenario(a).log.to_jsonl(), run_scenario(b).log.to_jsonl());
}

TEST(Batch, CountsAndRate) {
  BatchSummary s;
  auto add = [&](OutcomeClass c) {
    EpisodeSummary e;
    e.outcome = Outcome{};
    e.outcome->cls = c;
    add_episode(s, e);
  };
  add(OutcomeClass::success);
  add(OutcomeClass::success);
  add(OutcomeClass::fail_to_merge);
  add(OutcomeClass::collision);
  EXPECT_EQ(s.merges(), 4);
  EXPECT_EQ(s.success, 2);
  EXPECT_EQ(s.fail_to_merge, 1);
  EXPECT_EQ(s.collision, 1);
  EXPECT_DOUBLE_EQ(s.success_rate(), 0.5);
  const std::string table = format_summary_table(s, "LFGC");
  EXPECT_NE(table.find("Success Rate"), std::string::npos);
  EXPECT_NE(table.find("50.0%"), std::string::npos);
}

TEST(Batch, PlanningTimeWeightedBySamples) {
  BatchSummary s;
  EpisodeSummary a, b;
  a.outcome = b.outcome = Outcome{};
  a.mean_planning_time = 0.1;
  a.planning_samples = 3;
  b.mean_planning_time = 0.5;
  b.planning_samples = 1;
  add_episode(s, a);
  add_episode(s, b);
  EXPECT_NEAR(s.mean_planning_time, (0.3 + 0.5) / 4, 1e-15);
}

TEST(Batch, RunsConcurrentlyWithIsolatedEpisodes) {
  std::vector<ScenarioConfig> cfgs;
  cfgs.push_back(with_outcome("a", 250, 0));
  cfgs.push_back(with_outcome("b", 250, 0));
  ScenarioConfig bad = with_outcome("broken", 250, 0);
  bad.max_steps = 0;
  cfgs.push_back(bad);
  std::vector<std::string> done;
  const BatchSummary s = batch_run(cfgs, 2, [&](std::size_t i, const EpisodeResult&) {
    done.push_back(cfgs[i].name);
  });
  EXPECT_EQ(s.episodes.size(), 3u);
  EXPECT_EQ(s.errors, 1);
  EXPECT_EQ(s.merges(), 2);
  EXPECT_EQ(done.size(), 2u);
  const EpisodeResult solo = run_scenario(cfgs[0]);
  ASSERT_TRUE(s.episodes[0].outcome);
  EXPECT_EQ(s.episodes[0].outcome->cls, solo.outcome.cls);
  EXPECT_EQ(s.episodes[0].outcome->merge_step, solo.outcome.merge_step);
  EXPECT_EQ(s.episodes[1].outcome->merge_step, solo.outcome.merge_step);
}
