#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfgc/agents.hpp"
#include "lfgc/beliefs.hpp"
#include "lfgc/planner.hpp"
#include "lfgc/rewards.hpp"

namespace lfgc {

inline constexpr int kScenarioSchemaVersion = 1;

struct AgentConfig {
  int id = 0;
  AgentSpec spec;
  VehicleState initial;
  bool interacting = false;  // played against in fixed selection mode
  bool noise = false;        // add N(0, W) to the state after every step
};

enum class SelectionMode { fixed, selection_box };

struct SelectionConfig {
  SelectionMode mode = SelectionMode::fixed;
  double headway = 2.0;  // s ahead of the ego for the selection box front edge
  std::size_t max_interacting = 3;
};

struct ScenarioConfig {
  int schema_version = kScenarioSchemaVersion;
  std::string name = "scenario";
  std::uint64_t seed = 0;
  int max_steps = 30;
  RoadGeometry road;
  VehicleState ego_initial;
  VehicleParams ego_params;
  std::vector<AgentConfig> agents;
  PlannerConfig planner;
  BeliefConfig beliefs;
  SelectionConfig selection;
  std::map<std::string, Recording> recordings;
  bool ego_signals_merge = true;
  bool log_timing = true;
  double completion_tolerance = 0.2;  // m from the target lane center

  // Every problem found, each prefixed by its field path.
  std::vector<std::string> problems() const;
  // Throws ScenarioError when problems() is non-empty.
  void validate() const;
};

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioConfig& cfg);

enum class OutcomeClass { success, fail_to_merge, collision };
const char* to_string(OutcomeClass c);

struct Outcome {
  OutcomeClass cls = OutcomeClass::fail_to_merge;
  int merge_step = -1;
  std::optional<int> ahead_id;   // nearest target-lane vehicle ahead at merge
  std::optional<int> behind_id;  // nearest target-lane vehicle behind at merge
  std::string detail;
};

struct VehicleRecord {
  int id = 0;
  VehicleState state;
};

struct BeliefRecord {
  int id = 0;
  BeliefState belief;
  bool updated = false;
  bool degenerate = false;
};

struct PairRecord {
  int id = 0;
  BeliefState belief;
  double safety_probability = 0.0;
  double expected_reward = 0.0;
  bool safe_leader = true;
  bool safe_follower = true;
  double accel_leader = 0.0;
  double accel_follower = 0.0;
};

struct PlanRecord {
  std::size_t chosen_index = 0;
  std::string maneuver;
  int maneuver_step = -1;
  bool feasible = false;
  double expected_reward = 0.0;
  std::size_t candidates = 0;
  std::size_t feasible_count = 0;
  Control control;
  std::vector<VehicleState> chosen_states;
  std::vector<PairRecord> pairs;
  std::vector<int> environment_ids;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  VehicleState ego;
  bool ego_changing_lane = false;
  std::vector<VehicleRecord> vehicles;
  std::vector<int> interacting;
  std::vector<BeliefRecord> beliefs;
  std::optional<PlanRecord> plan;  // absent on the terminal record
  std::optional<double> planning_time;
  std::vector<int> flagged_agents;
};

struct LogHeader {
  int schema_version = kScenarioSchemaVersion;
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 1.0;
  RoadGeometry road;
  VehicleParams ego_params;
  std::map<int, VehicleParams> vehicle_params;
  double box_margin = 0.5;
  double completion_tolerance = 0.2;
};

struct EventLog {
  LogHeader header;
  std::vector<StepRecord> steps;
  std::optional<Outcome> live_outcome;  // as decided while running

  std::string to_jsonl() const;
  static EventLog from_jsonl(const std::string& text);
};

struct EpisodeResult {
  Outcome outcome;
  EventLog log;
};

EpisodeResult run_scenario(const ScenarioConfig& cfg);

// Re-derives the outcome from the log alone.
Outcome classify_outcome(const EventLog& log, const RoadGeometry& road);

struct EpisodeSummary {
  std::string name;
  std::optional<Outcome> outcome;  // empty when the episode failed to run
  std::string error;
  int steps = 0;
  double mean_planning_time = 0.0;
  int planning_samples = 0;
};

struct BatchSummary {
  std::vector<EpisodeSummary> episodes;
  int success = 0;
  int fail_to_merge = 0;
  int collision = 0;
  int errors = 0;
  double mean_planning_time = 0.0;

  int merges() const { return success + fail_to_merge + collision; }
  double success_rate() const { return merges() ? static_cast<double>(success) / merges() : 0.0; }
};

// Runs every episode (concurrently when workers > 1) and tallies outcomes.
// on_done, when given, is called once per finished episode (serialized).
BatchSummary batch_run(const std::vector<ScenarioConfig>& cfgs, unsigned workers = 0,
                       const std::function<void(std::size_t, const EpisodeResult&)>& on_done = {});

void add_episode(BatchSummary& summary, const EpisodeSummary& episode);
EpisodeSummary summarize_episode(const std::string& name, const EpisodeResult& result);

std::string format_summary_table(const BatchSummary& summary, const std::string& label);
std::string summary_to_json(const BatchSummary& summary, const std::string& label);

}  // namespace lfgc
