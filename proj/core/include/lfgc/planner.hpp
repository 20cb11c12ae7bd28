#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lfgc/beliefs.hpp"
#include "lfgc/game.hpp"
#include "lfgc/rewards.hpp"
#include "lfgc/trajectories.hpp"

namespace lfgc {

struct PlannerConfig {
  int horizon = 4;
  Integration integration;
  double discount = 0.8;
  double epsilon = 0.1;
  RewardWeights weights;
  RewardParams reward;
  std::vector<double> accel_levels{-2.0, 0.0, 2.0};
  double lane_change_duration = 3.0;

  void validate() const;
  TrajectoryGenConfig trajectory_config(const RoadGeometry& road) const;
  GameSpec game_spec() const { return {weights, reward, discount}; }
};

struct TrafficVehicle {
  int id = 0;
  VehicleState state;
  VehicleParams params;
};

struct InteractingVehicle {
  int id = 0;
  VehicleState state;
  VehicleParams params;
  BeliefState belief;
};

struct TrafficSnapshot {
  VehicleState ego;
  VehicleParams ego_params;
  std::optional<LaneChangeProgress> ego_progress;
  std::vector<InteractingVehicle> interacting;
  std::vector<TrafficVehicle> environment;  // predicted at constant speed
  RoadGeometry road;
};

inline std::size_t role_index(Role role) { return role == Role::leader ? 0 : 1; }

struct RolePrediction {
  std::vector<VehicleState> states;  // interacting vehicle, samples 0..N
  double value = 0.0;                // ego's discounted reward along the rollout
  bool safe = true;                  // every sample 1..N safe
  bool degenerate = false;           // some game had an empty action set
};

struct PairPrediction {
  int vehicle_id = 0;
  BeliefState belief;
  std::array<RolePrediction, 2> roles;  // indexed by role_index
  // First acceleration of the interacting vehicle under each role at the
  // current state; independent of the ego's candidate.
  std::array<double, 2> first_accel{};
  double safety_probability = 0.0;
  double expected_reward = 0.0;
};

struct EnvironmentPrediction {
  int vehicle_id = 0;
  double value = 0.0;
  bool safe = true;
};

struct PlanResult {
  Trajectory chosen;
  std::size_t chosen_index = 0;
  std::size_t candidate_count = 0;
  std::size_t feasible_count = 0;
  bool feasible = false;
  double expected_reward = 0.0;
  std::vector<PairPrediction> pairs;  // evaluated for the chosen candidate
  std::vector<EnvironmentPrediction> environment;
};

// Closed-loop rollout of pair.other under role: at every step it re-solves its
// game against the ego's admissible set at the predicted ego state, then
// applies the first control. The ego follows ego_traj.
std::vector<PairState> predict_pair_rollout(const PairState& pair, const Trajectory& ego_traj,
                                            Role role, const PlannerConfig& cfg);

double expected_pair_reward(const PairState& pair, const Trajectory& ego_traj,
                            const BeliefState& belief, const PlannerConfig& cfg);

double pair_safety_probability(const PairState& pair, const Trajectory& ego_traj,
                               const BeliefState& belief, const PlannerConfig& cfg);

// sum p_k >= m - epsilon
bool chance_constraint_ok(std::span<const double> p, double epsilon);

// Throws std::invalid_argument when the ego has no admissible trajectory.
PlanResult plan(const TrafficSnapshot& traffic, const PlannerConfig& cfg);

}  // namespace lfgc
