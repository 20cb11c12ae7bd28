#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "lfgc/game.hpp"
#include "lfgc/planner.hpp"

namespace lfgc {

struct IdmParams {
  double v0 = 32.0;
  double phi0 = 2.0;
  double a_m = 4.0;
  double b = 3.0;
  double delta = 4.0;
  double T = 1.5;

  void validate() const;
};

struct IdmResult {
  double accel = 0.0;
  bool emergency = false;  // non-positive gap
};

inline constexpr double kFreeRoad = std::numeric_limits<double>::infinity();

// a_m (1 - (v/v0)^delta - (phi*/gap)^2), phi* = phi0 + v T + v dv / (2 sqrt(a_m b)),
// clamped to [-a_bound, a_bound]. dv is own speed minus the target's speed.
IdmResult idm_accel(double v, double gap, double dv, const IdmParams& p,
                    double a_bound = 4.0);

enum class AgentKind { game, idm, constant_speed, replay };
enum class IdmTarget { front, ego };

const char* to_string(AgentKind kind);
const char* to_string(IdmTarget target);

// Recorded states sampled every dt seconds starting at time t0.
struct Recording {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<VehicleState> states;

  double t_end() const { return t0 + dt * static_cast<double>(states.size() - 1); }
  bool active_at(double t) const { return !states.empty() && t >= t0 - 1e-9; }
  // Recorded state at t; past the end the last state is extrapolated at
  // constant speed (past_end set).
  VehicleState state_at(double t, bool* past_end = nullptr) const;
};

struct AgentSpec {
  AgentKind kind = AgentKind::constant_speed;
  Role role = Role::leader;            // game agents
  IdmParams idm;                       // idm agents
  IdmTarget target = IdmTarget::front; // idm agents
  std::string recording;               // replay agents
  VehicleParams params;
  // Game agents brake at least as hard as an IDM driver with these
  // parameters would for the vehicle ahead.
  bool front_guard = true;
  IdmParams guard{1e9, 2.0, 4.0, 3.0, 4.0, 0.5};
};

struct WorldVehicle {
  int id = 0;
  VehicleState state;
  VehicleParams params;
};

// Everything an agent may observe at one instant.
struct WorldView {
  double time = 0.0;
  VehicleState ego;
  VehicleParams ego_params;
  bool ego_signals_merge = true;
  std::vector<WorldVehicle> vehicles;  // all non-ego vehicles
  const RoadGeometry* road = nullptr;
  const PlannerConfig* planner = nullptr;
  const std::vector<Trajectory>* ego_options = nullptr;  // ego's admissible set now
  const std::map<std::string, Recording>* recordings = nullptr;
};

struct AgentAction {
  Control control;
  bool flagged = false;  // emergency brake, past-end replay, or degenerate game
};

// Control of agent self_id over the next dt seconds.
AgentAction agent_step(const AgentSpec& spec, int self_id, const WorldView& world, double dt);

// Nearest vehicle ahead of self in its lane, the ego included. Returns the
// bumper gap and speed difference, or a free road.
struct Leader {
  double gap = kFreeRoad;
  double dv = 0.0;
};
Leader vehicle_ahead(int self_id, const WorldView& world);

}  // namespace lfgc
