#include "lfgc/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfgc {

void IdmParams::validate() const {
  if (!(v0 > 0 && phi0 > 0 && a_m > 0 && b > 0 && delta > 0 && T > 0)) {
    throw std::invalid_argument("idm: all parameters must be positive");
  }
}

IdmResult idm_accel(double v, double gap, double dv, const IdmParams& p, double a_bound) {
  if (!(gap > 0)) return {-a_bound, true};
  const double free = 1.0 - std::pow(v / p.v0, p.delta);
  double interaction = 0.0;
  if (std::isfinite(gap)) {
    const double desired = p.phi0 + v * p.T + v * dv / (2.0 * std::sqrt(p.a_m * p.b));
    interaction = (desired / gap) * (desired / gap);
  }
  return {std::clamp(p.a_m * (free - interaction), -a_bound, a_bound), false};
}

const char* to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::game: return "game";
    case AgentKind::idm: return "idm";
    case AgentKind::constant_speed: return "constant_speed";
    case AgentKind::replay: return "replay";
  }
  return "unknown";
}

const char* to_string(IdmTarget target) {
  return target == IdmTarget::front ? "front" : "ego";
}

VehicleState Recording::state_at(double t, bool* past_end) const {
  if (states.empty()) throw std::invalid_argument("recording: no states");
  const double u = (t - t0) / dt;
  const double last = static_cast<double>(states.size() - 1);
  if (past_end) *past_end = u > last + 1e-9;
  if (u <= 0) return states.front();
  if (u > last + 1e-9) {
    VehicleState s = states.back();
    const double extra = t - t_end();
    s.x += s.v * std::cos(s.psi) * extra;
    s.y += s.v * std::sin(s.psi) * extra;
    return s;
  }
  const auto k = static_cast<std::size_t>(std::floor(u + 1e-9));
  const double frac = u - static_cast<double>(k);
  if (k + 1 >= states.size() || frac < 1e-9) return states[std::min(k, states.size() - 1)];
  const VehicleState& a = states[k];
  const VehicleState& b = states[k + 1];
  return {a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y), a.v + frac * (b.v - a.v),
          a.psi + frac * (b.psi - a.psi)};
}

namespace {

const WorldVehicle& find_self(int self_id, const WorldView& world) {
  for (const auto& v : world.vehicles) {
    if (v.id == self_id) return v;
  }
  throw std::invalid_argument("agent_step: vehicle " + std::to_string(self_id) +
                              " missing from world view");
}

Leader leader_from(const WorldVehicle& self, const VehicleState& other,
                   const VehicleParams& other_params) {
  Leader l;
  l.gap = other.x - self.state.x - 0.5 * (self.params.length + other_params.length);
  l.dv = self.state.v - other.v;
  return l;
}

AgentAction game_action(const AgentSpec& spec, const WorldVehicle& self, const WorldView& world,
                        double dt) {
  if (!world.planner || !world.ego_options || !world.road) {
    throw std::invalid_argument("agent_step: game agents need planner, road and ego options");
  }
  AgentAction out;
  const TrajectoryGenConfig gen = world.planner->trajectory_config(*world.road);
  const auto own = generate_longitudinal_set(self.state, gen, self.params);
  double a = 0.0;
  if (world.ego_options->empty()) {
    out.flagged = true;
  } else {
    const PairState pair{world.ego, self.state, world.ego_params, self.params, world.road};
    const GameOutcome g =
        policy_action(pair, spec.role, *world.ego_options, own, world.planner->game_spec());
    a = g.optimal_trajectory->controls.front().a;
  }
  if (spec.front_guard) {
    const Leader ahead = vehicle_ahead(self.id, world);
    const IdmResult guard = idm_accel(self.state.v, ahead.gap, ahead.dv, spec.guard,
                                      self.params.a_bound);
    if (guard.accel < 0.0 && guard.accel < a) {
      a = guard.accel;
      out.flagged = out.flagged || guard.emergency;
    }
  }
  out.control = {speed_limited_accel(self.state.v, a, self.params, dt), 0.0};
  return out;
}

AgentAction idm_action(const AgentSpec& spec, const WorldVehicle& self, const WorldView& world) {
  const Leader ahead = vehicle_ahead(self.id, world);
  IdmResult r = idm_accel(self.state.v, ahead.gap, ahead.dv, spec.idm, self.params.a_bound);
  if (spec.target == IdmTarget::ego && world.ego_signals_merge && world.ego.x > self.state.x) {
    const Leader ego = leader_from(self, world.ego, world.ego_params);
    const IdmResult yield = idm_accel(self.state.v, ego.gap, ego.dv, spec.idm,
                                      self.params.a_bound);
    if (yield.accel < r.accel) r = yield;
  }
  return {{r.accel, 0.0}, r.emergency};
}

AgentAction replay_action(const AgentSpec& spec, const WorldView& world, double dt) {
  if (!world.recordings) throw std::invalid_argument("agent_step: replay needs recordings");
  const auto it = world.recordings->find(spec.recording);
  if (it == world.recordings->end()) {
    throw std::invalid_argument("agent_step: unknown recording '" + spec.recording + "'");
  }
  bool past_now = false, past_next = false;
  const VehicleState now = it->second.state_at(world.time, &past_now);
  const VehicleState next = it->second.state_at(world.time + dt, &past_next);
  AgentAction out;
  out.flagged = past_next;
  Trajectory step;
  step.states = {now, next};
  step.integration = {dt, 1};
  try {
    out.control = recover_controls(step, spec.params).front();
  } catch (const InfeasibleStep&) {
    out.control = {(next.v - now.v) / dt, 0.0};
    out.flagged = true;
  }
  return out;
}

}  // namespace

Leader vehicle_ahead(int self_id, const WorldView& world) {
  const WorldVehicle& self = find_self(self_id, world);
  const int lane = world.road->lane_of(self.state.y);
  Leader best;
  auto consider = [&](const VehicleState& s, const VehicleParams& p) {
    if (s.x <= self.state.x || world.road->lane_of(s.y) != lane) return;
    const Leader l = leader_from(self, s, p);
    if (l.gap < best.gap) best = l;
  };
  for (const auto& v : world.vehicles) {
    if (v.id != self_id) consider(v.state, v.params);
  }
  consider(world.ego, world.ego_params);
  return best;
}

AgentAction agent_step(const AgentSpec& spec, int self_id, const WorldView& world, double dt) {
  switch (spec.kind) {
    case AgentKind::constant_speed:
      return {};
    case AgentKind::replay:
      return replay_action(spec, world, dt);
    case AgentKind::idm:
      return idm_action(spec, find_self(self_id, world), world);
    case AgentKind::game:
      return game_action(spec, find_self(self_id, world), world, dt);
  }
  return {};
}

}  // namespace lfgc
