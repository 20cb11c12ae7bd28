#include "lfgc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "lfgc/selection.hpp"

namespace lfgc {

using nlohmann::json;

const char* to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::success: return "success";
    case OutcomeClass::fail_to_merge: return "fail_to_merge";
    case OutcomeClass::collision: return "collision";
  }
  return "unknown";
}

namespace {

OutcomeClass outcome_from_string(const std::string& s) {
  if (s == "success") return OutcomeClass::success;
  if (s == "collision") return OutcomeClass::collision;
  if (s == "fail_to_merge") return OutcomeClass::fail_to_merge;
  throw std::runtime_error("event log: unknown outcome class '" + s + "'");
}

// Checks one logged step for episode termination. last marks the final step
// the episode may reach.
std::optional<Outcome> terminal_outcome(const StepRecord& rec, const LogHeader& h,
                                        const RoadGeometry& road, bool last) {
  for (const auto& v : rec.vehicles) {
    const auto p = h.vehicle_params.find(v.id);
    const VehicleParams params = p == h.vehicle_params.end() ? VehicleParams{} : p->second;
    if (boxes_overlap(rec.ego, h.ego_params, v.state, params, h.box_margin)) {
      Outcome o;
      o.cls = OutcomeClass::collision;
      o.merge_step = -1;
      o.detail = "collision with vehicle " + std::to_string(v.id) + " at step " +
                 std::to_string(rec.step);
      return o;
    }
  }
  const int lane = road.lane_of(rec.ego.y);
  if (!rec.ego_changing_lane && lane == road.target_lane &&
      std::abs(rec.ego.y - road.target_y()) < h.completion_tolerance) {
    Outcome o;
    o.cls = OutcomeClass::success;
    o.merge_step = rec.step;
    double ahead = std::numeric_limits<double>::infinity();
    double behind = -std::numeric_limits<double>::infinity();
    for (const auto& v : rec.vehicles) {
      if (road.lane_of(v.state.y) != road.target_lane) continue;
      if (v.state.x > rec.ego.x && v.state.x < ahead) {
        ahead = v.state.x;
        o.ahead_id = v.id;
      } else if (v.state.x <= rec.ego.x && v.state.x > behind) {
        behind = v.state.x;
        o.behind_id = v.id;
      }
    }
    o.detail = "merged at step " + std::to_string(rec.step);
    return o;
  }
  if (lane == road.merge_lane && rec.ego.x >= road.merge_lane_end_x) {
    Outcome o;
    o.cls = OutcomeClass::fail_to_merge;
    o.detail = "reached the end of the merge lane at step " + std::to_string(rec.step);
    return o;
  }
  if (last) {
    Outcome o;
    o.cls = OutcomeClass::fail_to_merge;
    o.detail = "no merge after " + std::to_string(rec.step) + " steps";
    return o;
  }
  return std::nullopt;
}

json state_json(const VehicleState& s) { return json::array({s.x, s.y, s.v, s.psi}); }

VehicleState state_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
          j.at(3).get<double>()};
}

json params_json(const VehicleParams& p) {
  return {{"l_f", p.l_f},     {"l_r", p.l_r},         {"length", p.length},
          {"width", p.width}, {"a_bound", p.a_bound}, {"delta_bound", p.delta_bound},
          {"v_min", p.v_min}, {"v_max", p.v_max}};
}

VehicleParams params_from(const json& j) {
  VehicleParams p;
  p.l_f = j.at("l_f");
  p.l_r = j.at("l_r");
  p.length = j.at("length");
  p.width = j.at("width");
  p.a_bound = j.at("a_bound");
  p.delta_bound = j.at("delta_bound");
  p.v_min = j.at("v_min");
  p.v_max = j.at("v_max");
  return p;
}

json road_json(const RoadGeometry& r) {
  return {{"lane_centers", r.lane_centers}, {"lane_width", r.lane_width},
          {"y_min", r.y_min},               {"y_max", r.y_max},
          {"merge_lane_end_x", r.merge_lane_end_x},
          {"merge_lane", r.merge_lane},     {"target_lane", r.target_lane}};
}

RoadGeometry road_from(const json& j) {
  RoadGeometry r;
  r.lane_centers = j.at("lane_centers").get<std::vector<double>>();
  r.lane_width = j.at("lane_width");
  r.y_min = j.at("y_min");
  r.y_max = j.at("y_max");
  r.merge_lane_end_x = j.at("merge_lane_end_x");
  r.merge_lane = j.at("merge_lane");
  r.target_lane = j.at("target_lane");
  return r;
}

json outcome_json(const Outcome& o) {
  json j = {{"type", "outcome"},
            {"class", to_string(o.cls)},
            {"merge_step", o.merge_step},
            {"detail", o.detail}};
  j["ahead_id"] = o.ahead_id ? json(*o.ahead_id) : json(nullptr);
  j["behind_id"] = o.behind_id ? json(*o.behind_id) : json(nullptr);
  return j;
}

Outcome outcome_from(const json& j) {
  Outcome o;
  o.cls = outcome_from_string(j.at("class"));
  o.merge_step = j.at("merge_step");
  o.detail = j.at("detail");
  if (!j.at("ahead_id").is_null()) o.ahead_id = j.at("ahead_id").get<int>();
  if (!j.at("behind_id").is_null()) o.behind_id = j.at("behind_id").get<int>();
  return o;
}

json step_json(const StepRecord& r) {
  json j = {{"type", "step"},
            {"step", r.step},
            {"time", r.time},
            {"ego", state_json(r.ego)},
            {"ego_changing_lane", r.ego_changing_lane},
            {"interacting", r.interacting},
            {"flagged", r.flagged_agents}};
  json vehicles = json::array();
  for (const auto& v : r.vehicles) vehicles.push_back({{"id", v.id}, {"state", state_json(v.state)}});
  j["vehicles"] = vehicles;
  json beliefs = json::array();
  for (const auto& b : r.beliefs) {
    beliefs.push_back({{"id", b.id},
                       {"p_leader", b.belief.p_leader},
                       {"p_follower", b.belief.p_follower},
                       {"updated", b.updated},
                       {"degenerate", b.degenerate}});
  }
  j["beliefs"] = beliefs;
  if (r.plan) {
    const PlanRecord& p = *r.plan;
    json states = json::array();
    for (const auto& s : p.chosen_states) states.push_back(state_json(s));
    json pairs = json::array();
    for (const auto& q : p.pairs) {
      pairs.push_back({{"id", q.id},
                       {"p_leader", q.belief.p_leader},
                       {"p_follower", q.belief.p_follower},
                       {"safety_probability", q.safety_probability},
                       {"expected_reward", q.expected_reward},
                       {"safe_leader", q.safe_leader},
                       {"safe_follower", q.safe_follower},
                       {"accel_leader", q.accel_leader},
                       {"accel_follower", q.accel_follower}});
    }
    j["plan"] = {{"chosen_index", p.chosen_index},
                 {"maneuver", p.maneuver},
                 {"maneuver_step", p.maneuver_step},
                 {"feasible", p.feasible},
                 {"expected_reward", p.expected_reward},
                 {"candidates", p.candidates},
                 {"feasible_count", p.feasible_count},
                 {"control", {p.control.a, p.control.delta_f}},
                 {"chosen_states", states},
                 {"pairs", pairs},
                 {"environment", p.environment_ids}};
  }
  if (r.planning_time) j["planning_time"] = *r.planning_time;
  return j;
}

StepRecord step_from(const json& j) {
  StepRecord r;
  r.step = j.at("step");
  r.time = j.at("time");
  r.ego = state_from(j.at("ego"));
  r.ego_changing_lane = j.at("ego_changing_lane");
  r.interacting = j.at("interacting").get<std::vector<int>>();
  r.flagged_agents = j.at("flagged").get<std::vector<int>>();
  for (const auto& v : j.at("vehicles")) r.vehicles.push_back({v.at("id"), state_from(v.at("state"))});
  for (const auto& b : j.at("beliefs")) {
    r.beliefs.push_back({b.at("id"), {b.at("p_leader"), b.at("p_follower")}, b.at("updated"),
                         b.at("degenerate")});
  }
  if (j.contains("plan")) {
    const json& p = j.at("plan");
    PlanRecord pr;
    pr.chosen_index = p.at("chosen_index");
    pr.maneuver = p.at("maneuver");
    pr.maneuver_step = p.at("maneuver_step");
    pr.feasible = p.at("feasible");
    pr.expected_reward = p.at("expected_reward");
    pr.candidates = p.at("candidates");
    pr.feasible_count = p.at("feasible_count");
    pr.control = {p.at("control").at(0), p.at("control").at(1)};
    for (const auto& s : p.at("chosen_states")) pr.chosen_states.push_back(state_from(s));
    for (const auto& q : p.at("pairs")) {
      PairRecord rec;
      rec.id = q.at("id");
      rec.belief = {q.at("p_leader"), q.at("p_follower")};
      rec.safety_probability = q.at("safety_probability");
      rec.expected_reward = q.at("expected_reward");
      rec.safe_leader = q.at("safe_leader");
      rec.safe_follower = q.at("safe_follower");
      rec.accel_leader = q.at("accel_leader");
      rec.accel_follower = q.at("accel_follower");
      pr.pairs.push_back(rec);
    }
    pr.environment_ids = p.at("environment").get<std::vector<int>>();
    r.plan = std::move(pr);
  }
  if (j.contains("planning_time")) r.planning_time = j.at("planning_time").get<double>();
  return r;
}

json header_json(const LogHeader& h) {
  json vp = json::object();
  for (const auto& [id, p] : h.vehicle_params) vp[std::to_string(id)] = params_json(p);
  return {{"type", "header"},
          {"schema_version", h.schema_version},
          {"scenario", h.scenario},
          {"seed", h.seed},
          {"dt", h.dt},
          {"road", road_json(h.road)},
          {"ego_params", params_json(h.ego_params)},
          {"vehicle_params", vp},
          {"box_margin", h.box_margin},
          {"completion_tolerance", h.completion_tolerance}};
}

LogHeader header_from(const json& j) {
  LogHeader h;
  h.schema_version = j.at("schema_version");
  h.scenario = j.at("scenario");
  h.seed = j.at("seed");
  h.dt = j.at("dt");
  h.road = road_from(j.at("road"));
  h.ego_params = params_from(j.at("ego_params"));
  for (const auto& [id, p] : j.at("vehicle_params").items()) {
    h.vehicle_params[std::stoi(id)] = params_from(p);
  }
  h.box_margin = j.at("box_margin");
  h.completion_tolerance = j.at("completion_tolerance");
  return h;
}

struct AgentRuntime {
  const AgentConfig* cfg = nullptr;
  const Recording* recording = nullptr;
  VehicleState state;
  bool active = true;
};

bool agent_active(const AgentConfig& a, const Recording* rec, double t) {
  return a.spec.kind != AgentKind::replay || rec->active_at(t);
}

PlanRecord plan_record(const PlanResult& r) {
  PlanRecord p;
  p.chosen_index = r.chosen_index;
  p.maneuver = to_string(r.chosen.maneuver.kind);
  p.maneuver_step = r.chosen.maneuver.step;
  p.feasible = r.feasible;
  p.expected_reward = r.expected_reward;
  p.candidates = r.candidate_count;
  p.feasible_count = r.feasible_count;
  p.control = r.chosen.controls.front();
  p.chosen_states = r.chosen.states;
  for (const auto& q : r.pairs) {
    PairRecord rec;
    rec.id = q.vehicle_id;
    rec.belief = q.belief;
    rec.safety_probability = q.safety_probability;
    rec.expected_reward = q.expected_reward;
    rec.safe_leader = q.roles[role_index(Role::leader)].safe;
    rec.safe_follower = q.roles[role_index(Role::follower)].safe;
    rec.accel_leader = q.first_accel[role_index(Role::leader)];
    rec.accel_follower = q.first_accel[role_index(Role::follower)];
    p.pairs.push_back(rec);
  }
  for (const auto& e : r.environment) p.environment_ids.push_back(e.vehicle_id);
  return p;
}

// Predicted next (ego, other) states under each role, taken from a plan.
struct RolePredictions {
  VehicleState ego;
  std::array<VehicleState, 2> other;
};

}  // namespace

std::string EventLog::to_jsonl() const {
  std::string out = header_json(header).dump() + "\n";
  for (const auto& s : steps) out += step_json(s).dump() + "\n";
  if (live_outcome) out += outcome_json(*live_outcome).dump() + "\n";
  return out;
}

EventLog EventLog::from_jsonl(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        log.header = header_from(j);
        have_header = true;
      } else if (type == "step") {
        log.steps.push_back(step_from(j));
      } else if (type == "outcome") {
        log.live_outcome = outcome_from(j);
      } else {
        throw std::runtime_error("unknown record type '" + type + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw std::runtime_error("event log: missing header record");
  return log;
}

Outcome classify_outcome(const EventLog& log, const RoadGeometry& road) {
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (auto o = terminal_outcome(log.steps[i], log.header, road, i + 1 == log.steps.size())) {
      return *o;
    }
  }
  Outcome o;
  o.detail = "empty log";
  return o;
}

EpisodeResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const RoadGeometry& road = cfg.road;
  const PlannerConfig& pc = cfg.planner;
  const Integration integ = pc.integration;
  const double dt = integ.dt;
  const Integration substep{integ.substep(), 1};
  const TrajectoryGenConfig gen = pc.trajectory_config(road);

  EpisodeResult result;
  LogHeader& h = result.log.header;
  h.scenario = cfg.name;
  h.seed = cfg.seed;
  h.dt = dt;
  h.road = road;
  h.ego_params = cfg.ego_params;
  h.box_margin = pc.reward.box_margin;
  h.completion_tolerance = cfg.completion_tolerance;

  std::vector<AgentRuntime> agents;
  for (const auto& a : cfg.agents) {
    AgentRuntime rt;
    rt.cfg = &a;
    if (a.spec.kind == AgentKind::replay) rt.recording = &cfg.recordings.at(a.spec.recording);
    rt.active = agent_active(a, rt.recording, 0.0);
    rt.state = rt.recording ? rt.recording->state_at(0.0) : a.initial;
    agents.push_back(rt);
    h.vehicle_params[a.id] = a.spec.params;
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Matrix4d noise_cov = cfg.beliefs.W.bottomRightCorner(4, 4);
  const Eigen::Matrix4d noise_l = noise_cov.llt().matrixL();

  VehicleState ego = cfg.ego_initial;
  std::optional<LaneChangeProgress> ego_progress;
  std::map<int, BeliefState> beliefs;
  std::map<int, RolePredictions> predicted;

  for (int k = 0;; ++k) {
    const double t = k * dt;
    StepRecord rec;
    rec.step = k;
    rec.time = t;
    rec.ego = ego;
    rec.ego_changing_lane = ego_progress.has_value();
    for (const auto& a : agents) {
      if (a.active) rec.vehicles.push_back({a.cfg->id, a.state});
    }
    std::sort(rec.vehicles.begin(), rec.vehicles.end(),
              [](const VehicleRecord& a, const VehicleRecord& b) { return a.id < b.id; });

    if (cfg.selection.mode == SelectionMode::fixed) {
      for (const auto& a : agents) {
        if (a.active && a.cfg->interacting) rec.interacting.push_back(a.cfg->id);
      }
    } else {
      std::vector<CandidateVehicle> cands;
      for (const auto& v : rec.vehicles) cands.push_back({v.id, v.state});
      rec.interacting = select_interacting(ego, cands, road, cfg.selection.headway,
                                           cfg.selection.max_interacting);
    }

    auto runtime_of = [&](int id) -> AgentRuntime& {
      return *std::find_if(agents.begin(), agents.end(),
                           [&](const AgentRuntime& a) { return a.cfg->id == id; });
    };

    for (int id : rec.interacting) {
      BeliefRecord b;
      b.id = id;
      const auto known = beliefs.find(id);
      const auto pred = predicted.find(id);
      if (known == beliefs.end()) {
        beliefs[id] = cfg.beliefs.p0;
      } else if (pred != predicted.end()) {
        const AgentRuntime& a = runtime_of(id);
        const PairState observed{ego, a.state, cfg.ego_params, a.cfg->spec.params, &road};
        std::array<double, 2> logs{};
        for (Role role : {Role::leader, Role::follower}) {
          const PairState expected{pred->second.ego, pred->second.other[role_index(role)],
                                   cfg.ego_params, a.cfg->spec.params, &road};
          logs[role_index(role)] =
              log_likelihood(residual(observed, expected, cfg.beliefs.mode), cfg.beliefs.W);
        }
        const BeliefUpdate u = update_belief_log(known->second, logs[0], logs[1], cfg.beliefs);
        beliefs[id] = u.posterior;
        b.updated = true;
        b.degenerate = u.degenerate;
      }
      b.belief = beliefs[id];
      rec.beliefs.push_back(b);
    }
    predicted.clear();

    if (auto o = terminal_outcome(rec, h, road, k >= cfg.max_steps)) {
      result.log.steps.push_back(std::move(rec));
      result.outcome = *o;
      result.log.live_outcome = *o;
      break;
    }

    TrafficSnapshot snap;
    snap.ego = ego;
    snap.ego_params = cfg.ego_params;
    snap.ego_progress = ego_progress;
    snap.road = road;
    for (const auto& v : rec.vehicles) {
      const AgentRuntime& a = runtime_of(v.id);
      if (std::find(rec.interacting.begin(), rec.interacting.end(), v.id) != rec.interacting.end()) {
        continue;
      }
      snap.environment.push_back({v.id, v.state, a.cfg->spec.params});
    }
    for (int id : rec.interacting) {
      const AgentRuntime& a = runtime_of(id);
      snap.interacting.push_back({id, a.state, a.cfg->spec.params, beliefs[id]});
    }

    const auto t_start = std::chrono::steady_clock::now();
    const PlanResult pr = plan(snap, pc);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    rec.plan = plan_record(pr);
    if (cfg.log_timing) rec.planning_time = elapsed;
    for (const auto& q : pr.pairs) {
      RolePredictions rp;
      rp.ego = pr.chosen.states.at(1);
      for (Role role : {Role::leader, Role::follower}) {
        rp.other[role_index(role)] = q.roles[role_index(role)].states.at(1);
      }
      predicted[q.vehicle_id] = rp;
    }

    // Agents act on the world as it is now; IDM drivers re-evaluate every sub-step.
    const Control u_ego = pr.chosen.controls.front();
    MergeSet ego_set = generate_merge_set(ego, ego_progress, gen, cfg.ego_params);
    const std::vector<Trajectory> ego_options =
        ego_set.empty() ? generate_longitudinal_set(ego, gen, cfg.ego_params)
                        : std::move(ego_set.trajectories);

    WorldView view;
    view.time = t;
    view.ego = ego;
    view.ego_params = cfg.ego_params;
    view.ego_signals_merge = cfg.ego_signals_merge;
    view.road = &road;
    view.planner = &pc;
    view.ego_options = &ego_options;
    view.recordings = &cfg.recordings;
    std::vector<std::size_t> in_view;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (!agents[i].active) continue;
      view.vehicles.push_back({agents[i].cfg->id, agents[i].state, agents[i].cfg->spec.params});
      in_view.push_back(i);
    }

    std::vector<double> held(agents.size(), 0.0);
    std::vector<bool> flagged(agents.size(), false);
    for (std::size_t i : in_view) {
      const AgentSpec& spec = agents[i].cfg->spec;
      if (spec.kind == AgentKind::game) {
        const AgentAction act = agent_step(spec, agents[i].cfg->id, view, dt);
        held[i] = act.control.a;
        flagged[i] = act.flagged;
      }
    }

    VehicleState ego_next = ego;
    std::vector<VehicleState> next(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) next[i] = agents[i].state;
    for (int s = 0; s < integ.substeps; ++s) {
      std::vector<double> accel = held;
      for (std::size_t i : in_view) {
        if (agents[i].cfg->spec.kind != AgentKind::idm) continue;
        const AgentAction act = agent_step(agents[i].cfg->spec, agents[i].cfg->id, view, substep.dt);
        accel[i] = act.control.a;
        flagged[i] = flagged[i] || act.flagged;
      }
      const double t_sub = t + (s + 1) * substep.dt;
      ego_next = propagate(ego_next, u_ego, cfg.ego_params, substep);
      for (std::size_t i : in_view) {
        const AgentSpec& spec = agents[i].cfg->spec;
        if (spec.kind == AgentKind::replay) {
          bool past = false;
          next[i] = agents[i].recording->state_at(s + 1 == integ.substeps ? t + dt : t_sub, &past);
          flagged[i] = flagged[i] || past;
        } else {
          next[i] = propagate_longitudinal(next[i], accel[i], spec.params, substep);
        }
      }
      view.time = t_sub;
      view.ego = ego_next;
      for (std::size_t n = 0; n < in_view.size(); ++n) view.vehicles[n].state = next[in_view[n]];
    }

    for (std::size_t i = 0; i < agents.size(); ++i) {
      AgentRuntime& a = agents[i];
      if (a.active) {
        a.state = next[i];
        if (a.cfg->noise) {
          Eigen::Vector4d z;
          for (int c = 0; c < 4; ++c) z(c) = normal(rng);
          const Eigen::Vector4d w = noise_l * z;
          a.state.x += w(0);
          a.state.y += w(1);
          a.state.v = std::clamp(a.state.v + w(2), a.cfg->spec.params.v_min,
                                 a.cfg->spec.params.v_max);
          a.state.psi += w(3);
        }
        if (flagged[i]) rec.flagged_agents.push_back(a.cfg->id);
      } else {
        a.active = agent_active(*a.cfg, a.recording, t + dt);
        if (a.active) a.state = a.recording->state_at(t + dt);
      }
    }
    std::sort(rec.flagged_agents.begin(), rec.flagged_agents.end());
    ego = ego_next;
    ego_progress = pr.chosen.progress.size() > 1 ? pr.chosen.progress[1] : std::nullopt;
    result.log.steps.push_back(std::move(rec));
  }
  return result;
}

void add_episode(BatchSummary& summary, const EpisodeSummary& episode) {
  const int planned_before = std::accumulate(
      summary.episodes.begin(), summary.episodes.end(), 0,
      [](int acc, const EpisodeSummary& e) { return acc + e.planning_samples; });
  summary.episodes.push_back(episode);
  if (!episode.outcome) {
    ++summary.errors;
  } else {
    switch (episode.outcome->cls) {
      case OutcomeClass::success: ++summary.success; break;
      case OutcomeClass::fail_to_merge: ++summary.fail_to_merge; break;
      case OutcomeClass::collision: ++summary.collision; break;
    }
  }
  const int total = planned_before + episode.planning_samples;
  if (total > 0) {
    summary.mean_planning_time =
        (summary.mean_planning_time * planned_before +
         episode.mean_planning_time * episode.planning_samples) / total;
  }
}

EpisodeSummary summarize_episode(const std::string& name, const EpisodeResult& result) {
  EpisodeSummary e;
  e.name = name;
  e.outcome = result.outcome;
  e.steps = static_cast<int>(result.log.steps.size());
  double sum = 0.0;
  for (const auto& s : result.log.steps) {
    if (!s.planning_time) continue;
    sum += *s.planning_time;
    ++e.planning_samples;
  }
  if (e.planning_samples > 0) e.mean_planning_time = sum / e.planning_samples;
  return e;
}

BatchSummary batch_run(const std::vector<ScenarioConfig>& cfgs, unsigned workers,
                       const std::function<void(std::size_t, const EpisodeResult&)>& on_done) {
  if (cfgs.empty()) throw std::invalid_argument("batch_run: no scenarios");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfgs.size()));

  std::vector<EpisodeSummary> episodes(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::mutex done_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        const EpisodeResult r = run_scenario(cfgs[i]);
        episodes[i] = summarize_episode(cfgs[i].name, r);
        if (on_done) {
          std::lock_guard<std::mutex> lock(done_mutex);
          on_done(i, r);
        }
      } catch (const std::exception& e) {
        episodes[i].name = cfgs[i].name;
        episodes[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  BatchSummary summary;
  for (const auto& e : episodes) add_episode(summary, e);
  return summary;
}

std::string format_summary_table(const BatchSummary& summary, const std::string& label) {
  char buf[128];
  std::string out;
  auto row = [&](const char* name, const std::string& value) {
    std::snprintf(buf, sizeof buf, "%-22s %14s\n", name, value.c_str());
    out += buf;
  };
  row("", label);
  row("Number of Merges", std::to_string(summary.merges()));
  row("Success", std::to_string(summary.success));
  row("Fail to Merge", std::to_string(summary.fail_to_merge));
  row("Collision", std::to_string(summary.collision));
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * summary.success_rate());
  row("Success Rate", buf);
  std::snprintf(buf, sizeof buf, "%.3f s", summary.mean_planning_time);
  row("Mean Planning Time", buf);
  if (summary.errors > 0) row("Errors", std::to_string(summary.errors));
  return out;
}

std::string summary_to_json(const BatchSummary& summary, const std::string& label) {
  json episodes = json::array();
  for (const auto& e : summary.episodes) {
    json j = {{"name", e.name}, {"steps", e.steps}, {"mean_planning_time", e.mean_planning_time}};
    if (e.outcome) {
      j["outcome"] = outcome_json(*e.outcome);
      j["outcome"].erase("type");
    } else {
      j["error"] = e.error;
    }
    episodes.push_back(j);
  }
  json j = {{"label", label},
            {"merges", summary.merges()},
            {"success", summary.success},
            {"fail_to_merge", summary.fail_to_merge},
            {"collision", summary.collision},
            {"errors", summary.errors},
            {"success_rate", summary.success_rate()},
            {"mean_planning_time", summary.mean_planning_time},
            {"episodes", episodes}};
  return j.dump(2);
}

}  // namespace lfgc
