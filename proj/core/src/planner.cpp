#include "lfgc/planner.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace lfgc {

void PlannerConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("planner: horizon must be >= 1");
  integration.validate();
  if (!(discount >= 0 && discount < 1)) throw std::invalid_argument("planner: discount must lie in [0, 1)");
  if (!(epsilon >= 0 && epsilon <= 1)) throw std::invalid_argument("planner: epsilon must lie in [0, 1]");
  weights.validate();
  if (!(reward.comfort_time_gap >= 0) || !(reward.box_margin >= 0)) {
    throw std::invalid_argument("planner: reward parameters must be nonnegative");
  }
}

TrajectoryGenConfig PlannerConfig::trajectory_config(const RoadGeometry& road) const {
  TrajectoryGenConfig g;
  g.horizon = horizon;
  g.integration = integration;
  g.accel_levels = accel_levels;
  g.lane_change_duration = lane_change_duration;
  g.lane_width = road.lane_width;
  g.origin_lane_y = road.merge_y();
  g.target_lane_y = road.target_y();
  return g;
}

bool chance_constraint_ok(std::span<const double> p, double epsilon) {
  double sum = 0.0;
  for (double v : p) sum += v;
  return sum >= static_cast<double>(p.size()) - epsilon;
}

namespace {

// Distinct ego prefixes shared by the candidate set, each with the ego's own
// admissible set at that prefix (generated on first use).
class EgoTree {
 public:
  EgoTree(const VehicleParams& params, const TrajectoryGenConfig& gen)
      : params_(params), gen_(gen) {}

  std::vector<int> intern_path(const Trajectory& traj) {
    std::vector<int> path;
    int parent = -1;
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
      parent = intern(parent, traj.states[t], traj.progress[t]);
      path.push_back(parent);
    }
    return path;
  }

  void set_options(int node, std::vector<Trajectory> options) {
    nodes_[static_cast<std::size_t>(node)].options = std::move(options);
    nodes_[static_cast<std::size_t>(node)].ready = true;
  }

  const std::vector<Trajectory>& options(int node) {
    Node& n = nodes_[static_cast<std::size_t>(node)];
    if (!n.ready) {
      MergeSet set = generate_merge_set(n.state, n.progress, gen_, params_);
      n.options = set.empty() ? generate_longitudinal_set(n.state, gen_, params_)
                              : std::move(set.trajectories);
      n.ready = true;
    }
    return n.options;
  }

  const VehicleState& state(int node) const { return nodes_[static_cast<std::size_t>(node)].state; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    VehicleState state;
    std::optional<LaneChangeProgress> progress;
    std::vector<Trajectory> options;
    bool ready = false;
  };

  int intern(int parent, const VehicleState& s, const std::optional<LaneChangeProgress>& p) {
    std::vector<double> key{static_cast<double>(parent), s.x, s.y, s.v, s.psi,
                            p ? 1.0 : 0.0};
    if (p) key.insert(key.end(), {p->elapsed, p->duration, p->origin_y, p->goal_y,
                                  p->y_rate, p->y_accel});
    auto [it, inserted] = index_.try_emplace(std::move(key), static_cast<int>(nodes_.size()));
    if (inserted) nodes_.push_back(Node{s, p, {}, false});
    return it->second;
  }

  VehicleParams params_;
  TrajectoryGenConfig gen_;
  std::vector<Node> nodes_;
  std::map<std::vector<double>, int> index_;
};

// Role-conditioned closed-loop predictions of one interacting vehicle against
// the ego prefixes of an EgoTree; decisions are memoized per prefix node.
class PairModel {
 public:
  PairModel(EgoTree& tree, const TrafficVehicle& other, const VehicleParams& ego_params,
            const RoadGeometry& road, const PlannerConfig& cfg)
      : tree_(tree), other_(other), ego_params_(ego_params), road_(road), cfg_(cfg),
        gen_(cfg.trajectory_config(road)), spec_(cfg.game_spec()) {
    for (auto& v : state_at_) v.assign(tree.size(), std::nullopt);
    for (auto& v : accel_at_) v.assign(tree.size(), std::nullopt);
    for (auto& s : state_at_) s[0] = other.state;
  }

  double first_accel(Role role) { return decide(0, role); }

  RolePrediction rollout(const Trajectory& ego_traj, const std::vector<int>& path, Role role) {
    const std::size_t r = role_index(role);
    RolePrediction pred;
    pred.states.push_back(other_.state);
    VehicleState cur = other_.state;
    double disc = 1.0;
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
      const double a = decide(path[t], role);
      cur = propagate_longitudinal(cur, a, other_.params, cfg_.integration);
      auto& slot = state_at_[r][static_cast<std::size_t>(path[t + 1])];
      if (!slot) slot = cur;
      pred.states.push_back(cur);
      const PairState s{ego_traj.states[t + 1], cur, ego_params_, other_.params, &road_};
      pred.value += disc * stage_reward(s, {}, {}, cfg_.weights, cfg_.reward).total;
      pred.safe = pred.safe && is_safe(s, cfg_.reward);
      disc *= cfg_.discount;
    }
    pred.degenerate = degenerate_;
    return pred;
  }

 private:
  double decide(int node, Role role) {
    const std::size_t r = role_index(role);
    const auto n = static_cast<std::size_t>(node);
    if (accel_at_[r][n]) return *accel_at_[r][n];
    const VehicleState other = *state_at_[r][n];
    const auto& ego_options = tree_.options(node);
    const auto other_options = generate_longitudinal_set(other, gen_, other_.params);
    if (ego_options.empty() || other_options.empty()) {
      degenerate_ = true;
      accel_at_[r][n] = 0.0;
      return 0.0;
    }
    const PairState ps{tree_.state(node), other, ego_params_, other_.params, &road_};
    const PairPayoffs payoffs = build_payoffs(ps, ego_options, other_options, spec_);
    auto accel_for = [&](Role role_k) {
      return other_options[acting_solution(payoffs, role_k).index].controls.front().a;
    };
    accel_at_[r][n] = accel_for(role);
    // Both roles start from the same state at the root; share its table.
    const std::size_t o = 1 - r;
    if (node == 0 && !accel_at_[o][n]) accel_at_[o][n] = accel_for(o == 0 ? Role::leader : Role::follower);
    return *accel_at_[r][n];
  }

  EgoTree& tree_;
  TrafficVehicle other_;
  VehicleParams ego_params_;
  const RoadGeometry& road_;
  const PlannerConfig& cfg_;
  TrajectoryGenConfig gen_;
  GameSpec spec_;
  std::array<std::vector<std::optional<VehicleState>>, 2> state_at_;
  std::array<std::vector<std::optional<double>>, 2> accel_at_;
  bool degenerate_ = false;
};

EnvironmentPrediction predict_environment(const TrafficVehicle& env, const Trajectory& ego_traj,
                                          const VehicleParams& ego_params,
                                          const RoadGeometry& road, const PlannerConfig& cfg) {
  EnvironmentPrediction out;
  out.vehicle_id = env.id;
  VehicleState cur = env.state;
  double disc = 1.0;
  for (std::size_t t = 0; t + 1 < ego_traj.states.size(); ++t) {
    cur = propagate_longitudinal(cur, 0.0, env.params, cfg.integration);
    const PairState s{ego_traj.states[t + 1], cur, ego_params, env.params, &road};
    out.value += disc * stage_reward(s, {}, {}, cfg.weights, cfg.reward).total;
    out.safe = out.safe && is_safe(s, cfg.reward);
    disc *= cfg.discount;
  }
  return out;
}

double solo_value(const Trajectory& ego_traj, const VehicleParams& ego_params,
                  const RoadGeometry& road, const PlannerConfig& cfg, bool& on_road) {
  double value = 0.0;
  double disc = 1.0;
  on_road = true;
  const RewardWeights& w = cfg.weights;
  for (std::size_t t = 1; t < ego_traj.states.size(); ++t) {
    const auto r = self_terms(ego_traj.states[t], ego_params, road);
    value += disc * (w.w2 * r[1] + w.w3 * r[2] + w.w4 * r[3]);
    on_road = on_road && ego_on_road(ego_traj.states[t], road);
    disc *= cfg.discount;
  }
  return value;
}

struct SinglePair {
  EgoTree tree;
  std::vector<int> path;
  std::optional<PairModel> model;

  SinglePair(const PairState& pair, const Trajectory& ego_traj, const PlannerConfig& cfg)
      : tree(pair.ego_params, cfg.trajectory_config(*pair.road)) {
    path = tree.intern_path(ego_traj);
    model.emplace(tree, TrafficVehicle{0, pair.other, pair.other_params}, pair.ego_params,
                  *pair.road, cfg);
  }
};

}  // namespace

std::vector<PairState> predict_pair_rollout(const PairState& pair, const Trajectory& ego_traj,
                                            Role role, const PlannerConfig& cfg) {
  SinglePair single(pair, ego_traj, cfg);
  const RolePrediction pred = single.model->rollout(ego_traj, single.path, role);
  std::vector<PairState> out;
  for (std::size_t t = 0; t < pred.states.size(); ++t) {
    out.push_back({ego_traj.states[t], pred.states[t], pair.ego_params, pair.other_params,
                   pair.road});
  }
  return out;
}

double expected_pair_reward(const PairState& pair, const Trajectory& ego_traj,
                            const BeliefState& belief, const PlannerConfig& cfg) {
  SinglePair single(pair, ego_traj, cfg);
  const double leader = single.model->rollout(ego_traj, single.path, Role::leader).value;
  const double follower = single.model->rollout(ego_traj, single.path, Role::follower).value;
  return belief.p_leader * leader + belief.p_follower * follower;
}

double pair_safety_probability(const PairState& pair, const Trajectory& ego_traj,
                               const BeliefState& belief, const PlannerConfig& cfg) {
  SinglePair single(pair, ego_traj, cfg);
  const bool leader = single.model->rollout(ego_traj, single.path, Role::leader).safe;
  const bool follower = single.model->rollout(ego_traj, single.path, Role::follower).safe;
  return (leader ? belief.p_leader : 0.0) + (follower ? belief.p_follower : 0.0);
}

PlanResult plan(const TrafficSnapshot& traffic, const PlannerConfig& cfg) {
  const TrajectoryGenConfig gen = cfg.trajectory_config(traffic.road);
  MergeSet candidates = generate_merge_set(traffic.ego, traffic.ego_progress, gen,
                                           traffic.ego_params);
  if (candidates.empty()) throw std::invalid_argument("plan: ego has no admissible trajectory");

  EgoTree tree(traffic.ego_params, gen);
  std::vector<std::vector<int>> paths;
  paths.reserve(candidates.size());
  for (const auto& c : candidates.trajectories) paths.push_back(tree.intern_path(c));
  tree.set_options(0, candidates.trajectories);

  std::vector<PairModel> models;
  models.reserve(traffic.interacting.size());
  for (const auto& iv : traffic.interacting) {
    models.emplace_back(tree, TrafficVehicle{iv.id, iv.state, iv.params}, traffic.ego_params,
                        traffic.road, cfg);
  }

  struct Evaluation {
    bool feasible = false;
    double safety_sum = 0.0;
    double objective = 0.0;
    std::vector<PairPrediction> pairs;
    std::vector<EnvironmentPrediction> environment;
  };

  std::vector<Evaluation> evals(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Trajectory& cand = candidates.trajectories[c];
    Evaluation& ev = evals[c];
    std::vector<double> probabilities;
    for (std::size_t k = 0; k < models.size(); ++k) {
      const InteractingVehicle& iv = traffic.interacting[k];
      PairPrediction pp;
      pp.vehicle_id = iv.id;
      pp.belief = iv.belief;
      for (Role role : {Role::leader, Role::follower}) {
        const std::size_t r = role_index(role);
        pp.roles[r] = models[k].rollout(cand, paths[c], role);
        pp.first_accel[r] = models[k].first_accel(role);
        pp.safety_probability += pp.roles[r].safe ? iv.belief.probability(role) : 0.0;
        pp.expected_reward += iv.belief.probability(role) * pp.roles[r].value;
      }
      probabilities.push_back(pp.safety_probability);
      ev.objective += pp.expected_reward;
      ev.pairs.push_back(std::move(pp));
    }
    for (const auto& env : traffic.environment) {
      EnvironmentPrediction ep =
          predict_environment(env, cand, traffic.ego_params, traffic.road, cfg);
      probabilities.push_back(ep.safe ? 1.0 : 0.0);
      ev.objective += ep.value;
      ev.environment.push_back(ep);
    }
    bool on_road = true;
    const double solo = solo_value(cand, traffic.ego_params, traffic.road, cfg, on_road);
    if (probabilities.empty()) {
      ev.objective = solo;
      probabilities.push_back(on_road ? 1.0 : 0.0);
    }
    for (double p : probabilities) ev.safety_sum += p;
    ev.feasible = chance_constraint_ok(probabilities, cfg.epsilon);
  }

  PlanResult result;
  result.candidate_count = candidates.size();
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < evals.size(); ++c) {
    if (!evals[c].feasible) continue;
    ++result.feasible_count;
    if (!best || evals[c].objective > evals[*best].objective) best = c;
  }
  result.feasible = best.has_value();
  if (!best) {
    best = 0;
    for (std::size_t c = 1; c < evals.size(); ++c) {
      const Evaluation& e = evals[c];
      const Evaluation& b = evals[*best];
      if (e.safety_sum > b.safety_sum ||
          (e.safety_sum == b.safety_sum && e.objective > b.objective)) {
        best = c;
      }
    }
  }
  result.chosen_index = *best;
  result.chosen = candidates.trajectories[*best];
  result.expected_reward = evals[*best].objective;
  result.pairs = std::move(evals[*best].pairs);
  result.environment = std::move(evals[*best].environment);
  return result;
}

}  // namespace lfgc
