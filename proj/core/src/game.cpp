#include "lfgc/game.hpp"

#include <cmath>
#include <stdexcept>

namespace lfgc {

const char* to_string(Role role) {
  return role == Role::leader ? "leader" : "follower";
}

PayoffMatrix PayoffMatrix::transposed() const {
  PayoffMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

std::vector<double> follower_values(const PayoffMatrix& follower) {
  if (follower.rows() == 0 || follower.cols() == 0) {
    throw std::invalid_argument("follower_values: empty action set");
  }
  std::vector<double> q(follower.cols());
  for (std::size_t j = 0; j < follower.cols(); ++j) {
    double m = follower(0, j);
    for (std::size_t i = 1; i < follower.rows(); ++i) m = std::min(m, follower(i, j));
    q[j] = m;
  }
  return q;
}

TableSolution solve_follower(const PayoffMatrix& follower) {
  const auto q = follower_values(follower);
  TableSolution sol;
  sol.value = q[0];
  for (std::size_t j = 1; j < q.size(); ++j) {
    if (q[j] > sol.value) {
      sol.value = q[j];
      sol.index = j;
    }
  }
  for (double v : q) {
    if (v >= sol.value - kFollowerTieTolerance) ++sol.follower_best_set_size;
  }
  return sol;
}

std::vector<std::size_t> follower_best_set(const PayoffMatrix& follower, double tol) {
  const auto q = follower_values(follower);
  double best = q[0];
  for (double v : q) best = std::max(best, v);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] >= best - tol) out.push_back(j);
  }
  return out;
}

TableSolution solve_leader(const PayoffMatrix& leader, const PayoffMatrix& follower,
                           double tol) {
  if (leader.rows() != follower.rows() || leader.cols() != follower.cols()) {
    throw std::invalid_argument("solve_leader: payoff tables differ in shape");
  }
  const auto best = follower_best_set(follower, tol);
  TableSolution sol;
  sol.follower_best_set_size = best.size();
  for (std::size_t i = 0; i < leader.rows(); ++i) {
    double worst = leader(i, best.front());
    for (std::size_t j : best) worst = std::min(worst, leader(i, j));
    if (i == 0 || worst > sol.value) {
      sol.value = worst;
      sol.index = i;
    }
  }
  return sol;
}

namespace {

struct Sample {
  VehicleState state;
  CollisionBox box;
  int lane = 0;
};

// Samples 1..N of every trajectory in a set, laid out per trajectory.
struct SampledSet {
  std::size_t count = 0;
  std::size_t steps = 0;
  std::vector<Sample> samples;

  SampledSet(std::span<const Trajectory> set, std::size_t n, const VehicleParams& p,
             const RoadGeometry& road, double margin)
      : count(set.size()), steps(n) {
    samples.resize(count * steps);
    for (std::size_t i = 0; i < count; ++i) {
      if (set[i].states.size() < n + 1) {
        throw std::invalid_argument("build_payoffs: trajectories shorter than the horizon");
      }
      for (std::size_t t = 0; t < n; ++t) {
        const VehicleState& st = set[i].states[t + 1];
        samples[i * steps + t] = {st, CollisionBox::of(st, p, margin), road.lane_of(st.y)};
      }
    }
  }
  const Sample& at(std::size_t i, std::size_t t) const { return samples[i * steps + t]; }
};

std::vector<double> discounted_self(const SampledSet& set, const VehicleParams& p,
                                    const RoadGeometry& road, const RewardWeights& w,
                                    const std::vector<double>& disc) {
  std::vector<double> out(set.count, 0.0);
  for (std::size_t i = 0; i < set.count; ++i) {
    for (std::size_t t = 0; t < set.steps; ++t) {
      const auto r = self_terms(set.at(i, t).state, p, road);
      out[i] += disc[t] * (w.w2 * r[1] + w.w3 * r[2] + w.w4 * r[3]);
    }
  }
  return out;
}

}  // namespace

PairPayoffs build_payoffs(const PairState& pair, std::span<const Trajectory> ego_set,
                          std::span<const Trajectory> other_set, const GameSpec& spec) {
  if (ego_set.empty() || other_set.empty()) {
    throw std::invalid_argument("build_payoffs: empty action set");
  }
  const RoadGeometry& road = *pair.road;
  const VehicleParams& pe = pair.ego_params;
  const VehicleParams& po = pair.other_params;
  const double margin = spec.reward.box_margin;
  const std::size_t n = std::min(ego_set.front().steps(), other_set.front().steps());
  const SampledSet ego(ego_set, n, pe, road, margin);
  const SampledSet oth(other_set, n, po, road, margin);

  std::vector<double> disc(n);
  double d = 1.0;
  for (std::size_t t = 0; t < n; ++t, d *= spec.discount) disc[t] = d;

  const RewardWeights& w = spec.weights;
  const auto self_ego = discounted_self(ego, pe, road, w, disc);
  const auto self_oth = discounted_self(oth, po, road, w, disc);

  PairPayoffs out{PayoffMatrix(ego.count, oth.count), PayoffMatrix(ego.count, oth.count)};
  const double bumpers = 0.5 * (pe.length + po.length);
  const double gap_s = spec.reward.comfort_time_gap;
  for (std::size_t i = 0; i < ego.count; ++i) {
    for (std::size_t j = 0; j < oth.count; ++j) {
      double joint = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const Sample& a = ego.at(i, t);
        const Sample& b = oth.at(j, t);
        const double dx = std::abs(a.state.x - b.state.x);
        const bool near_boxes = dx <= a.box.ext_x + b.box.ext_x;
        const bool same_lane = a.lane == b.lane &&
                               dx < bumpers + gap_s * std::max(a.state.v, b.state.v);
        if (!near_boxes && !same_lane) continue;
        double stage = 0.0;
        if (near_boxes && a.box.overlaps(b.box)) stage -= w.w1;
        if (same_lane && headway_violated(a.state.x, a.state.v, pe.length, b.state.x,
                                          b.state.v, po.length, gap_s)) {
          stage -= w.w5;
        }
        joint += disc[t] * stage;
      }
      out.ego(i, j) = self_ego[i] + joint;
      out.other(i, j) = self_oth[j] + joint;
    }
  }
  return out;
}

TableSolution acting_solution(const PairPayoffs& payoffs, Role role) {
  if (role == Role::follower) return solve_follower(payoffs.other);
  return solve_leader(payoffs.other.transposed(), payoffs.ego.transposed());
}

namespace {

GameOutcome to_outcome(const TableSolution& sol, std::span<const Trajectory> acting) {
  GameOutcome out;
  out.index = sol.index;
  out.optimal_trajectory = &acting[sol.index];
  out.value = sol.value;
  out.follower_best_set_size = sol.follower_best_set_size;
  return out;
}

}  // namespace

double follower_value(const PairState& pair, const Trajectory& gamma_f,
                      std::span<const Trajectory> leader_set, const GameSpec& spec) {
  if (leader_set.empty()) throw std::invalid_argument("follower_value: empty leader set");
  const auto payoffs = build_payoffs(pair, leader_set, std::span(&gamma_f, 1), spec);
  return follower_values(payoffs.other).front();
}

GameOutcome solve_follower(const PairState& pair, std::span<const Trajectory> follower_set,
                           std::span<const Trajectory> leader_set, const GameSpec& spec) {
  const auto payoffs = build_payoffs(pair, leader_set, follower_set, spec);
  return to_outcome(acting_solution(payoffs, Role::follower), follower_set);
}

GameOutcome solve_leader(const PairState& pair, std::span<const Trajectory> leader_set,
                         std::span<const Trajectory> follower_set, const GameSpec& spec) {
  const auto payoffs = build_payoffs(pair, follower_set, leader_set, spec);
  return to_outcome(acting_solution(payoffs, Role::leader), leader_set);
}

GameOutcome policy_action(const PairState& pair, Role role,
                          std::span<const Trajectory> ego_set,
                          std::span<const Trajectory> other_set, const GameSpec& spec) {
  const auto payoffs = build_payoffs(pair, ego_set, other_set, spec);
  return to_outcome(acting_solution(payoffs, role), other_set);
}

}  // namespace lfgc
