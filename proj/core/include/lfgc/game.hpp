#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfgc/rewards.hpp"
#include "lfgc/trajectories.hpp"

namespace lfgc {

enum class Role { leader, follower };

const char* to_string(Role role);

// Dense payoff table. Rows index the leader's actions, columns the follower's.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  PayoffMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TableSolution {
  std::size_t index = 0;  // chosen action of the solving player
  double value = 0.0;
  std::size_t follower_best_set_size = 0;
};

inline constexpr double kFollowerTieTolerance = 1e-9;

// Q_f(j) = min_i follower(i, j)
std::vector<double> follower_values(const PayoffMatrix& follower);
// argmax_j Q_f(j), lowest index on ties.
TableSolution solve_follower(const PayoffMatrix& follower);
// Indices whose Q_f is within tol of the maximum.
std::vector<std::size_t> follower_best_set(const PayoffMatrix& follower,
                                           double tol = kFollowerTieTolerance);
// argmax_i min_{j in best set} leader(i, j), lowest index on ties.
TableSolution solve_leader(const PayoffMatrix& leader, const PayoffMatrix& follower,
                           double tol = kFollowerTieTolerance);

struct GameSpec {
  RewardWeights weights;
  RewardParams reward;
  double discount = 0.8;
};

// Cumulative rewards of every (ego, other) trajectory pair, both rolled out
// open loop; stage tau is scored on the state reached after the stage-tau
// controls. Rows index ego_set, columns other_set.
struct PairPayoffs {
  PayoffMatrix ego;
  PayoffMatrix other;
};

PairPayoffs build_payoffs(const PairState& pair, std::span<const Trajectory> ego_set,
                          std::span<const Trajectory> other_set, const GameSpec& spec);

struct GameOutcome {
  const Trajectory* optimal_trajectory = nullptr;  // element of the acting set
  std::size_t index = 0;
  double value = 0.0;
  std::size_t follower_best_set_size = 0;
};

// In the functions below the acting player is pair.other; pass
// pair.swapped() to let the ego act.
double follower_value(const PairState& pair, const Trajectory& gamma_f,
                      std::span<const Trajectory> leader_set, const GameSpec& spec);
GameOutcome solve_follower(const PairState& pair, std::span<const Trajectory> follower_set,
                           std::span<const Trajectory> leader_set, const GameSpec& spec);
GameOutcome solve_leader(const PairState& pair, std::span<const Trajectory> leader_set,
                         std::span<const Trajectory> follower_set, const GameSpec& spec);

// Optimal trajectory of pair.other (drawn from other_set) under its role
// against an opponent choosing from ego_set.
GameOutcome policy_action(const PairState& pair, Role role,
                          std::span<const Trajectory> ego_set,
                          std::span<const Trajectory> other_set, const GameSpec& spec);

// Role policies solved from one payoff table: index into other_set.
TableSolution acting_solution(const PairPayoffs& payoffs, Role role);

}  // namespace lfgc
