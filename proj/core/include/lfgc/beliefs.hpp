#pragma once

#include <Eigen/Dense>

#include "lfgc/dynamics.hpp"
#include "lfgc/game.hpp"

namespace lfgc {

struct BeliefState {
  double p_leader = 0.5;
  double p_follower = 0.5;

  double probability(Role role) const { return role == Role::leader ? p_leader : p_follower; }
  bool valid(double tol = 1e-12) const;
};

enum class ResidualMode { interacting, joint };

struct BeliefConfig {
  // Residual covariance over (x, y, v, psi) of the interacting vehicle, or the
  // 8x8 block-diagonal covariance of (ego, other) in joint mode.
  Eigen::MatrixXd W = Eigen::Vector4d(0.25, 0.01, 0.25, 0.001).asDiagonal();
  // transition(from, to) over (leader, follower); rows sum to one.
  Eigen::Matrix2d transition = Eigen::Matrix2d::Identity();
  BeliefState p0;
  double floor = 1e-6;
  ResidualMode mode = ResidualMode::interacting;

  // Throws std::invalid_argument when W is not SPD, transition rows do not sum
  // to one, or p0 is not a distribution.
  void validate() const;
};

Eigen::VectorXd residual(const VehicleState& observed, const VehicleState& predicted);
Eigen::VectorXd residual(const PairState& observed, const PairState& predicted,
                         ResidualMode mode);

double likelihood(const Eigen::VectorXd& r, const Eigen::MatrixXd& W);
double log_likelihood(const Eigen::VectorXd& r, const Eigen::MatrixXd& W);

struct BeliefUpdate {
  BeliefState posterior;
  bool degenerate = false;  // no usable evidence, prior kept
};

BeliefUpdate update_belief(const BeliefState& prior, double lambda_leader,
                           double lambda_follower, const BeliefConfig& cfg);
// Same rule on log densities, immune to underflow of both densities.
BeliefUpdate update_belief_log(const BeliefState& prior, double log_leader,
                               double log_follower, const BeliefConfig& cfg);

}  // namespace lfgc
