#include "lfgc/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lfgc {

bool BeliefState::valid(double tol) const {
  return p_leader >= 0 && p_leader <= 1 && p_follower >= 0 && p_follower <= 1 &&
         std::abs(p_leader + p_follower - 1.0) <= tol;
}

void BeliefConfig::validate() const {
  if (W.rows() != W.cols() || (W.rows() != 4 && W.rows() != 8)) {
    throw std::invalid_argument("beliefs: W must be 4x4 (or 8x8 in joint mode)");
  }
  if (mode == ResidualMode::joint && W.rows() != 8) {
    throw std::invalid_argument("beliefs: joint residual mode needs an 8x8 W");
  }
  if (mode == ResidualMode::interacting && W.rows() != 4) {
    throw std::invalid_argument("beliefs: interacting residual mode needs a 4x4 W");
  }
  if (!W.isApprox(W.transpose(), 1e-12) || W.llt().info() != Eigen::Success) {
    throw std::invalid_argument("beliefs: W must be symmetric positive definite");
  }
  for (int r = 0; r < 2; ++r) {
    if ((transition.row(r).array() < 0).any() ||
        std::abs(transition.row(r).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("beliefs: transition rows must be distributions");
    }
  }
  if (!p0.valid()) throw std::invalid_argument("beliefs: p0 must be a distribution");
  if (!(floor >= 0 && floor < 0.5)) throw std::invalid_argument("beliefs: floor must lie in [0, 0.5)");
}

Eigen::VectorXd residual(const VehicleState& observed, const VehicleState& predicted) {
  Eigen::VectorXd r(4);
  r << observed.x - predicted.x, observed.y - predicted.y, observed.v - predicted.v,
      observed.psi - predicted.psi;
  return r;
}

Eigen::VectorXd residual(const PairState& observed, const PairState& predicted,
                         ResidualMode mode) {
  if (mode == ResidualMode::interacting) return residual(observed.other, predicted.other);
  Eigen::VectorXd r(8);
  r << residual(observed.ego, predicted.ego), residual(observed.other, predicted.other);
  return r;
}

double log_likelihood(const Eigen::VectorXd& r, const Eigen::MatrixXd& W) {
  if (r.size() != W.rows()) throw std::invalid_argument("likelihood: dimension mismatch");
  const Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("likelihood: W must be positive definite");
  }
  const Eigen::VectorXd z = llt.matrixL().solve(r);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < W.rows(); ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const double k = static_cast<double>(r.size());
  return -0.5 * (z.squaredNorm() + log_det + k * std::log(2.0 * M_PI));
}

double likelihood(const Eigen::VectorXd& r, const Eigen::MatrixXd& W) {
  return std::exp(log_likelihood(r, W));
}

namespace {

BeliefState apply_floor(double p_leader, double floor) {
  const double p = std::clamp(p_leader, floor, 1.0 - floor);
  return {p, 1.0 - p};
}

Eigen::Vector2d predicted_prior(const BeliefState& prior, const BeliefConfig& cfg) {
  return cfg.transition.transpose() * Eigen::Vector2d(prior.p_leader, prior.p_follower);
}

}  // namespace

BeliefUpdate update_belief(const BeliefState& prior, double lambda_leader,
                           double lambda_follower, const BeliefConfig& cfg) {
  if (!(lambda_leader >= 0) || !(lambda_follower >= 0)) {
    throw std::invalid_argument("update_belief: densities must be nonnegative");
  }
  if (lambda_leader == 0 && lambda_follower == 0) return {prior, true};
  const Eigen::Vector2d pred = predicted_prior(prior, cfg);
  const double num_l = lambda_leader * pred(0);
  const double num_f = lambda_follower * pred(1);
  if (num_l + num_f == 0) return {prior, true};
  return {apply_floor(num_l / (num_l + num_f), cfg.floor), false};
}

BeliefUpdate update_belief_log(const BeliefState& prior, double log_leader,
                               double log_follower, const BeliefConfig& cfg) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (std::isnan(log_leader) || std::isnan(log_follower)) {
    throw std::invalid_argument("update_belief_log: NaN log density");
  }
  if (log_leader == kNegInf && log_follower == kNegInf) return {prior, true};
  const Eigen::Vector2d pred = predicted_prior(prior, cfg);
  const double a = log_leader + std::log(pred(0));
  const double b = log_follower + std::log(pred(1));
  if (a == kNegInf && b == kNegInf) return {prior, true};
  // p_leader = 1 / (1 + exp(b - a))
  const double p = b - a > 0 ? std::exp(a - b) / (1.0 + std::exp(a - b))
                             : 1.0 / (1.0 + std::exp(b - a));
  return {apply_floor(p, cfg.floor), false};
}

}  // namespace lfgc
