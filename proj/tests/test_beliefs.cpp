#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lfgc/beliefs.hpp"

using namespace lfgc;

namespace {

double gauss(double r, double var) {
  return std::exp(-0.5 * r * r / var) / std::sqrt(2 * M_PI * var);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Residual, Components) {
  EXPECT_TRUE(residual(VehicleState{1, 2, 3, 0.1}, VehicleState{1, 2, 3, 0.1}).isZero());
  EXPECT_TRUE(residual(VehicleState{11, 2, 3, 0}, VehicleState{10, 2, 3, 0}).isApprox(vec({1, 0, 0, 0})));
  const RoadGeometry road;
  const PairState a{{1, 0, 0, 0}, {5, 3.6, 20, 0}, {}, {}, &road};
  const PairState b{{0, 0, 0, 0}, {4, 3.6, 21, 0}, {}, {}, &road};
  EXPECT_EQ(residual(a, b, ResidualMode::interacting).size(), 4);
  EXPECT_TRUE(residual(a, b, ResidualMode::joint).isApprox(vec({1, 0, 0, 0, 1, 0, -1, 0})));
}

TEST(Likelihood, ScalarGaussian) {
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(1, 1);
  EXPECT_NEAR(likelihood(vec({0}), W), gauss(0, 1), 1e-15);
  EXPECT_NEAR(likelihood(vec({0}), W), 0.39894, 1e-5);
  EXPECT_NEAR(likelihood(vec({2}), W), gauss(2, 1), 1e-15);
  EXPECT_NEAR(likelihood(vec({2}), W), 0.05399, 1e-5);
}

TEST(Likelihood, DiagonalFactorizes) {
  BeliefConfig cfg;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 0.5);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd r = vec({n(rng), n(rng), n(rng), n(rng)});
    double oracle = 1;
    for (int i = 0; i < 4; ++i) oracle *= gauss(r(i), cfg.W(i, i));
    EXPECT_NEAR(likelihood(r, cfg.W) / oracle, 1.0, 1e-12);
    // the mean is the mode
    EXPECT_LE(likelihood(r, cfg.W), likelihood(Eigen::VectorXd::Zero(4), cfg.W));
  }
}

TEST(BeliefUpdate, UninformativeEvidence) {
  BeliefConfig cfg;
  const BeliefState prior{0.3, 0.7};
  const BeliefUpdate u = update_belief(prior, 0.2, 0.2, cfg);
  EXPECT_NEAR(u.posterior.p_leader, 0.3, 1e-15);
}

TEST(BeliefUpdate, ArithmeticFixture) {
  BeliefConfig cfg;
  const BeliefUpdate u = update_belief({0.5, 0.5}, 0.39894, 0.05399, cfg);
  EXPECT_NEAR(u.posterior.p_leader, 0.39894 / (0.39894 + 0.05399), 1e-15);
  EXPECT_NEAR(u.posterior.p_leader, 0.8808, 1e-4);
  EXPECT_TRUE(u.posterior.valid());
}

TEST(BeliefUpdate, MonotoneUnderRepeatedEvidence) {
  BeliefConfig cfg;
  BeliefState b{0.5, 0.5};
  for (int k = 0; k < 10; ++k) {
    const BeliefState next = update_belief(b, 2.0, 1.0, cfg).posterior;
    // odds double each step
    EXPECT_NEAR(next.p_leader / next.p_follower, 2.0 * b.p_leader / b.p_follower, 1e-9);
    EXPECT_GT(next.p_leader, b.p_leader);
    b = next;
  }
}

TEST(BeliefUpdate, FloorKeepsBothRolesAlive) {
  BeliefConfig cfg;
  BeliefState b{0.5, 0.5};
  for (int k = 0; k < 100; ++k) b = update_belief(b, 1.0, 1e-30, cfg).posterior;
  EXPECT_NEAR(b.p_follower, cfg.floor, 1e-15);
  EXPECT_TRUE(b.valid());
  b = update_belief(b, 1e-30, 1.0, cfg).posterior;
  EXPECT_LT(b.p_leader, 0.5);
}

TEST(BeliefUpdate, LogFormMatchesAndSurvivesUnderflow) {
  BeliefConfig cfg;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> l(1e-6, 2), p(0.01, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double a = l(rng), c = l(rng), q = p(rng);
    const BeliefState prior{q, 1 - q};
    EXPECT_NEAR(update_belief(prior, a, c, cfg).posterior.p_leader,
                update_belief_log(prior, std::log(a), std::log(c), cfg).posterior.p_leader, 1e-12);
  }
  // both densities underflow; the log-odds still favor the leader
  const BeliefUpdate u = update_belief_log({0.5, 0.5}, -2000.0, -2003.0, cfg);
  EXPECT_FALSE(u.degenerate);
  EXPECT_NEAR(u.posterior.p_leader, 1.0 / (1.0 + std::exp(-3.0)), 1e-12);
  EXPECT_TRUE(update_belief({0.5, 0.5}, 0.0, 0.0, cfg).degenerate);
}

TEST(BeliefUpdate, TransitionMixesPrior) {
  BeliefConfig cfg;
  cfg.transition << 0.9, 0.1, 0.2, 0.8;
  const BeliefUpdate u = update_belief({1.0, 0.0}, 1.0, 1.0, cfg);
  EXPECT_NEAR(u.posterior.p_leader, 0.9, 1e-15);
}

TEST(BeliefConfig, Validation) {
  BeliefConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.W(0, 0) = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.mode = ResidualMode::joint;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.p0 = {0.7, 0.7};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
