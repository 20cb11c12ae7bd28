#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "lfgc/quintic.hpp"

using namespace lfgc;

namespace {

// Full 6x6 boundary system, solved numerically.
Eigen::Matrix<double, 6, 1> oracle(double p0, double v0, double a0, double p1, double v1,
                                   double a1, double T) {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 6; ++i) {
    A(3, i) = std::pow(T, i);
    if (i >= 1) A(4, i) = i * std::pow(T, i - 1);
    if (i >= 2) A(5, i) = i * (i - 1) * std::pow(T, i - 2);
  }
  A(0, 0) = 1;
  A(1, 1) = 1;
  A(2, 2) = 2;
  Eigen::Matrix<double, 6, 1> b;
  b << p0, v0, a0, p1, v1, a1;
  return A.fullPivLu().solve(b);
}

double max_residual(const QuinticSegment& q, const BoundaryState& ini, const BoundaryState& term) {
  const BoundaryState s = q.evaluate(0.0), e = q.evaluate(q.duration);
  double r = 0;
  for (double d : {s.x - ini.x, s.xd - ini.xd, s.xdd - ini.xdd, s.y - ini.y, s.yd - ini.yd,
                   s.ydd - ini.ydd, e.x - term.x, e.xd - term.xd, e.xdd - term.xdd,
                   e.y - term.y, e.yd - term.yd, e.ydd - term.ydd}) {
    r = std::max(r, std::abs(d));
  }
  return r;
}

}  // namespace

TEST(Quintic, ZeroBoundaryGivesZeroCoefficients) {
  for (double T : {0.5, 1.0, 3.0, 7.0}) {
    const QuinticSegment q = solve_quintic({}, {}, T);
    for (int i = 0; i < 6; ++i) {
      EXPECT_EQ(q.ax[i], 0.0);
      EXPECT_EQ(q.ay[i], 0.0);
    }
  }
}

TEST(Quintic, RestToRestLaneChange) {
  BoundaryState term;
  term.y = 3.6;
  const QuinticSegment q = solve_quintic({}, term, 3.0);
  for (int k = 0; k <= 300; ++k) {
    const double z = 0.01 * k, u = z / 3.0;
    const double ref = 3.6 * (10 * std::pow(u, 3) - 15 * std::pow(u, 4) + 6 * std::pow(u, 5));
    EXPECT_NEAR(q.evaluate(z).y, ref, 1e-9);
  }
}

TEST(Quintic, MatchesLinearSolve) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5, 5), T(0.2, 6);
  for (int n = 0; n < 200; ++n) {
    BoundaryState a{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    BoundaryState b{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double d = T(rng);
    const QuinticSegment q = solve_quintic(a, b, d);
    const auto cx = oracle(a.x, a.xd, a.xdd, b.x, b.xd, b.xdd, d);
    const auto cy = oracle(a.y, a.yd, a.ydd, b.y, b.yd, b.ydd, d);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(q.ax[i], cx(i), 1e-7 * (1 + std::abs(cx(i))));
      EXPECT_NEAR(q.ay[i], cy(i), 1e-7 * (1 + std::abs(cy(i))));
    }
  }
}

TEST(Quintic, RandomBoundaryResidual) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-50, 50), vel(-30, 30), acc(-4, 4), T(0.5, 5);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    BoundaryState a{pos(rng), vel(rng), acc(rng), pos(rng) / 10, vel(rng) / 10, acc(rng)};
    BoundaryState b{pos(rng), vel(rng), acc(rng), pos(rng) / 10, vel(rng) / 10, acc(rng)};
    worst = std::max(worst, max_residual(solve_quintic(a, b, T(rng)), a, b));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Quintic, RejectsBadInput) {
  EXPECT_THROW(solve_quintic({}, {}, 0.0), std::invalid_argument);
  EXPECT_THROW(solve_quintic({}, {}, -1.0), std::invalid_argument);
  BoundaryState bad;
  bad.y = std::nan("");
  EXPECT_THROW(solve_quintic(bad, {}, 1.0), std::invalid_argument);
}
