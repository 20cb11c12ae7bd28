#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lfgc/dynamics.hpp"

using namespace lfgc;

TEST(Bicycle, StraightConstantSpeed) {
  const VehicleState s = step_bicycle({0, 0, 10, 0}, {0, 0}, VehicleParams{}, 1.0);
  EXPECT_EQ(s, (VehicleState{10, 0, 10, 0}));
}

TEST(Bicycle, EulerUsesStartSpeed) {
  const VehicleState s = step_bicycle({0, 0, 10, 0}, {2, 0}, VehicleParams{}, 1.0);
  EXPECT_DOUBLE_EQ(s.x, 10.0);
  EXPECT_DOUBLE_EQ(s.v, 12.0);
}

TEST(Bicycle, SteeringHandEvaluation) {
  VehicleParams p;
  p.l_f = p.l_r = 1.5;
  const double beta = std::atan(0.5 * std::tan(0.1));
  EXPECT_NEAR(beta, 0.0501254, 1e-7);
  EXPECT_NEAR(slip_angle(0.1, p), beta, 1e-15);

  const VehicleState s = step_bicycle({0, 0, 10, 0}, {0, 0.1}, p, 0.1);
  EXPECT_NEAR(s.psi, 10.0 / 1.5 * std::sin(beta) * 0.1, 1e-15);
  EXPECT_NEAR(s.psi, 0.0334029, 1e-7);
  EXPECT_NEAR(s.x, 10.0 * std::cos(beta) * 0.1, 1e-15);
  EXPECT_NEAR(s.y, 10.0 * std::sin(beta) * 0.1, 1e-15);
}

TEST(Bicycle, SlipRoundTrip) {
  VehicleParams p;
  p.l_f = 1.2;
  p.l_r = 1.8;
  for (double d = -0.5; d <= 0.5; d += 0.05) {
    EXPECT_NEAR(steering_for_slip(slip_angle(d, p), p), d, 1e-12);
  }
}

TEST(Longitudinal, Examples) {
  VehicleParams p;
  EXPECT_EQ(step_longitudinal({0, 0, 10, 0}, 0, p, 1.0), (VehicleState{10, 0, 10, 0}));
  EXPECT_DOUBLE_EQ(step_longitudinal({0, 0, 31, 0}, 4, p, 1.0).v, std::min(31.0 + 4.0, 32.0));
  EXPECT_DOUBLE_EQ(step_longitudinal({5, 3.6, 0, 0}, -2, p, 1.0).v, std::max(0.0, -2.0));
}

TEST(Longitudinal, MatchesBicycleWithoutSteering) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(1, 30), a(-4, 4), dt(0.01, 1.0);
  VehicleParams p;
  p.v_min = -1e9;
  p.v_max = 1e9;
  for (int i = 0; i < 200; ++i) {
    const VehicleState s{3.0, 0.0, v(rng), 0.0};
    const double ai = a(rng), h = dt(rng);
    const VehicleState b = step_bicycle(s, {ai, 0}, p, h);
    const VehicleState l = step_longitudinal(s, ai, p, h);
    EXPECT_NEAR(b.x, l.x, 1e-12);
    EXPECT_NEAR(b.v, l.v, 1e-12);
    EXPECT_NEAR(b.y, l.y, 1e-12);
  }
}

TEST(Propagate, SubstepsCompose) {
  VehicleParams p;
  const Integration integ{1.0, 10};
  const Control u{1.0, 0.05};
  VehicleState manual{0, 0, 15, 0};
  for (int i = 0; i < 10; ++i) manual = step_bicycle(manual, u, p, 0.1);
  const VehicleState s = propagate({0, 0, 15, 0}, u, p, integ);
  EXPECT_NEAR(s.x, manual.x, 1e-12);
  EXPECT_NEAR(s.y, manual.y, 1e-12);
  EXPECT_NEAR(s.psi, manual.psi, 1e-12);
}

TEST(Propagate, LongitudinalClampsEverySubstep) {
  VehicleParams p;
  const VehicleState s = propagate_longitudinal({0, 0, 31, 0}, 4.0, p, {1.0, 10});
  double x = 0, v = 31;
  for (int i = 0; i < 10; ++i) {
    x += v * 0.1;
    v = std::min(v + 0.4, 32.0);
  }
  EXPECT_DOUBLE_EQ(s.v, 32.0);
  EXPECT_NEAR(s.x, x, 1e-9);
}

TEST(Params, Validation) {
  VehicleParams p;
  EXPECT_NO_THROW(p.validate());
  p.v_max = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  Integration bad{1.0, 0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(SpeedLimitedAccel, StaysInsideLimits) {
  VehicleParams p;
  for (double v = 0; v <= 32; v += 2) {
    for (double a = -4; a <= 4; a += 1) {
      const double lim = speed_limited_accel(v, a, p, 4.0);
      EXPECT_LE(std::abs(lim), std::abs(a) + 1e-12);
      EXPECT_GE(v + 4.0 * lim, p.v_min - 1e-9);
      EXPECT_LE(v + 4.0 * lim, p.v_max + 1e-9);
    }
  }
}
