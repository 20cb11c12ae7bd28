#pragma once

#include <array>

namespace lfgc {

// Position, velocity and acceleration in both road axes.
struct BoundaryState {
  double x = 0.0, xd = 0.0, xdd = 0.0;
  double y = 0.0, yd = 0.0, ydd = 0.0;
};

// x(zeta) = sum ax[i] zeta^i and y(zeta) = sum ay[i] zeta^i on [0, duration].
struct QuinticSegment {
  std::array<double, 6> ax{};
  std::array<double, 6> ay{};
  double duration = 0.0;

  BoundaryState evaluate(double zeta) const;
};

// Coefficients matching position, velocity and acceleration at both ends.
// Throws std::invalid_argument for non-positive duration or non-finite input.
QuinticSegment solve_quintic(const BoundaryState& ini, const BoundaryState& term,
                             double duration);

}  // namespace lfgc
