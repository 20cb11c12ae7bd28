#include "lfgc/quintic.hpp"

#include <cmath>
#include <stdexcept>

namespace lfgc {

namespace {

// The first three coefficients follow from the initial conditions; the other
// three solve the reduced 3x3 system in closed form.
std::array<double, 6> solve_axis(double p0, double v0, double a0, double p1,
                                 double v1, double a1, double T) {
  std::array<double, 6> c{};
  c[0] = p0;
  c[1] = v0;
  c[2] = 0.5 * a0;
  const double T2 = T * T;
  const double T3 = T2 * T;
  const double h = p1 - (c[0] + c[1] * T + c[2] * T2);
  const double dv = v1 - (c[1] + 2.0 * c[2] * T);
  const double da = a1 - 2.0 * c[2];
  c[3] = (10.0 * h - 4.0 * dv * T + 0.5 * da * T2) / T3;
  c[4] = (-15.0 * h + 7.0 * dv * T - da * T2) / (T3 * T);
  c[5] = (6.0 * h - 3.0 * dv * T + 0.5 * da * T2) / (T3 * T2);
  return c;
}

void eval_axis(const std::array<double, 6>& c, double z, double& p, double& v,
               double& a) {
  p = c[0] + z * (c[1] + z * (c[2] + z * (c[3] + z * (c[4] + z * c[5]))));
  v = c[1] + z * (2 * c[2] + z * (3 * c[3] + z * (4 * c[4] + z * 5 * c[5])));
  a = 2 * c[2] + z * (6 * c[3] + z * (12 * c[4] + z * 20 * c[5]));
}

bool finite(const BoundaryState& b) {
  return std::isfinite(b.x) && std::isfinite(b.xd) && std::isfinite(b.xdd) &&
         std::isfinite(b.y) && std::isfinite(b.yd) && std::isfinite(b.ydd);
}

}  // namespace

BoundaryState QuinticSegment::evaluate(double zeta) const {
  BoundaryState b;
  eval_axis(ax, zeta, b.x, b.xd, b.xdd);
  eval_axis(ay, zeta, b.y, b.yd, b.ydd);
  return b;
}

QuinticSegment solve_quintic(const BoundaryState& ini, const BoundaryState& term,
                             double duration) {
  if (!(duration > 0) || !std::isfinite(duration)) {
    throw std::invalid_argument("solve_quintic: duration must be positive");
  }
  if (!finite(ini) || !finite(term)) {
    throw std::invalid_argument("solve_quintic: non-finite boundary");
  }
  QuinticSegment seg;
  seg.duration = duration;
  seg.ax = solve_axis(ini.x, ini.xd, ini.xdd, term.x, term.xd, term.xdd, duration);
  seg.ay = solve_axis(ini.y, ini.yd, ini.ydd, term.y, term.yd, term.ydd, duration);
  return seg;
}

}  // namespace lfgc
