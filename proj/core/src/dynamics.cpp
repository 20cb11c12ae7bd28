#include "lfgc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lfgc {

namespace {

constexpr double kBoundSlack = 1e-9;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

VehicleState euler_step(const VehicleState& s, double a, double beta,
                        double l_r, double dt) {
  VehicleState next;
  next.x = s.x + dt * s.v * std::cos(s.psi + beta);
  next.y = s.y + dt * s.v * std::sin(s.psi + beta);
  next.psi = s.psi + dt * (s.v / l_r) * std::sin(beta);
  next.v = s.v + dt * a;
  return next;
}

}  // namespace

void VehicleParams::validate() const {
  require(l_f > 0 && l_r > 0, "vehicle params: l_f and l_r must be positive");
  require(length > 0 && width > 0,
          "vehicle params: length and width must be positive");
  require(a_bound > 0 && delta_bound > 0 && delta_bound < M_PI / 2,
          "vehicle params: actuation bounds out of range");
  require(v_min >= 0 && v_max > v_min,
          "vehicle params: need 0 <= v_min < v_max");
}

void Integration::validate() const {
  require(std::isfinite(dt) && dt > 0, "integration: dt must be positive");
  require(substeps >= 1, "integration: substeps must be >= 1");
}

bool is_finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) &&
         std::isfinite(s.psi);
}

double slip_angle(double delta_f, const VehicleParams& params) {
  return std::atan(params.l_r / (params.l_r + params.l_f) * std::tan(delta_f));
}

double steering_for_slip(double beta, const VehicleParams& params) {
  return std::atan(std::tan(beta) * (params.l_r + params.l_f) / params.l_r);
}

VehicleState step_bicycle(const VehicleState& s, const Control& u,
                          const VehicleParams& params, double dt) {
  if (!is_finite(s) || !std::isfinite(u.a) || !std::isfinite(u.delta_f) ||
      !std::isfinite(dt)) {
    throw DomainError("step_bicycle: non-finite input");
  }
  if (dt <= 0) throw DomainError("step_bicycle: dt must be positive");
  if (std::abs(u.a) > params.a_bound + kBoundSlack ||
      std::abs(u.delta_f) > params.delta_bound + kBoundSlack) {
    throw DomainError("step_bicycle: control outside actuation bounds");
  }
  return euler_step(s, u.a, slip_angle(u.delta_f, params), params.l_r, dt);
}

VehicleState step_longitudinal(const VehicleState& s, double a,
                               const VehicleParams& params, double dt) {
  if (!is_finite(s) || !std::isfinite(a) || !std::isfinite(dt)) {
    throw DomainError("step_longitudinal: non-finite input");
  }
  VehicleState next = s;
  next.x = s.x + s.v * dt;
  next.v = std::clamp(s.v + a * dt, params.v_min, params.v_max);
  return next;
}

double speed_limited_accel(double v, double a, const VehicleParams& params,
                           double horizon) {
  double lo = (params.v_min - v) / horizon;
  double hi = (params.v_max - v) / horizon;
  return std::clamp(std::clamp(a, lo, hi), -params.a_bound, params.a_bound);
}

VehicleState propagate(const VehicleState& s, const Control& u,
                       const VehicleParams& params, const Integration& integ) {
  if (!is_finite(s) || !std::isfinite(u.a) || !std::isfinite(u.delta_f)) {
    throw DomainError("propagate: non-finite input");
  }
  if (std::abs(u.a) > params.a_bound + kBoundSlack ||
      std::abs(u.delta_f) > params.delta_bound + kBoundSlack) {
    throw DomainError("propagate: control outside actuation bounds");
  }
  const double beta = slip_angle(u.delta_f, params);
  const double h = integ.substep();
  VehicleState cur = s;
  for (int i = 0; i < integ.substeps; ++i) {
    cur = euler_step(cur, u.a, beta, params.l_r, h);
  }
  return cur;
}

VehicleState propagate_longitudinal(const VehicleState& s, double a,
                                    const VehicleParams& params,
                                    const Integration& integ) {
  const double h = integ.substep();
  VehicleState cur = s;
  for (int i = 0; i < integ.substeps; ++i) {
    cur = step_longitudinal(cur, a, params, h);
  }
  return cur;
}

}  // namespace lfgc
