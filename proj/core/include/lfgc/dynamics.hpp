#pragma once

#include <stdexcept>

namespace lfgc {

// Pose and speed of a vehicle in the road frame (x along the road, y lateral).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
  double psi = 0.0;

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct Control {
  double a = 0.0;        // along the velocity direction
  double delta_f = 0.0;  // front-wheel steering angle
  friend bool operator==(const Control&, const Control&) = default;
};

struct VehicleParams {
  double l_f = 1.5;
  double l_r = 1.5;
  double length = 4.8;
  double width = 1.8;
  double a_bound = 4.0;
  double delta_bound = 0.5;
  double v_min = 0.0;
  double v_max = 32.0;

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Sampling period and the number of Euler sub-steps used inside it.
struct Integration {
  double dt = 1.0;
  int substeps = 10;

  double substep() const { return dt / substeps; }
  void validate() const;
};

bool is_finite(const VehicleState& s);

// beta = atan(l_r / (l_r + l_f) * tan(delta_f))
double slip_angle(double delta_f, const VehicleParams& params);
// Inverse of slip_angle.
double steering_for_slip(double beta, const VehicleParams& params);

// One forward-Euler step of the kinematic bicycle model. No speed clamping.
VehicleState step_bicycle(const VehicleState& s, const Control& u,
                          const VehicleParams& params, double dt);

// Lane-keeping model: x += v dt, v += a dt clamped to [v_min, v_max].
VehicleState step_longitudinal(const VehicleState& s, double a,
                               const VehicleParams& params, double dt);

// Largest-magnitude acceleration within a_bound that keeps v inside the speed
// limits for the whole horizon when held constant.
double speed_limited_accel(double v, double a, const VehicleParams& params,
                           double horizon);

// Hold u for one sampling period, integrating with sub-steps.
VehicleState propagate(const VehicleState& s, const Control& u,
                       const VehicleParams& params, const Integration& integ);
VehicleState propagate_longitudinal(const VehicleState& s, double a,
                                    const VehicleParams& params,
                                    const Integration& integ);

}  // namespace lfgc
