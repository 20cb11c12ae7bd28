#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfgc/dynamics.hpp"
#include "lfgc/quintic.hpp"

namespace lfgc {

enum class ManeuverKind { lane_keep, lane_change, abort, continue_change };

const char* to_string(ManeuverKind kind);

struct Maneuver {
  ManeuverKind kind = ManeuverKind::lane_keep;
  // Start step for lane_change, abort step for abort, -1 otherwise.
  int step = -1;
  // Accelerations applied on the lane-keep prefix.
  std::vector<double> profile;
  // Lateral segments in order of activation, with their start times.
  std::vector<QuinticSegment> segments;
  std::vector<double> segment_starts;
};

// State of an unfinished lateral maneuver, sufficient to continue or abort it.
struct LaneChangeProgress {
  double elapsed = 0.0;   // time since the maneuver started
  double duration = 3.0;  // total maneuver duration
  double origin_y = 0.0;
  double goal_y = 0.0;
  double y_rate = 0.0;
  double y_accel = 0.0;

  double remaining() const { return duration - elapsed; }
};

struct Trajectory {
  std::vector<VehicleState> states;  // N + 1 samples
  std::vector<Control> controls;     // N controls
  std::vector<std::optional<LaneChangeProgress>> progress;  // per sample
  Maneuver maneuver;
  Integration integration;

  std::size_t steps() const { return controls.size(); }
};

struct TrajectoryGenConfig {
  int horizon = 4;
  Integration integration;
  std::vector<double> accel_levels{-2.0, 0.0, 2.0};
  double lane_change_duration = 3.0;
  double lane_width = 3.6;
  double origin_lane_y = 0.0;
  double target_lane_y = 3.6;

  void validate() const;
};

// One trajectory per acceleration profile, profile index in lexicographic
// order over accel_levels with step 0 most significant.
std::vector<Trajectory> generate_longitudinal_set(const VehicleState& s,
                                                  const TrajectoryGenConfig& cfg,
                                                  const VehicleParams& params);

struct MergeSet {
  std::vector<Trajectory> trajectories;
  std::size_t rejected = 0;  // plans dropped for violating actuation bounds

  bool empty() const { return trajectories.empty(); }
  std::size_t size() const { return trajectories.size(); }
};

// Candidate set of the merging vehicle. Not mid-change: lane keep with every
// profile, then a lane change starting at each step t with profiles on the
// t-step prefix. Mid-change: continue, then abort at each sample before the
// change completes. Speed is held once a lateral maneuver has started.
MergeSet generate_merge_set(const VehicleState& s,
                            const std::optional<LaneChangeProgress>& progress,
                            const TrajectoryGenConfig& cfg,
                            const VehicleParams& params);

// Cardinality of generate_merge_set before any plan is dropped.
std::size_t nominal_merge_set_size(
    const TrajectoryGenConfig& cfg,
    const std::optional<LaneChangeProgress>& progress);

class InfeasibleStep : public std::runtime_error {
 public:
  InfeasibleStep(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Per-step controls that reproduce the sampled states under the trajectory's
// integration scheme. Throws InfeasibleStep when steering would exceed bounds.
std::vector<Control> recover_controls(const Trajectory& traj,
                                      const VehicleParams& params);

// Re-integrate a control sequence from the first state of traj.
std::vector<VehicleState> replay_controls(const VehicleState& start,
                                          const std::vector<Control>& controls,
                                          const VehicleParams& params,
                                          const Integration& integ);

// Steering that brings y to y_target at the end of one sampling period while
// applying acceleration a. Empty when no steering within bounds achieves it.
std::optional<Control> lateral_tracking_control(const VehicleState& s, double a,
                                                double y_target,
                                                const VehicleParams& params,
                                                const Integration& integ);

}  // namespace lfgc
