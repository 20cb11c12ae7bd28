#pragma once

#include <array>
#include <span>
#include <vector>

#include "lfgc/dynamics.hpp"

namespace lfgc {

struct RoadGeometry {
  std::vector<double> lane_centers{0.0, 3.6};
  double lane_width = 3.6;
  double y_min = -1.8;
  double y_max = 5.4;
  double merge_lane_end_x = 300.0;
  int merge_lane = 0;   // index into lane_centers
  int target_lane = 1;  // index into lane_centers

  // Index of the nearest lane center.
  int lane_of(double y) const;
  bool within_lane(double y, int lane) const;
  double lane_y(int lane) const { return lane_centers.at(static_cast<std::size_t>(lane)); }
  double target_y() const { return lane_y(target_lane); }
  double merge_y() const { return lane_y(merge_lane); }
  void validate() const;
};

struct RewardWeights {
  double w1 = 10000.0;  // collision
  double w2 = 5000.0;   // off road / past the merge-lane end
  double w3 = 10.0;     // progress
  double w4 = 50.0;     // target lane attained
  double w5 = 100.0;    // headway discomfort

  std::array<double, 5> as_array() const { return {w1, w2, w3, w4, w5}; }
  void validate() const;
};

struct RewardParams {
  double comfort_time_gap = 0.5;  // s
  double box_margin = 0.5;        // m added on every side of each box
};

// Non-owning view of a two-vehicle traffic state; road must outlive it.
struct PairState {
  VehicleState ego;
  VehicleState other;
  VehicleParams ego_params;
  VehicleParams other_params;
  const RoadGeometry* road = nullptr;

  PairState swapped() const { return {other, ego, other_params, ego_params, road}; }
};

struct StageReward {
  double total = 0.0;
  std::array<double, 5> r{};
};

// Terms that depend on the ego alone: r2, r3, r4.
std::array<double, 5> self_terms(const VehicleState& s, const VehicleParams& p,
                                 const RoadGeometry& road);
// Terms shared by both vehicles: r1, r5. Symmetric in its arguments.
std::array<double, 5> interaction_terms(const VehicleState& a, const VehicleParams& pa,
                                        const VehicleState& b, const VehicleParams& pb,
                                        const RoadGeometry& road,
                                        const RewardParams& rp);
// Reward of the ego in pair. All terms are functions of the state; the
// controls are accepted so stage samples carry the full (state, input) tuple.
StageReward stage_reward(const PairState& pair, const Control& u_ego,
                         const Control& u_other, const RewardWeights& w,
                         const RewardParams& rp = {});

struct StageSample {
  PairState pair;
  Control u_ego;
  Control u_other;
};

// sum_tau lambda^tau stage_reward(tau)
double cumulative_reward(std::span<const StageSample> rollout, const RewardWeights& w,
                         double lambda, const RewardParams& rp = {});

// Collision rectangle oriented by yaw, inflated by margin on every side.
struct CollisionBox {
  double cx = 0, cy = 0, c = 1, s = 0, hl = 0, hw = 0;
  double ext_x = 0, ext_y = 0;  // half extents of the axis-aligned hull

  static CollisionBox of(const VehicleState& st, const VehicleParams& p, double margin);
  bool overlaps(const CollisionBox& o) const;
};

// Same-lane headway below time_gap seconds of the rear vehicle's travel, or
// bumpers touching.
bool headway_violated(double xa, double va, double la, double xb, double vb, double lb,
                      double time_gap);

bool boxes_overlap(const VehicleState& a, const VehicleParams& pa,
                   const VehicleState& b, const VehicleParams& pb, double margin);

// Ego alone respects the road: inside lateral bounds and not past the end of
// the merge lane while still in it.
bool ego_on_road(const VehicleState& ego, const RoadGeometry& road);

bool is_safe(const PairState& pair, const RewardParams& rp = {});

}  // namespace lfgc
