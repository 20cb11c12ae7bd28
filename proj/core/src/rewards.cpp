#include "lfgc/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lfgc {

int RoadGeometry::lane_of(double y) const {
  int best = 0;
  double best_d = std::abs(y - lane_centers.front());
  for (std::size_t i = 1; i < lane_centers.size(); ++i) {
    const double d = std::abs(y - lane_centers[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

bool RoadGeometry::within_lane(double y, int lane) const {
  return std::abs(y - lane_y(lane)) <= 0.5 * lane_width;
}

void RoadGeometry::validate() const {
  if (lane_centers.size() < 2) throw std::invalid_argument("road: need at least two lanes");
  if (!(lane_width > 0)) throw std::invalid_argument("road: lane_width must be positive");
  if (!std::isfinite(merge_lane_end_x)) {
    throw std::invalid_argument("road: merge_lane_end_x must be finite");
  }
  if (!(y_max > y_min)) throw std::invalid_argument("road: need y_min < y_max");
  const int n = static_cast<int>(lane_centers.size());
  if (merge_lane < 0 || merge_lane >= n || target_lane < 0 || target_lane >= n ||
      merge_lane == target_lane) {
    throw std::invalid_argument("road: merge_lane and target_lane must be distinct lanes");
  }
}

void RewardWeights::validate() const {
  for (double w : as_array()) {
    if (!(w >= 0)) throw std::invalid_argument("reward weights must be nonnegative");
  }
}

CollisionBox CollisionBox::of(const VehicleState& st, const VehicleParams& p,
                              double margin) {
  CollisionBox b;
  b.cx = st.x;
  b.cy = st.y;
  b.c = std::cos(st.psi);
  b.s = std::sin(st.psi);
  b.hl = 0.5 * p.length + margin;
  b.hw = 0.5 * p.width + margin;
  b.ext_x = b.hl * std::abs(b.c) + b.hw * std::abs(b.s);
  b.ext_y = b.hl * std::abs(b.s) + b.hw * std::abs(b.c);
  return b;
}

namespace {

double radius_on(const CollisionBox& b, double ux, double uy) {
  return b.hl * std::abs(b.c * ux + b.s * uy) + b.hw * std::abs(-b.s * ux + b.c * uy);
}

bool separated_on(const CollisionBox& a, const CollisionBox& b, double ux, double uy) {
  const double dist = std::abs((b.cx - a.cx) * ux + (b.cy - a.cy) * uy);
  return dist > radius_on(a, ux, uy) + radius_on(b, ux, uy);
}

}  // namespace

bool CollisionBox::overlaps(const CollisionBox& o) const {
  if (std::abs(cx - o.cx) > ext_x + o.ext_x) return false;
  if (std::abs(cy - o.cy) > ext_y + o.ext_y) return false;
  return !(separated_on(*this, o, c, s) || separated_on(*this, o, -s, c) ||
           separated_on(*this, o, o.c, o.s) || separated_on(*this, o, -o.s, o.c));
}

bool headway_violated(double xa, double va, double la, double xb, double vb, double lb,
                      double time_gap) {
  const double v_rear = xa < xb ? va : vb;
  const double gap = std::abs(xb - xa) - 0.5 * (la + lb);
  return gap <= 0.0 || gap < time_gap * v_rear;
}

bool boxes_overlap(const VehicleState& a, const VehicleParams& pa,
                   const VehicleState& b, const VehicleParams& pb, double margin) {
  return CollisionBox::of(a, pa, margin).overlaps(CollisionBox::of(b, pb, margin));
}

bool ego_on_road(const VehicleState& ego, const RoadGeometry& road) {
  if (ego.y < road.y_min || ego.y > road.y_max) return false;
  if (ego.x > road.merge_lane_end_x && road.lane_of(ego.y) == road.merge_lane) return false;
  return true;
}

std::array<double, 5> self_terms(const VehicleState& s, const VehicleParams& p,
                                 const RoadGeometry& road) {
  std::array<double, 5> r{};
  r[1] = ego_on_road(s, road) ? 0.0 : -1.0;
  r[2] = std::clamp(s.v * std::cos(s.psi) / p.v_max, 0.0, 1.0);
  r[3] = road.within_lane(s.y, road.target_lane) ? 1.0 : 0.0;
  return r;
}

std::array<double, 5> interaction_terms(const VehicleState& a, const VehicleParams& pa,
                                        const VehicleState& b, const VehicleParams& pb,
                                        const RoadGeometry& road,
                                        const RewardParams& rp) {
  std::array<double, 5> r{};
  if (boxes_overlap(a, pa, b, pb, rp.box_margin)) r[0] = -1.0;
  if (road.lane_of(a.y) == road.lane_of(b.y) &&
      headway_violated(a.x, a.v, pa.length, b.x, b.v, pb.length, rp.comfort_time_gap)) {
    r[4] = -1.0;
  }
  return r;
}

StageReward stage_reward(const PairState& pair, const Control&, const Control&,
                         const RewardWeights& w, const RewardParams& rp) {
  const auto self = self_terms(pair.ego, pair.ego_params, *pair.road);
  const auto joint = interaction_terms(pair.ego, pair.ego_params, pair.other,
                                       pair.other_params, *pair.road, rp);
  StageReward out;
  const auto wa = w.as_array();
  for (std::size_t i = 0; i < 5; ++i) {
    out.r[i] = self[i] + joint[i];
    out.total += wa[i] * out.r[i];
  }
  return out;
}

double cumulative_reward(std::span<const StageSample> rollout, const RewardWeights& w,
                         double lambda, const RewardParams& rp) {
  double total = 0.0;
  double discount = 1.0;
  for (const auto& sample : rollout) {
    total += discount * stage_reward(sample.pair, sample.u_ego, sample.u_other, w, rp).total;
    discount *= lambda;
  }
  return total;
}

bool is_safe(const PairState& pair, const RewardParams& rp) {
  if (boxes_overlap(pair.ego, pair.ego_params, pair.other, pair.other_params,
                    rp.box_margin)) {
    return false;
  }
  return ego_on_road(pair.ego, *pair.road);
}

}  // namespace lfgc
