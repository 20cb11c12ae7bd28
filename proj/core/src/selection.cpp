#include "lfgc/selection.hpp"

#include <algorithm>

namespace lfgc {

std::vector<int> select_interacting(const VehicleState& ego,
                                    std::span<const CandidateVehicle> vehicles,
                                    const RoadGeometry& road, double headway,
                                    std::size_t max_count) {
  const double front = ego.x + headway * ego.v;
  std::vector<CandidateVehicle> in_box;
  for (const auto& c : vehicles) {
    if (road.lane_of(c.state.y) == road.target_lane && c.state.x <= front) in_box.push_back(c);
  }
  std::sort(in_box.begin(), in_box.end(), [](const CandidateVehicle& a, const CandidateVehicle& b) {
    return a.state.x != b.state.x ? a.state.x > b.state.x : a.id < b.id;
  });
  std::vector<int> ids;
  for (std::size_t i = 0; i < in_box.size() && i < max_count; ++i) ids.push_back(in_box[i].id);
  return ids;
}

}  // namespace lfgc
