#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lfgc/dynamics.hpp"
#include "lfgc/rewards.hpp"

namespace lfgc {

struct CandidateVehicle {
  int id = 0;
  VehicleState state;
};

// Target-lane vehicles at or behind the selection-box front edge
// ego.x + headway * ego.v, nearest to the edge first, at most max_count.
std::vector<int> select_interacting(const VehicleState& ego,
                                    std::span<const CandidateVehicle> vehicles,
                                    const RoadGeometry& road, double headway = 2.0,
                                    std::size_t max_count = 3);

}  // namespace lfgc
