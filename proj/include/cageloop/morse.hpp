#pragma once

#include "cageloop/distance_field.hpp"
#include "cageloop/loop.hpp"

#include <vector>

namespace cageloop {

struct PatternClass {
  CriticalKind kind = CriticalKind::Regular;
  // Axes (0 = x, 1 = y, 2 = z) whose two face neighbours are both '-'.
  std::vector<int> minus_axes;
};

// Discrete classification of a six-neighbour sign pattern:
//   all six '-'                          -> MAXIMUM
//   all six '+'                          -> MINIMUM
//   every opposite pair '--' or '++',
//   at least one of each                 -> SADDLE (one loop per '--' pair)
//   otherwise                            -> REGULAR
PatternClass classify_pattern(std::uint8_t minus_mask);

// Sign pattern and kind of one voxel. Neighbours outside GRASPING count as
// '+'; voxels on the grid boundary or next to an unvisited GRASPING voxel
// are REGULAR.
CriticalPoint classify(const DistanceField& field, const VoxelGrid& grid, VoxelIndex voxel);

// SADDLE and MAXIMUM voxels in ascending index order.
std::vector<CriticalPoint> find_critical_points(const DistanceField& field, const VoxelGrid& grid);

// Loop through q built from the predecessor paths of its two neighbours
// along `axis`. Throws DegenerateLoop when the paths merge before the base
// or the loop is shorter than 8 vertices.
CagingLoop trace_loop(const DistanceField& field, const VoxelGrid& grid, const CriticalPoint& q, int axis);

// The '-' pair axis used for q: the classified pairs of a SADDLE, or the
// pair with the smallest summed distance for a MAXIMUM.
std::vector<int> loop_axes(const DistanceField& field, const VoxelGrid& grid, const CriticalPoint& q);

}  // namespace cageloop
