#pragma once

#include "cageloop/voxel_grid.hpp"

#include <array>
#include <limits>
#include <vector>

namespace cageloop {

enum class Connectivity { Six = 6, TwentySix = 26 };

struct NeighborOffset {
  int di, dj, dk;
  double length;  // in units of grid spacing
};

// Face neighbours first, then edges, then corners.
std::vector<NeighborOffset> neighbor_offsets(Connectivity connectivity);

struct DistanceField {
  VoxelIndex base = kNoVoxel;
  double cap = 0.0;
  Connectivity connectivity = Connectivity::TwentySix;
  std::vector<double> dist;       // +inf where unvisited
  std::vector<VoxelIndex> pred;   // kNoVoxel at base and unvisited voxels

  bool finite(VoxelIndex v) const { return dist[static_cast<std::size_t>(v)] < std::numeric_limits<double>::infinity(); }
};

// Capped shortest-path sweep over GRASPING voxels, edge weights equal to
// the distance between voxel centers. Ties are settled in voxel-index order.
DistanceField compute_field(const VoxelGrid& grid, VoxelIndex base, double cap,
                            Connectivity connectivity = Connectivity::TwentySix);

struct FieldStats {
  std::size_t visited = 0;
  double max_dist = 0.0;
  // Unvisited GRASPING voxels adjacent to a visited one.
  std::size_t frontier = 0;
};

FieldStats field_stats(const DistanceField& field, const VoxelGrid& grid);

// Same layout as the voxel export with one distance per voxel ("inf" when
// unvisited).
void write_field(std::ostream& out, const DistanceField& field, const VoxelGrid& grid);

}  // namespace cageloop
