#pragma once

#include "cageloop/common.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace cageloop {

enum class CriticalKind { Regular, Minimum, Saddle, Maximum };

std::string_view to_string(CriticalKind kind);

// Face-neighbour order used by sign masks: -x, +x, -y, +y, -z, +z.
// Bit b of `minus_mask` is set when neighbour b is lower than the voxel.
struct CriticalPoint {
  VoxelIndex voxel = kNoVoxel;
  CriticalKind kind = CriticalKind::Regular;
  std::uint8_t minus_mask = 0;
  double value = 0.0;
};

struct LoopScores {
  double centroid = 0.0;       // loop center to object centroid / bbox diagonal
  double horizontality = 0.0;  // 1 - |n . gravity|
  double length_fit = 0.0;     // length / 4h
  double residual = 0.0;       // local-shortness residual at the base
  double total = 0.0;
};

struct CagingLoop {
  std::vector<Vec3> vertices;  // closed; the last vertex connects to the first
  Vec3 base = Vec3::Zero();
  VoxelIndex base_voxel = kNoVoxel;
  CriticalPoint source;
  int axis = -1;  // 0, 1, 2: axis of the opposite '-' pair the loop leaves q along
  double length = 0.0;
  LoopScores scores;
};

double polyline_length(std::span<const Vec3> closed);
Vec3 vertex_mean(std::span<const Vec3> vertices);

}  // namespace cageloop
