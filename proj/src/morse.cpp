#include "cageloop/morse.hpp"

#include <algorithm>
#include <iterator>
#include <string>

namespace cageloop {

namespace {

constexpr int kFace[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};

bool lower(const DistanceField& field, VoxelIndex a, VoxelIndex b) {
  const double da = field.dist[a];
  const double db = field.dist[b];
  return da < db || (da == db && a < b);
}

std::vector<VoxelIndex> pred_path(const DistanceField& field, VoxelIndex start) {
  std::vector<VoxelIndex> path;
  for (VoxelIndex v = start; v != kNoVoxel; v = field.pred[v]) path.push_back(v);
  return path;
}

}  // namespace

std::string_view to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::Regular: return "REGULAR";
    case CriticalKind::Minimum: return "MINIMUM";
    case CriticalKind::Saddle: return "SADDLE";
    case CriticalKind::Maximum: return "MAXIMUM";
  }
  return "UNKNOWN";
}

PatternClass classify_pattern(std::uint8_t minus_mask) {
  PatternClass out;
  minus_mask &= 0x3f;
  if (minus_mask == 0x3f) {
    out.kind = CriticalKind::Maximum;
    return out;
  }
  if (minus_mask == 0) {
    out.kind = CriticalKind::Minimum;
    return out;
  }
  for (int axis = 0; axis < 3; ++axis) {
    const int pair = (minus_mask >> (2 * axis)) & 3;
    if (pair == 1 || pair == 2) return PatternClass{};
    if (pair == 3) out.minus_axes.push_back(axis);
  }
  out.kind = CriticalKind::Saddle;
  return out;
}

CriticalPoint classify(const DistanceField& field, const VoxelGrid& grid, VoxelIndex voxel) {
  CriticalPoint cp;
  cp.voxel = voxel;
  cp.value = field.dist[voxel];
  if (!field.finite(voxel) || grid.on_boundary(voxel)) return cp;
  const auto c = grid.coords(voxel);
  std::uint8_t mask = 0;
  for (int b = 0; b < 6; ++b) {
    const VoxelIndex u = grid.index(c[0] + kFace[b][0], c[1] + kFace[b][1], c[2] + kFace[b][2]);
    if (!grid.grasping(u)) continue;
    if (!field.finite(u)) return cp;
    if (lower(field, u, voxel)) mask |= static_cast<std::uint8_t>(1u << b);
  }
  cp.minus_mask = mask;
  cp.kind = classify_pattern(mask).kind;
  return cp;
}

std::vector<CriticalPoint> find_critical_points(const DistanceField& field, const VoxelGrid& grid) {
  std::vector<CriticalPoint> out;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    const auto vi = static_cast<VoxelIndex>(v);
    if (!field.finite(vi)) continue;
    const CriticalPoint cp = classify(field, grid, vi);
    if (cp.kind == CriticalKind::Saddle || cp.kind == CriticalKind::Maximum) out.push_back(cp);
  }
  return out;
}

std::vector<int> loop_axes(const DistanceField& field, const VoxelGrid& grid, const CriticalPoint& q) {
  if (q.kind == CriticalKind::Saddle) return classify_pattern(q.minus_mask).minus_axes;
  if (q.kind != CriticalKind::Maximum) return {};
  const auto c = grid.coords(q.voxel);
  int best = 0;
  double best_sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const int* lo = kFace[2 * axis];
    const int* hi = kFace[2 * axis + 1];
    const double sum = field.dist[grid.index(c[0] + lo[0], c[1] + lo[1], c[2] + lo[2])] +
                       field.dist[grid.index(c[0] + hi[0], c[1] + hi[1], c[2] + hi[2])];
    if (axis == 0 || sum < best_sum) {
      best = axis;
      best_sum = sum;
    }
  }
  return {best};
}

CagingLoop trace_loop(const DistanceField& field, const VoxelGrid& grid, const CriticalPoint& q, int axis) {
  if (q.kind != CriticalKind::Saddle && q.kind != CriticalKind::Maximum) {
    throw Error(ErrorCode::DegenerateLoop, "only saddles and maxima define loops");
  }
  const auto c = grid.coords(q.voxel);
  const int* lo = kFace[2 * axis];
  const int* hi = kFace[2 * axis + 1];
  const VoxelIndex a = grid.index(c[0] + lo[0], c[1] + lo[1], c[2] + lo[2]);
  const VoxelIndex b = grid.index(c[0] + hi[0], c[1] + hi[1], c[2] + hi[2]);
  if (!field.finite(a) || !field.finite(b)) {
    throw Error(ErrorCode::DegenerateLoop, "loop neighbours of voxel " + std::to_string(q.voxel) + " are unreached");
  }

  const auto path_a = pred_path(field, a);
  const auto path_b = pred_path(field, b);
  std::vector<VoxelIndex> first(path_a.begin(), path_a.end() - 1);
  std::vector<VoxelIndex> second(path_b.begin(), path_b.end() - 1);
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  std::vector<VoxelIndex> shared;
  std::set_intersection(first.begin(), first.end(), second.begin(), second.end(), std::back_inserter(shared));
  if (!shared.empty() || std::binary_search(first.begin(), first.end(), q.voxel) ||
      std::binary_search(second.begin(), second.end(), q.voxel)) {
    throw Error(ErrorCode::DegenerateLoop, "shortest paths from voxel " + std::to_string(q.voxel) +
                                               " merge before the base");
  }

  std::vector<VoxelIndex> voxels(path_a.rbegin(), path_a.rend());
  voxels.push_back(q.voxel);
  voxels.insert(voxels.end(), path_b.begin(), path_b.end() - 1);
  if (voxels.size() < 8) {
    throw Error(ErrorCode::DegenerateLoop, "loop through voxel " + std::to_string(q.voxel) + " has only " +
                                               std::to_string(voxels.size()) + " vertices");
  }

  CagingLoop loop;
  loop.vertices.reserve(voxels.size());
  for (VoxelIndex v : voxels) loop.vertices.push_back(grid.center(v));
  loop.base = grid.center(field.base);
  loop.base_voxel = field.base;
  loop.source = q;
  loop.axis = axis;
  loop.length = polyline_length(loop.vertices);
  return loop;
}

}  // namespace cageloop
