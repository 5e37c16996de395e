#pragma once

#include "cageloop/gripper.hpp"
#include "cageloop/loop.hpp"
#include "cageloop/voxel_grid.hpp"

#include <array>
#include <utility>
#include <vector>

namespace cageloop {

struct RelaxParams {
  int iters = 200;
  double step = 0.5;
  int resample_every = 20;
  // Stop once one sweep shortens the loop by less than this many voxel
  // spacings.
  double min_decrease = 1e-4;
};

// Per-sweep loop lengths, for diagnostics and tests.
struct RelaxTrace {
  std::vector<double> lengths;
  bool contained = true;  // every vertex stayed in a GRASPING voxel
};

// Midpoint shortening with containment: moves that would leave the
// GRASPING region are halved twice, then skipped. The base is not pinned.
// Throws CollapsedLoop when the result is shorter than 4 voxel spacings.
CagingLoop relax_loop(const CagingLoop& loop, const VoxelGrid& grid, const RelaxParams& params = {},
                      RelaxTrace* trace = nullptr);

// Keep iff length < 4h.
bool filter_length(const CagingLoop& loop, const GripperSpec& gripper);

struct ShortnessParams {
  double window = 0.10;  // arclength fraction centered at the base
  int iters = 50;
  double residual_max = 0.02;
};

struct ShortnessResult {
  double residual = 0.0;
  bool keep = true;
};

// Relative shortening achieved by relaxing only the window around the
// vertex nearest the base.
ShortnessResult filter_local_shortest_at_base(const CagingLoop& loop, const VoxelGrid& grid,
                                              const ShortnessParams& params = {}, double step = 0.5);

// Symmetric Hausdorff distance between two closed polylines (vertices of
// one against segments of the other).
double hausdorff(const CagingLoop& a, const CagingLoop& b);
// hausdorff(a, b) < tau, with early exits.
bool hausdorff_below(const CagingLoop& a, const CagingLoop& b, double tau);

struct LoopCandidateSet {
  std::vector<CagingLoop> loops;
  // (base voxel, critical voxel) per loop.
  std::vector<std::pair<VoxelIndex, VoxelIndex>> provenance;
  // Input position of each loop, used as the last tie-breaker.
  std::vector<std::size_t> origin;
  // Loop indices, best first.
  std::vector<std::size_t> ranking;
};

using ScoreWeights = std::array<double, 4>;
inline constexpr ScoreWeights kDefaultWeights{0.4, 0.3, 0.2, 0.1};

// Fills loop.scores; `residual` must already be set.
void score_loop(CagingLoop& loop, const Vec3& object_centroid, double object_diagonal, const Vec3& gravity,
                const GripperSpec& gripper, const ScoreWeights& weights);

// Greedy: walk loops in score order, drop any within tau of a kept loop.
LoopCandidateSet dedup(const std::vector<CagingLoop>& loops, double tau);

// Scores every loop against the grid's OBJECT voxels and sorts the
// ranking by (total score, length, origin).
LoopCandidateSet rank(LoopCandidateSet set, const VoxelGrid& grid, const Vec3& gravity, const GripperSpec& gripper,
                      const ScoreWeights& weights = kDefaultWeights);

}  // namespace cageloop
