#pragma once

#include "cageloop/config.hpp"
#include "cageloop/grasp_pose.hpp"
#include "cageloop/loop_refine.hpp"
#include "cageloop/voxel_grid.hpp"

#include <map>
#include <string>
#include <vector>

namespace cageloop {

struct BaseSampling {
  std::vector<VoxelIndex> voxels;       // distinct, in sampling order
  std::vector<std::size_t> points;      // cloud index that produced each voxel
  std::size_t sampled = 0;              // farthest-point samples drawn
  std::size_t curvature_removed = 0;    // both principal curvatures negative
  std::size_t unmapped = 0;             // no GRASPING voxel nearby
  std::size_t duplicates = 0;           // mapped onto an already used voxel
};

// Farthest-point samples of the cloud (seeded start), each mapped to the
// nearest GRASPING voxel just outside the offset band. Throws NoBasePoints
// when nothing survives.
BaseSampling sample_base_points(const PointCloud& cloud, const VoxelGrid& grid, std::size_t n, std::uint64_t seed,
                                bool curvature_filter, std::size_t curvature_k = 20);

struct RunCounts {
  std::size_t input_points = 0;
  std::size_t fitted_points = 0;
  std::size_t base_sampled = 0;
  std::size_t base_after_curvature = 0;
  std::size_t base_points = 0;
  std::size_t fields = 0;
  std::size_t saddles = 0;
  std::size_t maxima = 0;
  std::size_t trace_attempts = 0;
  std::size_t traced = 0;
  std::size_t relaxed = 0;
  std::size_t after_length = 0;
  std::size_t after_residual = 0;
  std::size_t retained = 0;
  std::size_t poses = 0;
  std::size_t valid_poses = 0;
};

// Rejection bucket names, in pipeline order.
inline constexpr const char* kRejectDegenerate = "trace_loop:DegenerateLoop";
inline constexpr const char* kRejectCollapsed = "relax_loop:CollapsedLoop";
inline constexpr const char* kRejectLength = "filter_length";
inline constexpr const char* kRejectResidual = "filter_local_shortest_at_base";
inline constexpr const char* kRejectDuplicate = "dedup";

struct RankedResult {
  CagingLoop loop;
  VoxelIndex base_voxel = kNoVoxel;
  VoxelIndex critical_voxel = kNoVoxel;
  bool has_pose = false;  // false when make_pose found no valid origin
  GraspPose pose;
};

struct RunReport {
  std::string status = "OK";  // OK, EmptyResult or NoValidPose
  std::string empty_reason;   // stage that rejected the last candidate
  RunCounts counts;
  std::map<std::string, std::size_t> rejections;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  std::vector<std::string> warnings;
  std::vector<RankedResult> results;  // best first

  // Grid summary.
  std::array<int, 3> dims{};
  double spacing = 0.0;
  std::array<std::size_t, 4> label_counts{};
  std::size_t grasping_components = 0;
  double rbf_residual = 0.0;  // max constraint residual
  double offset_radius = 0.0;
  double tau = 0.0;
  double h = 0.0;
  double residual_max = 0.0;

  std::string config_echo;
};

struct PipelineArtifacts {
  VoxelGrid grid;
  PointCloud cloud;  // cloud actually fitted (after subsampling)
};

// Full synthesis on an in-memory cloud. Stage errors propagate with a stage
// tag; an empty result is reported through RunReport::status.
RunReport run(const PipelineConfig& config, const PointCloud& input, PipelineArtifacts* artifacts = nullptr);
// Loads config.input first.
RunReport run(const PipelineConfig& config, PipelineArtifacts* artifacts = nullptr);

// 0 when at least one valid pose exists, 2 otherwise.
int exit_code(const RunReport& report);

}  // namespace cageloop
