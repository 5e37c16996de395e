#pragma once

#include "cageloop/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cageloop {

void write_loops(std::ostream& out, const RunReport& report);
void write_poses(std::ostream& out, const RunReport& report);
// Deterministic summary; ends with the verbatim configuration text.
void write_report(std::ostream& out, const RunReport& report);
void write_timings(std::ostream& out, const RunReport& report);

// Writes loops.txt, poses.txt, report.txt and timings.txt into `dir`
// (created if missing), plus grid.txt when `grid` is given.
void write_outputs(const std::filesystem::path& dir, const RunReport& report, const VoxelGrid* grid = nullptr);

struct StoredLoop {
  std::size_t rank = 0;
  double score = 0.0;
  double length = 0.0;
  double residual = 0.0;
  std::vector<Vec3> vertices;
};

struct StoredPose {
  std::size_t loop = 0;
  bool present = false;
  GraspPose pose;
};

struct StoredResults {
  double h = 0.0;
  double tau = 0.0;
  double residual_max = 0.0;
  std::vector<StoredLoop> loops;
  std::vector<StoredPose> poses;
  std::optional<VoxelGrid> grid;
};

StoredResults read_results(const std::filesystem::path& dir);

// The config block of a report.txt, byte for byte.
std::string extract_config_echo(const std::string& report_text);

struct ValidationReport {
  std::size_t checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

// Invariants of a result directory: loop lengths consistent with their
// vertices, length < 4h, residual below the threshold, pairwise Hausdorff
// >= tau, vertices inside GRASPING voxels (when grid.txt is present),
// orthonormal pose frames with origins on their loops.
ValidationReport validate_results(const StoredResults& results);

}  // namespace cageloop
