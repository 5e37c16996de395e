#pragma once

#include "cageloop/distance_field.hpp"
#include "cageloop/grasp_pose.hpp"
#include "cageloop/loop_refine.hpp"
#include "cageloop/point_cloud.hpp"
#include "cageloop/voxel_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace cageloop {

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<ShapeFormat> format;  // guessed from the extension when unset
  std::filesystem::path output = "cageloop_out";

  int resolution = 50;
  std::size_t samples = 500;
  std::optional<double> offset_radius;  // defaults to gripper.r
  double margin = 0.15;
  double hull_slack = 0.03;
  std::uint64_t seed = 1;
  bool curvature_filter = true;
  std::size_t curvature_k = 20;
  Connectivity connectivity = Connectivity::TwentySix;
  std::size_t max_points = 4000;

  GripperSpec gripper;
  RelaxParams relax;
  ShortnessParams shortness;
  double dedup_tau_voxels = 2.0;
  ScoreWeights weights = kDefaultWeights;
  PoseOptions pose;

  bool dump_grid = false;

  // Raw configuration text, echoed into the report.
  std::string source_text;

  double offset() const { return offset_radius.value_or(gripper.r); }
  // Throws BadParams when a value is out of range.
  void validate() const;
};

// JSON configuration; every key is optional and unknown keys are rejected.
// Throws ConfigError.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace cageloop
