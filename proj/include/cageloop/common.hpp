#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cageloop {

using Vec3 = Eigen::Vector3d;

// Flat voxel index, x-fastest.
using VoxelIndex = std::int64_t;
inline constexpr VoxelIndex kNoVoxel = -1;

enum class ErrorCode {
  ParseError,
  DegenerateInput,
  DegenerateNeighborhood,
  BadParams,
  SingularSystem,
  TooManyPoints,
  EmptyGraspingSpace,
  NoObjectVoxels,
  BaseNotInGraspingSpace,
  DegenerateLoop,
  CollapsedLoop,
  CollinearLoop,
  NoValidOrigin,
  NoBasePoints,
  EmptyResult,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  // Pipeline stage that raised the error; empty outside the pipeline.
  const std::string& stage() const noexcept { return stage_; }
  Error with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
};

}  // namespace cageloop
