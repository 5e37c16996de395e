#pragma once

#include "cageloop/gripper.hpp"
#include "cageloop/kdtree.hpp"
#include "cageloop/loop.hpp"
#include "cageloop/point_cloud.hpp"
#include "cageloop/voxel_grid.hpp"

#include <span>
#include <vector>

namespace cageloop {

inline const Vec3 kDefaultGravity{0.0, 0.0, -1.0};

struct Plane {
  Vec3 normal = Vec3::UnitZ();  // unit, normal . gravity <= 0
  double offset = 0.0;          // normal . x = offset
};

// Least-squares plane through the vertices. Throws CollinearLoop.
Plane fit_plane(std::span<const Vec3> vertices, const Vec3& gravity = kDefaultGravity);

struct ConeParams {
  int azimuths = 64;  // generator lines
  int rings = 8;      // minimum samples per line
  double tolerance = 0.01;  // radians
};

// Largest half-angle in [0, pi/2] of a cone with apex `apex` opening along
// `axis` over height `depth` whose sampled generator lines avoid OBJECT and
// BAND voxels. Space outside the grid counts as free.
double opening_angle(const Vec3& apex, const Vec3& axis, const VoxelGrid& grid, double depth,
                     const ConeParams& params = {});

struct GraspPose {
  Vec3 origin = Vec3::Zero();
  Vec3 dir1 = Vec3::UnitX();
  Vec3 dir2 = Vec3::UnitY();
  Vec3 plane_normal = Vec3::UnitZ();
  double opening_angle = 0.0;
  bool valid = false;
  std::size_t vertex = 0;  // index of the origin in the loop
};

// Frame from origin o, loop center c and plane normal n: dir1 is o - c with
// its n component removed, dir2 = dir1 x n.
GraspPose frame_from_origin(const Vec3& o, const Vec3& c, const Vec3& n);

struct PoseOptions {
  ConeParams cone;
  double min_angle = 0.15;  // radians
  Vec3 gravity = kDefaultGravity;
};

// Candidate poses, one per loop vertex, sorted by opening angle (descending,
// ties to the vertex nearest the hull boundary, then vertex index). Normals
// for on-surface vertices come from the nearest cloud point.
std::vector<GraspPose> pose_candidates(const CagingLoop& loop, const VoxelGrid& grid, const PointCloud& cloud,
                                       const KdTree& cloud_tree, const GripperSpec& gripper,
                                       const PoseOptions& options = {});

// Best candidate. Throws NoValidOrigin when its angle is below min_angle.
GraspPose make_pose(const CagingLoop& loop, const VoxelGrid& grid, const PointCloud& cloud, const KdTree& cloud_tree,
                    const GripperSpec& gripper, const PoseOptions& options = {});

// Sample points of the open gripper: two fingers and a thumb of length h
// rooted at the palm center o + palm_offset * h * dir1, plus a palm disc of
// radius 2r, spaced at `step`.
std::vector<Vec3> gripper_samples(const GraspPose& pose, const GripperSpec& gripper, double step);

// True iff no gripper sample lies in an OBJECT or BAND voxel.
bool check_interference(const GraspPose& pose, const CagingLoop& loop, const GripperSpec& gripper,
                        const VoxelGrid& grid);

}  // namespace cageloop
