#include "cageloop/grasp_pose.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cageloop {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

bool blocked_at(const VoxelGrid& grid, const Vec3& x) {
  const VoxelIndex v = grid.locate(x);
  return v != kNoVoxel && grid.blocked(v);
}

Vec3 any_orthogonal(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(helper).normalized();
}

bool outside_box(const VoxelGrid& grid, const Vec3& x) {
  const Vec3 hi = grid.origin() + grid.spacing() * Vec3(grid.dims()[0], grid.dims()[1], grid.dims()[2]);
  return (x.array() < grid.origin().array()).any() || (x.array() > hi.array()).any();
}

// Marches each of the sampled generator lines from the apex to the rim at
// height `depth`, at least `rings` samples per line and no coarser than half
// a voxel, stopping where the line leaves the grid.
bool cone_free(const Vec3& apex, const Vec3& axis, double theta, const VoxelGrid& grid, double depth,
               const ConeParams& params) {
  if (blocked_at(grid, apex)) return false;
  const Vec3 u = any_orthogonal(axis);
  const Vec3 w = axis.cross(u);
  const double slope = std::tan(theta);
  const int azimuths = slope > 0.0 ? params.azimuths : 1;
  for (int j = 0; j < azimuths; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / params.azimuths;
    const Vec3 rim = apex + depth * axis + depth * slope * (std::cos(phi) * u + std::sin(phi) * w);
    const double length = (rim - apex).norm();
    const int steps = std::max(params.rings, static_cast<int>(std::ceil(length / (0.5 * grid.spacing()))));
    for (int k = 1; k <= steps; ++k) {
      const Vec3 x = apex + (static_cast<double>(k) / steps) * (rim - apex);
      if (outside_box(grid, x)) break;
      if (blocked_at(grid, x)) return false;
    }
  }
  return true;
}

bool touches_obstacle(const VoxelGrid& grid, const Vec3& x) {
  const VoxelIndex v = grid.locate(x);
  if (v == kNoVoxel) return false;
  const auto c = grid.coords(v);
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (grid.in_bounds(c[0] + di, c[1] + dj, c[2] + dk) && grid.blocked(grid.index(c[0] + di, c[1] + dj, c[2] + dk))) {
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

void GripperSpec::validate() const {
  if (!(h > 0.0) || !(r > 0.0) || !(approach_depth > 0.0)) {
    throw Error(ErrorCode::BadParams, "gripper h, r and approach_depth must be positive");
  }
  if (!(spread_deg >= 0.0 && spread_deg <= 90.0)) throw Error(ErrorCode::BadParams, "spread_deg must lie in [0, 90]");
  if (!(palm_offset >= 0.0)) throw Error(ErrorCode::BadParams, "palm_offset must be non-negative");
}

Plane fit_plane(std::span<const Vec3> vertices, const Vec3& gravity) {
  if (vertices.size() < 3) throw Error(ErrorCode::CollinearLoop, "plane fit needs at least 3 vertices");
  const Vec3 mean = vertex_mean(vertices);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& v : vertices) cov += (v - mean) * (v - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 values = eig.eigenvalues();
  if (!(values[1] > 1e-12 * values[2])) throw Error(ErrorCode::CollinearLoop, "loop vertices are collinear");
  Vec3 n = eig.eigenvectors().col(0).normalized();
  const double along = n.dot(gravity);
  if (along > 0.0) {
    n = -n;
  } else if (along == 0.0) {
    // Canonical sign when the plane is vertical: first non-zero coordinate positive.
    for (int a = 0; a < 3; ++a) {
      if (n[a] != 0.0) {
        if (n[a] < 0.0) n = -n;
        break;
      }
    }
  }
  return Plane{n, n.dot(mean)};
}

double opening_angle(const Vec3& apex, const Vec3& axis, const VoxelGrid& grid, double depth, const ConeParams& params) {
  const Vec3 a = axis.normalized();
  if (!cone_free(apex, a, 0.0, grid, depth, params)) return 0.0;
  double hi = kHalfPi - params.tolerance;
  if (cone_free(apex, a, hi, grid, depth, params)) return kHalfPi;
  double lo = 0.0;
  while (hi - lo > params.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (cone_free(apex, a, mid, grid, depth, params)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

GraspPose frame_from_origin(const Vec3& o, const Vec3& c, const Vec3& n) {
  GraspPose pose;
  pose.origin = o;
  pose.plane_normal = n.normalized();
  Vec3 d1 = o - c;
  d1 -= d1.dot(pose.plane_normal) * pose.plane_normal;
  if (d1.norm() < 1e-12) d1 = any_orthogonal(pose.plane_normal);
  pose.dir1 = d1.normalized();
  pose.dir2 = pose.dir1.cross(pose.plane_normal).normalized();
  return pose;
}

std::vector<GraspPose> pose_candidates(const CagingLoop& loop, const VoxelGrid& grid, const PointCloud& cloud,
                                       const KdTree& cloud_tree, const GripperSpec& gripper,
                                       const PoseOptions& options) {
  const auto& verts = loop.vertices;
  const std::size_t n = verts.size();
  const Plane plane = fit_plane(verts, options.gravity);
  const Vec3 center = vertex_mean(verts);

  std::vector<GraspPose> poses(n);
  std::vector<double> hull_gap(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& o = verts[i];
    const Vec3 tangent = (verts[(i + 1) % n] - verts[(i + n - 1) % n]).normalized();
    Vec3 remark = tangent.cross(plane.normal);
    if (remark.dot(o - center) < 0.0) remark = -remark;

    GraspPose pose;
    Vec3 axis;
    if (touches_obstacle(grid, o) && cloud_tree.size() > 0) {
      axis = cloud.normals[cloud_tree.nearest(o)];
      pose = frame_from_origin(o, center, plane.normal);
    } else {
      axis = remark;
      pose = frame_from_origin(o, o - remark, plane.normal);
    }
    pose.opening_angle = opening_angle(o, axis, grid, gripper.approach_depth, options.cone);
    pose.vertex = i;
    poses[i] = pose;
    if (grid.hull()) hull_gap[i] = -grid.hull()->signed_distance(o);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (poses[a].opening_angle != poses[b].opening_angle) return poses[a].opening_angle > poses[b].opening_angle;
    if (hull_gap[a] != hull_gap[b]) return hull_gap[a] < hull_gap[b];
    return a < b;
  });
  std::vector<GraspPose> sorted;
  sorted.reserve(n);
  for (std::size_t i : order) sorted.push_back(poses[i]);
  return sorted;
}

GraspPose make_pose(const CagingLoop& loop, const VoxelGrid& grid, const PointCloud& cloud, const KdTree& cloud_tree,
                    const GripperSpec& gripper, const PoseOptions& options) {
  const auto candidates = pose_candidates(loop, grid, cloud, cloud_tree, gripper, options);
  if (candidates.empty() || candidates.front().opening_angle < options.min_angle) {
    throw Error(ErrorCode::NoValidOrigin, "no loop vertex admits an approach cone above the minimum angle");
  }
  return candidates.front();
}

std::vector<Vec3> gripper_samples(const GraspPose& pose, const GripperSpec& gripper, double step) {
  std::vector<Vec3> out;
  const Vec3 palm = pose.origin + gripper.palm_offset * gripper.h * pose.dir1;
  const double spread = gripper.spread_deg * std::numbers::pi / 180.0;
  const Vec3 finger_dir = std::cos(spread) * (-pose.dir1) + std::sin(spread) * pose.dir2;
  const Vec3 thumb_dir = std::cos(spread) * (-pose.dir1) - std::sin(spread) * pose.dir2;
  const int steps = std::max(1, static_cast<int>(std::ceil(gripper.h / step)));

  auto add_segment = [&](const Vec3& root, const Vec3& dir) {
    for (int s = 0; s <= steps; ++s) out.push_back(root + (gripper.h * s / steps) * dir);
  };
  add_segment(palm + gripper.r * pose.plane_normal, finger_dir);
  add_segment(palm - gripper.r * pose.plane_normal, finger_dir);
  add_segment(palm, thumb_dir);

  // Palm disc perpendicular to dir1.
  const Vec3 u = pose.dir2;
  const Vec3 w = pose.dir1.cross(pose.dir2);
  const double radius = 2.0 * gripper.r;
  const int rings = std::max(1, static_cast<int>(std::ceil(radius / step)));
  out.push_back(palm);
  for (int k = 1; k <= rings; ++k) {
    const double rho = radius * k / rings;
    const int count = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * rho / step)));
    for (int j = 0; j < count; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / count;
      out.push_back(palm + rho * (std::cos(phi) * u + std::sin(phi) * w));
    }
  }
  return out;
}

bool check_interference(const GraspPose& pose, const CagingLoop& /*loop*/, const GripperSpec& gripper,
                        const VoxelGrid& grid) {
  for (const Vec3& x : gripper_samples(pose, gripper, 0.5 * grid.spacing())) {
    if (blocked_at(grid, x)) return false;
  }
  return true;
}

}  // namespace cageloop
