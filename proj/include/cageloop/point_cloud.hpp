#pragma once

#include "cageloop/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace cageloop {

// Oriented samples of a target surface. Lengths are in meters.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit, outward, one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  // Throws DegenerateInput when the invariants (>= 4 points, unit normals,
  // no coincident points) do not hold.
  void validate() const;
};

struct SurfaceSamplePoint {
  Vec3 position;
  Vec3 normal;
  // Principal curvatures, k1 >= k2. Both are negative on locally convex
  // regions (a sphere with outward normals has k1 = k2 = -1/R).
  double k1 = 0.0;
  double k2 = 0.0;
  bool degenerate = false;
};

enum class ShapeFormat { Mesh, OrientedPoints };

// Meshes are ASCII OBJ or OFF; faces only contribute area-weighted vertex
// normals. Point files hold "x y z [nx ny nz]" per line; missing normals
// are estimated.
PointCloud load_shape(const std::filesystem::path& path, ShapeFormat format);
PointCloud read_mesh(std::istream& in);
PointCloud read_points(std::istream& in);
ShapeFormat guess_format(const std::filesystem::path& path);

void write_points(std::ostream& out, const PointCloud& cloud);
void save_points(const std::filesystem::path& path, const PointCloud& cloud);

// Local plane fit over k neighbours, orientation propagated along a
// minimum spanning tree of the neighbour graph, then flipped so most
// normals point away from the centroid.
std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k = 12);

std::vector<SurfaceSamplePoint> estimate_curvatures(const PointCloud& cloud, std::size_t k);

// Curvatures for a subset of the cloud (indices into cloud.points).
std::vector<SurfaceSamplePoint> estimate_curvatures(const PointCloud& cloud, std::size_t k,
                                                    std::span<const std::size_t> subset);

// Isotropic Gaussian displacement with standard deviation
// sigma * bounding-box diagonal, followed by normal re-estimation.
PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

struct BoundingBox {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  double diagonal() const { return (hi - lo).norm(); }
  Vec3 center() const { return 0.5 * (lo + hi); }
};

BoundingBox bounding_box(std::span<const Vec3> points);
Vec3 centroid(std::span<const Vec3> points);

}  // namespace cageloop
