#pragma once

#include "cageloop/point_cloud.hpp"

#include <cstdint>
#include <string_view>

namespace cageloop {

enum class ShapeKind { Sphere, Cylinder, Torus, Genus2, BlockyL };

ShapeKind parse_shape_kind(std::string_view name);
std::string_view to_string(ShapeKind kind);

// Dimensions in meters. Each kind reads only its own fields.
//   sphere:   radius
//   cylinder: radius, height (closed, axis z)
//   torus:    major, minor (axis z)
//   genus2:   two tori (major, minor) with axis y stacked at z = +-separation,
//             joined by a ball of radius waist at the origin
//   blocky-L: L-shaped prism, arm length, thickness of each arm, depth (z)
struct ShapeParams {
  double radius = 0.1;
  double height = 0.2;
  double major = 0.08;
  double minor = 0.025;
  double separation = 0.08;
  double waist = 0.06;
  double arm = 0.2;
  double thickness = 0.07;
  double depth = 0.08;

  static ShapeParams defaults(ShapeKind kind);
};

// Deterministic low-discrepancy surface sampling (area-uniform per patch)
// with exact normals. The seed shifts the sequence.
PointCloud generate_shape(ShapeKind kind, const ShapeParams& params, std::size_t n, std::uint64_t seed);

// Signed distance to the analytic solid (exact outside; a lower-bound
// estimate inside unions).
double shape_signed_distance(ShapeKind kind, const ShapeParams& params, const Vec3& x);

}  // namespace cageloop
