#pragma once

#include "cageloop/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace cageloop {

// Sign of ((b - a) x (c - a)) . (d - a), evaluated exactly: a floating-point
// filter with a fallback to rational arithmetic.
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

struct HullFacet {
  std::array<std::size_t, 3> vertices;  // counter-clockwise seen from outside
  Vec3 normal;                          // unit outward normal
  double offset = 0.0;                  // normal . x = offset on the facet plane
};

class ConvexHull {
 public:
  ConvexHull() = default;
  // Incremental construction with exact orientation tests. Points are
  // inserted in a seeded shuffled order. Throws DegenerateInput when all
  // points are coplanar.
  explicit ConvexHull(std::span<const Vec3> points, std::uint64_t seed = 1);

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<HullFacet>& facets() const { return facets_; }
  // Indices of points that are hull vertices, ascending.
  std::vector<std::size_t> vertex_indices() const;

  // max over facets of (normal . x - offset): negative inside, zero on the
  // boundary; outside it is a lower bound on the Euclidean distance.
  double signed_distance(const Vec3& x) const;
  // signed_distance(x) <= slack, with early exit.
  bool contains(const Vec3& x, double slack = 0.0) const;

  // Exact membership (closed hull) using orient3d.
  bool contains_exact(const Vec3& x) const;

 private:
  std::vector<Vec3> points_;
  std::vector<HullFacet> facets_;
};

}  // namespace cageloop
