#include "cageloop/convex_hull.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

namespace cageloop {

namespace {

int exact_orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const mpq_class ux = mpq_class(b.x()) - a.x(), uy = mpq_class(b.y()) - a.y(), uz = mpq_class(b.z()) - a.z();
  const mpq_class vx = mpq_class(c.x()) - a.x(), vy = mpq_class(c.y()) - a.y(), vz = mpq_class(c.z()) - a.z();
  const mpq_class wx = mpq_class(d.x()) - a.x(), wy = mpq_class(d.y()) - a.y(), wz = mpq_class(d.z()) - a.z();
  const mpq_class det = wx * (uy * vz - uz * vy) + wy * (uz * vx - ux * vz) + wz * (ux * vy - uy * vx);
  return sgn(det);
}

bool exact_collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
  const mpq_class ux = mpq_class(b.x()) - a.x(), uy = mpq_class(b.y()) - a.y(), uz = mpq_class(b.z()) - a.z();
  const mpq_class vx = mpq_class(c.x()) - a.x(), vy = mpq_class(c.y()) - a.y(), vz = mpq_class(c.z()) - a.z();
  return sgn(uy * vz - uz * vy) == 0 && sgn(uz * vx - ux * vz) == 0 && sgn(ux * vy - uy * vx) == 0;
}

std::uint64_t edge_key(std::size_t u, std::size_t v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

}  // namespace

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  // Shewchuk's filtered determinant det[a-d; b-d; c-d], negated to match
  // the ((b - a) x (c - a)) . (d - a) convention.
  const double adx = a.x() - d.x(), bdx = b.x() - d.x(), cdx = c.x() - d.x();
  const double ady = a.y() - d.y(), bdy = b.y() - d.y(), cdy = c.y() - d.y();
  const double adz = a.z() - d.z(), bdz = b.z() - d.z(), cdz = c.z() - d.z();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * std::abs(adz) +
                           (std::abs(cdxady) + std::abs(adxcdy)) * std::abs(bdz) +
                           (std::abs(adxbdy) + std::abs(bdxady)) * std::abs(cdz);
  constexpr double eps = std::numeric_limits<double>::epsilon() / 2;
  constexpr double bound_factor = (7.0 + 56.0 * eps) * eps;
  const double bound = bound_factor * permanent;
  if (det > bound) return -1;
  if (-det > bound) return 1;
  return exact_orient3d(a, b, c, d);
}

ConvexHull::ConvexHull(std::span<const Vec3> points, std::uint64_t seed) : points_(points.begin(), points.end()) {
  const std::size_t n = points_.size();
  if (n < 4) throw Error(ErrorCode::DegenerateInput, "convex hull needs at least 4 points");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(order[i], order[pick(rng)]);
  }

  const Vec3* p = points_.data();
  std::array<std::size_t, 4> simplex{order[0], n, n, n};
  std::size_t pos = 1;
  for (; pos < n && simplex[1] == n; ++pos) {
    if (p[order[pos]] != p[simplex[0]]) simplex[1] = order[pos];
  }
  for (; pos < n && simplex[2] == n; ++pos) {
    if (!exact_collinear(p[simplex[0]], p[simplex[1]], p[order[pos]])) simplex[2] = order[pos];
  }
  for (; pos < n && simplex[3] == n; ++pos) {
    if (orient3d(p[simplex[0]], p[simplex[1]], p[simplex[2]], p[order[pos]]) != 0) simplex[3] = order[pos];
  }
  if (simplex[3] == n) throw Error(ErrorCode::DegenerateInput, "all points are coplanar");

  std::vector<std::array<std::size_t, 3>> faces;
  for (int skip = 0; skip < 4; ++skip) {
    std::array<std::size_t, 3> f{};
    int k = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) f[k++] = simplex[i];
    }
    if (orient3d(p[f[0]], p[f[1]], p[f[2]], p[simplex[skip]]) > 0) std::swap(f[1], f[2]);
    faces.push_back(f);
  }

  std::vector<char> in_simplex(n, 0);
  for (std::size_t v : simplex) in_simplex[v] = 1;

  std::vector<char> visible;
  std::unordered_set<std::uint64_t> visible_edges;
  std::vector<std::array<std::size_t, 3>> next;
  for (std::size_t idx : order) {
    if (in_simplex[idx]) continue;
    const Vec3& q = p[idx];
    visible.assign(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (orient3d(p[faces[f][0]], p[faces[f][1]], p[faces[f][2]], q) > 0) {
        visible[f] = 1;
        any = true;
      }
    }
    if (!any) continue;

    visible_edges.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      for (int e = 0; e < 3; ++e) visible_edges.insert(edge_key(faces[f][e], faces[f][(e + 1) % 3]));
    }
    next.clear();
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) {
        next.push_back(faces[f]);
        continue;
      }
      for (int e = 0; e < 3; ++e) {
        const std::size_t u = faces[f][e];
        const std::size_t v = faces[f][(e + 1) % 3];
        if (!visible_edges.count(edge_key(v, u))) next.push_back({u, v, idx});
      }
    }
    faces.swap(next);
  }

  facets_.reserve(faces.size());
  for (const auto& f : faces) {
    const Vec3 normal = (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]).normalized();
    facets_.push_back(HullFacet{f, normal, normal.dot(p[f[0]])});
  }
}

std::vector<std::size_t> ConvexHull::vertex_indices() const {
  std::vector<std::size_t> out;
  for (const auto& f : facets_) out.insert(out.end(), f.vertices.begin(), f.vertices.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double ConvexHull::signed_distance(const Vec3& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) best = std::max(best, f.normal.dot(x) - f.offset);
  return best;
}

bool ConvexHull::contains(const Vec3& x, double slack) const {
  for (const auto& f : facets_) {
    if (f.normal.dot(x) - f.offset > slack) return false;
  }
  return true;
}

bool ConvexHull::contains_exact(const Vec3& x) const {
  for (const auto& f : facets_) {
    if (orient3d(points_[f.vertices[0]], points_[f.vertices[1]], points_[f.vertices[2]], x) > 0) return false;
  }
  return true;
}

}  // namespace cageloop
