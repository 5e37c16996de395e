#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. Nothing here calls into the library's algorithms.

#include "cageloop/loop.hpp"
#include "cageloop/voxel_grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cageloop::Label;
using cageloop::Vec3;
using cageloop::VoxelGrid;
using cageloop::VoxelIndex;

inline VoxelGrid make_grid(std::array<int, 3> dims, double spacing,
                           const std::function<Label(int, int, int)>& label_of, Vec3 origin = Vec3::Zero()) {
  std::vector<Label> labels;
  labels.reserve(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) labels.push_back(label_of(i, j, k));
  return VoxelGrid(origin, spacing, dims, std::move(labels));
}

inline VoxelGrid open_grid(int n, double spacing = 1.0, Vec3 origin = Vec3::Zero()) {
  return make_grid({n, n, n}, spacing, [](int, int, int) { return Label::Grasping; }, origin);
}

// Random grid with a few axis-aligned OBJECT walls, each pierced by a hole,
// plus scattered BAND voxels.
inline VoxelGrid random_wall_grid(std::mt19937_64& rng, int max_dim = 20) {
  std::uniform_int_distribution<int> dim(6, max_dim);
  const std::array<int, 3> dims{dim(rng), dim(rng), dim(rng)};
  std::vector<Label> labels(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], Label::Grasping);
  auto at = [&](int i, int j, int k) -> Label& {
    return labels[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))];
  };
  std::uniform_int_distribution<int> walls(1, 3);
  std::uniform_int_distribution<int> axis_pick(0, 2);
  const int count = walls(rng);
  for (int w = 0; w < count; ++w) {
    const int axis = axis_pick(rng);
    const int pos = std::uniform_int_distribution<int>(1, dims[axis] - 2)(rng);
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    const int h1 = std::uniform_int_distribution<int>(0, dims[a1] - 1)(rng);
    const int h2 = std::uniform_int_distribution<int>(0, dims[a2] - 1)(rng);
    for (int u = 0; u < dims[a1]; ++u) {
      for (int v = 0; v < dims[a2]; ++v) {
        if (std::abs(u - h1) <= 1 && std::abs(v - h2) <= 1) continue;
        std::array<int, 3> c{};
        c[axis] = pos;
        c[a1] = u;
        c[a2] = v;
        at(c[0], c[1], c[2]) = Label::Object;
      }
    }
  }
  std::bernoulli_distribution band(0.05);
  for (auto& l : labels) {
    if (l == Label::Grasping && band(rng)) l = Label::Band;
  }
  return VoxelGrid(Vec3::Zero(), 0.5, dims, std::move(labels));
}

// Edge relaxation to a fixpoint over the 26-neighbour graph of GRASPING
// voxels, then distances above the cap are dropped.
inline std::vector<double> relaxation_distances(const VoxelGrid& grid, VoxelIndex base, double cap,
                                                bool six_connected = false) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(grid.size(), inf);
  dist[static_cast<std::size_t>(base)] = 0.0;
  const auto& d = grid.dims();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          const VoxelIndex u = grid.index(i, j, k);
          if (!grid.grasping(u) || dist[u] == inf) continue;
          for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
              for (int di = -1; di <= 1; ++di) {
                const int n2 = di * di + dj * dj + dk * dk;
                if (n2 == 0 || (six_connected && n2 > 1)) continue;
                if (!grid.in_bounds(i + di, j + dj, k + dk)) continue;
                const VoxelIndex v = grid.index(i + di, j + dj, k + dk);
                if (!grid.grasping(v)) continue;
                const double nd = dist[u] + std::sqrt(static_cast<double>(n2)) * grid.spacing();
                if (nd < dist[v]) {
                  dist[v] = nd;
                  changed = true;
                }
              }
        }
  }
  for (double& x : dist) {
    if (x > cap) x = inf;
  }
  return dist;
}

enum class Kind { Regular, Minimum, Saddle, Maximum };

// Hand-written classification of a six-neighbour sign pattern. Bits follow
// -x, +x, -y, +y, -z, +z; a set bit is a '-' neighbour.
struct Pattern {
  Kind kind;
  std::vector<int> minus_axes;
};

inline Pattern classify_by_hand(unsigned mask) {
  const char sign[6] = {mask & 1 ? '-' : '+',  mask & 2 ? '-' : '+',  mask & 4 ? '-' : '+',
                        mask & 8 ? '-' : '+',  mask & 16 ? '-' : '+', mask & 32 ? '-' : '+'};
  int minus = 0;
  for (char s : sign) minus += s == '-';
  if (minus == 6) return {Kind::Maximum, {}};
  if (minus == 0) return {Kind::Minimum, {}};
  std::string pairs;
  for (int a = 0; a < 3; ++a) {
    pairs += sign[2 * a];
    pairs += sign[2 * a + 1];
  }
  // Saddle patterns: one or two "--" pairs, remaining pairs "++".
  static const char* const saddles[] = {"--++++", "++--++", "++++--", "----++", "--++--", "++----"};
  for (const char* s : saddles) {
    if (pairs == s) {
      std::vector<int> axes;
      for (int a = 0; a < 3; ++a) {
        if (pairs[2 * a] == '-') axes.push_back(a);
      }
      return {Kind::Saddle, axes};
    }
  }
  return {Kind::Regular, {}};
}

// Least-squares plane through points by SVD of the centred coordinates.
struct Plane {
  Vec3 center;
  Vec3 normal;
  Vec3 e1, e2;
};

inline Plane svd_plane(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::MatrixXd m(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = (pts[i] - c).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  const Eigen::Matrix3d v = svd.matrixV();
  return {c, v.col(2), v.col(0), v.col(1)};
}

// Even-odd point-in-polygon test in 2D.
inline bool inside_polygon(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > q.y()) != (b.y() > q.y())) {
      const double x = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (q.x() < x) inside = !inside;
    }
  }
  return inside;
}

// OBJECT voxel centres lying within half a spacing of the loop's fitted
// plane and inside the loop projected onto that plane.
inline std::vector<Vec3> object_voxels_in_disc(const std::vector<Vec3>& loop, const VoxelGrid& grid) {
  const Plane plane = svd_plane(loop);
  std::vector<Eigen::Vector2d> poly;
  for (const Vec3& v : loop) poly.emplace_back((v - plane.center).dot(plane.e1), (v - plane.center).dot(plane.e2));
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = static_cast<VoxelIndex>(i);
    if (grid.label(v) != Label::Object) continue;
    const Vec3 p = grid.center(v);
    const Vec3 d = p - plane.center;
    if (std::abs(d.dot(plane.normal)) >= 0.5 * grid.spacing()) continue;
    if (inside_polygon(poly, {d.dot(plane.e1), d.dot(plane.e2)})) out.push_back(p);
  }
  return out;
}

// Winding number of a closed polyline about the circle of radius R in the
// z = 0 plane centred on the z axis (the core circle of a z-axis torus).
inline int winding_about_core_circle(const std::vector<Vec3>& loop, double R) {
  double total = 0.0;
  auto angle = [&](const Vec3& v) { return std::atan2(v.z(), std::hypot(v.x(), v.y()) - R); };
  for (std::size_t i = 0; i < loop.size(); ++i) {
    double d = angle(loop[(i + 1) % loop.size()]) - angle(loop[i]);
    d = std::remainder(d, 2.0 * M_PI);
    total += d;
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

// Winding number of a closed polyline about the z axis.
inline int winding_about_z(const std::vector<Vec3>& loop) {
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& a = loop[i];
    const Vec3& b = loop[(i + 1) % loop.size()];
    total += std::remainder(std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x()), 2.0 * M_PI);
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

inline double closed_length(const std::vector<Vec3>& loop) {
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) total += (loop[(i + 1) % loop.size()] - loop[i]).norm();
  return total;
}

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

// Symmetric Hausdorff distance, vertices of each polyline against the
// segments of the other, by brute force.
inline double hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto one_sided = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double worst = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < to.size(); ++i) best = std::min(best, point_segment_distance(p, to[i], to[(i + 1) % to.size()]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_sided(a, b), one_sided(b, a));
}

inline std::vector<Vec3> circle(const Vec3& c, double radius, int n, double phase = 0.0) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) {
    const double t = phase + 2.0 * M_PI * i / n;
    out.push_back(c + Vec3(radius * std::cos(t), radius * std::sin(t), 0.0));
  }
  return out;
}

}  // namespace oracle
