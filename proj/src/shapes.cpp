#include "cageloop/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace cageloop {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Additive recurrence based on the plastic number (the "R2" sequence).
class LowDiscrepancy2D {
 public:
  explicit LowDiscrepancy2D(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    shift_u_ = uniform(rng);
    shift_v_ = uniform(rng);
  }

  std::pair<double, double> at(std::size_t i) const {
    constexpr double g = 1.32471795724474602596;
    constexpr double a1 = 1.0 / g;
    constexpr double a2 = 1.0 / (g * g);
    const double k = static_cast<double>(i) + 0.5;
    return {frac(shift_u_ + k * a1), frac(shift_v_ + k * a2)};
  }

 private:
  static double frac(double x) { return x - std::floor(x); }
  double shift_u_ = 0.0;
  double shift_v_ = 0.0;
};

struct Sample {
  Vec3 p;
  Vec3 n;
};

Sample sphere_point(const Vec3& center, double radius, double u, double v) {
  const double z = 1.0 - 2.0 * u;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = kTwoPi * v;
  const Vec3 n(rho * std::cos(phi), rho * std::sin(phi), z);
  return {center + radius * n, n};
}

// Inverts the area CDF of the tube angle, F(t) = (t + q sin t) / 2pi.
double torus_tube_angle(double s, double q) {
  double t = kTwoPi * s;
  for (int it = 0; it < 60; ++it) {
    const double f = (t + q * std::sin(t)) / kTwoPi - s;
    const double df = (1.0 + q * std::cos(t)) / kTwoPi;
    const double step = f / df;
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return t;
}

// Torus with its axis along `axis` (2 = z, 1 = y) centered at `center`.
Sample torus_point(const Vec3& center, int axis, double major, double minor, double u, double v) {
  const double phi = kTwoPi * u;
  const double t = torus_tube_angle(v, minor / major);
  const double ring = major + minor * std::cos(t);
  Vec3 p;
  Vec3 n;
  if (axis == 2) {
    p = Vec3(ring * std::cos(phi), ring * std::sin(phi), minor * std::sin(t));
    n = Vec3(std::cos(t) * std::cos(phi), std::cos(t) * std::sin(phi), std::sin(t));
  } else {
    p = Vec3(ring * std::cos(phi), minor * std::sin(t), ring * std::sin(phi));
    n = Vec3(std::cos(t) * std::cos(phi), std::sin(t), std::cos(t) * std::sin(phi));
  }
  return {center + p, n};
}

double torus_sdf(const Vec3& x, const Vec3& center, int axis, double major, double minor) {
  const Vec3 d = x - center;
  const double along = axis == 2 ? d.z() : d.y();
  const double radial = axis == 2 ? std::hypot(d.x(), d.y()) : std::hypot(d.x(), d.z());
  return std::hypot(radial - major, along) - minor;
}

double box_sdf(const Vec3& x, const Vec3& lo, const Vec3& hi) {
  const Vec3 c = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo);
  const Vec3 q = (x - c).cwiseAbs() - half;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

void check_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::BadParams, std::string(name) + " must be positive");
  }
}

void validate(ShapeKind kind, const ShapeParams& p) {
  switch (kind) {
    case ShapeKind::Sphere:
      check_positive(p.radius, "radius");
      break;
    case ShapeKind::Cylinder:
      check_positive(p.radius, "radius");
      check_positive(p.height, "height");
      break;
    case ShapeKind::Torus:
    case ShapeKind::Genus2:
      check_positive(p.major, "major radius");
      check_positive(p.minor, "minor radius");
      if (p.minor >= p.major) throw Error(ErrorCode::BadParams, "torus minor radius must be below the major radius");
      if (kind == ShapeKind::Genus2) {
        check_positive(p.separation, "separation");
        check_positive(p.waist, "waist");
      }
      break;
    case ShapeKind::BlockyL:
      check_positive(p.arm, "arm");
      check_positive(p.thickness, "thickness");
      check_positive(p.depth, "depth");
      if (p.thickness >= p.arm) throw Error(ErrorCode::BadParams, "L thickness must be below the arm length");
      break;
  }
}

// L-shaped prism: the cross-section in xy is the union of [0,a]x[0,t] and
// [0,t]x[t,a], extruded over z in [0,d], then centered on its bounding box.
struct LPrism {
  double a, t, d;
  Vec3 shift;

  explicit LPrism(const ShapeParams& p) : a(p.arm), t(p.thickness), d(p.depth), shift(p.arm / 2, p.arm / 2, p.depth / 2) {}

  struct Patch {
    double area;
    Vec3 origin, du, dv, normal;
  };

  std::vector<Patch> patches() const {
    std::vector<Patch> out;
    const Vec3 z(0, 0, d);
    auto wall = [&](Vec3 from, Vec3 to, Vec3 normal) {
      out.push_back({(to - from).norm() * d, from - shift, to - from, z, normal});
    };
    wall({0, 0, 0}, {a, 0, 0}, {0, -1, 0});
    wall({a, 0, 0}, {a, t, 0}, {1, 0, 0});
    wall({a, t, 0}, {t, t, 0}, {0, 1, 0});
    wall({t, t, 0}, {t, a, 0}, {1, 0, 0});
    wall({t, a, 0}, {0, a, 0}, {0, 1, 0});
    wall({0, a, 0}, {0, 0, 0}, {-1, 0, 0});
    for (double zc : {0.0, d}) {
      const Vec3 n(0, 0, zc > 0 ? 1.0 : -1.0);
      out.push_back({a * t, Vec3(0, 0, zc) - shift, Vec3(a, 0, 0), Vec3(0, t, 0), n});
      out.push_back({t * (a - t), Vec3(0, t, zc) - shift, Vec3(t, 0, 0), Vec3(0, a - t, 0), n});
    }
    return out;
  }

  double sdf(const Vec3& x) const {
    const Vec3 y = x + shift;
    return std::min(box_sdf(y, Vec3(0, 0, 0), Vec3(a, t, d)), box_sdf(y, Vec3(0, 0, 0), Vec3(t, a, d)));
  }
};

}  // namespace

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "cylinder") return ShapeKind::Cylinder;
  if (name == "torus") return ShapeKind::Torus;
  if (name == "genus2") return ShapeKind::Genus2;
  if (name == "blocky-L" || name == "blocky-l") return ShapeKind::BlockyL;
  throw Error(ErrorCode::BadParams, "unknown shape kind '" + std::string(name) + "'");
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Torus: return "torus";
    case ShapeKind::Genus2: return "genus2";
    case ShapeKind::BlockyL: return "blocky-L";
  }
  return "unknown";
}

ShapeParams ShapeParams::defaults(ShapeKind kind) {
  ShapeParams p;
  if (kind == ShapeKind::Cylinder) {
    p.radius = 0.05;
    p.height = 0.2;
  }
  if (kind == ShapeKind::Genus2) {
    p.major = 0.07;
    p.minor = 0.02;
  }
  return p;
}

PointCloud generate_shape(ShapeKind kind, const ShapeParams& params, std::size_t n, std::uint64_t seed) {
  if (n < 100) throw Error(ErrorCode::BadParams, "shape generation needs n >= 100");
  validate(kind, params);
  const LowDiscrepancy2D sequence(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  cloud.normals.reserve(n);
  auto push = [&](const Sample& s) {
    cloud.points.push_back(s.p);
    cloud.normals.push_back(s.n.normalized());
  };

  switch (kind) {
    case ShapeKind::Sphere:
      for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = sequence.at(i);
        push(sphere_point(Vec3::Zero(), params.radius, u, v));
      }
      break;

    case ShapeKind::Cylinder: {
      const double rho = params.radius;
      const double half = params.height / 2;
      const double side = kTwoPi * rho * params.height;
      const double cap = std::numbers::pi * rho * rho;
      const double total = side + 2 * cap;
      for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = sequence.at(i);
        const double t = u * total;
        const double phi = kTwoPi * v;
        const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
        if (t < side) {
          const double z = -half + params.height * (t / side);
          push({rho * radial + Vec3(0, 0, z), radial});
        } else {
          const bool top = t < side + cap;
          const double s = top ? (t - side) / cap : (t - side - cap) / cap;
          const double z = top ? half : -half;
          push({rho * std::sqrt(s) * radial + Vec3(0, 0, z), Vec3(0, 0, top ? 1.0 : -1.0)});
        }
      }
      break;
    }

    case ShapeKind::Torus:
      for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = sequence.at(i);
        push(torus_point(Vec3::Zero(), 2, params.major, params.minor, u, v));
      }
      break;

    case ShapeKind::Genus2: {
      const Vec3 top(0, 0, params.separation);
      const Vec3 bottom(0, 0, -params.separation);
      const double torus_area = 4 * std::numbers::pi * std::numbers::pi * params.major * params.minor;
      const double ball_area = 4 * std::numbers::pi * params.waist * params.waist;
      const double total = 2 * torus_area + ball_area;
      auto sdf_of = [&](int part, const Vec3& x) {
        if (part == 0) return torus_sdf(x, top, 1, params.major, params.minor);
        if (part == 1) return torus_sdf(x, bottom, 1, params.major, params.minor);
        return x.norm() - params.waist;
      };
      const std::size_t limit = 200 * n;
      for (std::size_t i = 0; cloud.points.size() < n && i < limit; ++i) {
        const auto [u, v] = sequence.at(i);
        double t = u * total;
        int part = 2;
        Sample s;
        if (t < torus_area) {
          part = 0;
          s = torus_point(top, 1, params.major, params.minor, t / torus_area, v);
        } else if ((t -= torus_area) < torus_area) {
          part = 1;
          s = torus_point(bottom, 1, params.major, params.minor, t / torus_area, v);
        } else {
          t -= torus_area;
          s = sphere_point(Vec3::Zero(), params.waist, t / ball_area, v);
        }
        bool buried = false;
        for (int other = 0; other < 3 && !buried; ++other) {
          if (other != part && sdf_of(other, s.p) <= 0.0) buried = true;
        }
        if (!buried) push(s);
      }
      if (cloud.points.size() < n) throw Error(ErrorCode::BadParams, "genus2 parameters leave no exposed surface");
      break;
    }

    case ShapeKind::BlockyL: {
      const LPrism prism(params);
      const auto patches = prism.patches();
      double total = 0.0;
      for (const auto& patch : patches) total += patch.area;
      for (std::size_t i = 0; i < n; ++i) {
        const auto [u, v] = sequence.at(i);
        double t = u * total;
        std::size_t k = 0;
        while (k + 1 < patches.size() && t >= patches[k].area) t -= patches[k++].area;
        const auto& patch = patches[k];
        const double s = std::clamp(t / patch.area, 0.0, 1.0);
        push({patch.origin + s * patch.du + v * patch.dv, patch.normal});
      }
      break;
    }
  }
  return cloud;
}

double shape_signed_distance(ShapeKind kind, const ShapeParams& params, const Vec3& x) {
  switch (kind) {
    case ShapeKind::Sphere:
      return x.norm() - params.radius;
    case ShapeKind::Cylinder: {
      const double dr = std::hypot(x.x(), x.y()) - params.radius;
      const double dz = std::abs(x.z()) - params.height / 2;
      return std::min(std::max(dr, dz), 0.0) + std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
    }
    case ShapeKind::Torus:
      return torus_sdf(x, Vec3::Zero(), 2, params.major, params.minor);
    case ShapeKind::Genus2:
      return std::min({torus_sdf(x, Vec3(0, 0, params.separation), 1, params.major, params.minor),
                       torus_sdf(x, Vec3(0, 0, -params.separation), 1, params.major, params.minor),
                       x.norm() - params.waist});
    case ShapeKind::BlockyL:
      return LPrism(params).sdf(x);
  }
  return 0.0;
}

}  // namespace cageloop
