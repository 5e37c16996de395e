#include "cageloop/rbf.hpp"

#include "cageloop/kdtree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cageloop {

ImplicitSurface::ImplicitSurface(std::vector<Vec3> centers, std::vector<double> weights, Eigen::Vector4d poly,
                                 double r, std::size_t surface_count)
    : centers_(std::move(centers)),
      weights_(std::move(weights)),
      poly_(poly),
      r_(r),
      surface_count_(surface_count) {
  cx_.resize(centers_.size());
  cy_.resize(centers_.size());
  cz_.resize(centers_.size());
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    cx_[i] = centers_[i].x();
    cy_[i] = centers_[i].y();
    cz_[i] = centers_[i].z();
  }
}

double ImplicitSurface::operator()(const Vec3& x) const {
  const double px = x.x(), py = x.y(), pz = x.z();
  const double* wx = cx_.data();
  const double* wy = cy_.data();
  const double* wz = cz_.data();
  const double* w = weights_.data();
  const std::size_t n = weights_.size();
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px - wx[i];
    const double dy = py - wy[i];
    const double dz = pz - wz[i];
    sum += w[i] * std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return sum + poly_[0] + poly_[1] * px + poly_[2] * py + poly_[3] * pz;
}

Vec3 ImplicitSurface::gradient(const Vec3& x) const {
  Vec3 g(poly_[1], poly_[2], poly_[3]);
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    const Vec3 d = x - centers_[i];
    const double len = d.norm();
    if (len > 0.0) g += weights_[i] * d / len;
  }
  return g;
}

void ImplicitSurface::evaluate(std::span<const Vec3> xs, std::span<double> out) const {
  const auto count = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = (*this)(xs[i]);
}

ImplicitSurface::Residuals ImplicitSurface::residuals() const {
  Residuals res;
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    const double target = j < surface_count_ ? 0.0 : r_;
    double& slot = j < surface_count_ ? res.surface : res.offset;
    slot = std::max(slot, std::abs((*this)(centers_[j]) - target));
  }
  Eigen::Vector4d side = Eigen::Vector4d::Zero();
  for (std::size_t j = 0; j < centers_.size(); ++j) {
    side += weights_[j] * Eigen::Vector4d(1.0, centers_[j].x(), centers_[j].y(), centers_[j].z());
  }
  res.side = side.cwiseAbs().maxCoeff();
  return res;
}

ImplicitSurface fit_rbf(const PointCloud& cloud, double r, const RbfOptions& options) {
  if (!(r > 0.0)) throw Error(ErrorCode::BadParams, "offset radius must be positive");
  const std::size_t n = cloud.size();
  if (n > options.max_points) {
    throw Error(ErrorCode::TooManyPoints,
                std::to_string(n) + " points exceed the RBF cap of " + std::to_string(options.max_points));
  }
  if (n < 4) throw Error(ErrorCode::DegenerateInput, "RBF fit needs at least 4 points");

  std::vector<Vec3> centers;
  centers.reserve(2 * n);
  for (const Vec3& p : cloud.points) centers.push_back(p);
  for (std::size_t j = 0; j < n; ++j) centers.push_back(cloud.points[j] + r * cloud.normals[j]);

  const double scale = bounding_box(centers).diagonal();
  {
    const KdTree tree(centers);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const auto nn = tree.knn(centers[i], 2);
      const std::size_t other = nn[0] == i ? nn[1] : nn[0];
      if ((centers[other] - centers[i]).norm() <= 1e-12 * std::max(scale, 1.0)) {
        throw Error(ErrorCode::SingularSystem, "constraint points " + std::to_string(i) + " and " +
                                                   std::to_string(other) + " coincide");
      }
    }
  }

  const std::size_t m = 2 * n;
  const std::size_t dim = m + 4;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = j + 1; i < m; ++i) {
      const double d = (centers[i] - centers[j]).norm();
      a(i, j) = d;
      a(j, i) = d;
    }
    const Eigen::Vector4d row(1.0, centers[j].x(), centers[j].y(), centers[j].z());
    for (int k = 0; k < 4; ++k) {
      a(j, m + k) = row[k];
      a(m + k, j) = row[k];
    }
    b[j] = j < n ? 0.0 : r;
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(b);
  // One round of iterative refinement tightens the constraint residuals.
  const Eigen::VectorXd residual = b - a * x;
  x += lu.solve(residual);
  if (!x.allFinite()) throw Error(ErrorCode::SingularSystem, "RBF solve produced non-finite weights");

  std::vector<double> weights(x.data(), x.data() + m);
  const Eigen::Vector4d poly = x.tail<4>();
  ImplicitSurface surface(std::move(centers), std::move(weights), poly, r, n);

  const double final_residual = (b - a * x).cwiseAbs().maxCoeff();
  if (!(final_residual <= 1e-3 * r)) {
    throw Error(ErrorCode::SingularSystem, "RBF system is numerically singular (residual " +
                                               std::to_string(final_residual) + ")");
  }
  return surface;
}

std::vector<std::size_t> farthest_point_subsample(std::span<const Vec3> points, std::size_t count,
                                                  std::size_t start) {
  std::vector<std::size_t> chosen;
  if (points.empty() || count == 0) return chosen;
  count = std::min(count, points.size());
  start = std::min(start, points.size() - 1);
  std::vector<double> dist(points.size(), std::numeric_limits<double>::infinity());
  std::size_t next = start;
  chosen.reserve(count);
  while (chosen.size() < count) {
    chosen.push_back(next);
    const Vec3& p = points[next];
    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      dist[i] = std::min(dist[i], (points[i] - p).squaredNorm());
      if (dist[i] > best_dist) {
        best_dist = dist[i];
        best = i;
      }
    }
    next = best;
  }
  return chosen;
}

}  // namespace cageloop
