#pragma once

#include "cageloop/point_cloud.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace cageloop {

struct RbfOptions {
  std::size_t max_points = 4000;
};

// f(x) = sum_i w_i |x - c_i| + c0 + c1 x + c2 y + c3 z, fitted so that f = 0
// on the samples and f = r on the samples pushed out along their normals.
class ImplicitSurface {
 public:
  struct Residuals {
    double surface = 0.0;  // max |f(x_j)|
    double offset = 0.0;   // max |f(x_j + r n_j) - r|
    double side = 0.0;     // max of |sum w|, |sum w x|, |sum w y|, |sum w z|
  };

  ImplicitSurface() = default;
  ImplicitSurface(std::vector<Vec3> centers, std::vector<double> weights, Eigen::Vector4d poly,
                  double r, std::size_t surface_count);

  double operator()(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  // Batch evaluation; out.size() must equal xs.size().
  void evaluate(std::span<const Vec3> xs, std::span<double> out) const;

  double offset_radius() const { return r_; }
  const std::vector<Vec3>& centers() const { return centers_; }
  const std::vector<double>& weights() const { return weights_; }
  const Eigen::Vector4d& poly() const { return poly_; }
  // centers()[0, surface_count) are the samples, the rest their offsets.
  std::size_t surface_count() const { return surface_count_; }

  Residuals residuals() const;

 private:
  std::vector<Vec3> centers_;
  std::vector<double> weights_;
  Eigen::Vector4d poly_ = Eigen::Vector4d::Zero();
  double r_ = 0.0;
  std::size_t surface_count_ = 0;
  // Structure-of-arrays copy for the evaluation kernel.
  std::vector<double> cx_, cy_, cz_;
};

// Throws TooManyPoints above options.max_points and SingularSystem when
// constraint points coincide or the solve fails.
ImplicitSurface fit_rbf(const PointCloud& cloud, double r, const RbfOptions& options = {});

// Greedy farthest-point subset of `count` indices, starting at `start`.
std::vector<std::size_t> farthest_point_subsample(std::span<const Vec3> points, std::size_t count,
                                                  std::size_t start = 0);

}  // namespace cageloop
