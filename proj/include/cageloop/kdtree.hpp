#pragma once

#include "cageloop/common.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cageloop {

// Static 3D k-d tree over a copied point set. Query results are ordered by
// (squared distance, point index) so equal-distance neighbours come back in a
// reproducible order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  std::vector<std::size_t> knn(const Vec3& query, std::size_t k) const;
  std::size_t nearest(const Vec3& query) const;
  std::vector<std::size_t> radius(const Vec3& query, double r) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace cageloop
