#include "cageloop/loop.hpp"

namespace cageloop {

double polyline_length(std::span<const Vec3> closed) {
  if (closed.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i) sum += (closed[i + 1] - closed[i]).norm();
  return sum + (closed.front() - closed.back()).norm();
}

Vec3 vertex_mean(std::span<const Vec3> vertices) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : vertices) sum += v;
  return vertices.empty() ? sum : Vec3(sum / static_cast<double>(vertices.size()));
}

}  // namespace cageloop
