#include "cageloop/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

namespace cageloop {

namespace {

constexpr std::uint32_t kLeafSize = 12;

using Candidate = std::pair<double, std::size_t>;  // (squared distance, index)

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()), 0);
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  (void)depth;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::size_t> KdTree::knn(const Vec3& query, std::size_t k) const {
  k = std::min(k, points_.size());
  if (k == 0) return {};

  std::priority_queue<Candidate> heap;  // max-heap on (d2, index)
  auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first; };

  std::vector<std::pair<std::int32_t, double>> stack;
  stack.emplace_back(0, 0.0);
  while (!stack.empty()) {
    const auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const double d2 = (points_[idx] - query).squaredNorm();
        const Candidate c{d2, idx};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      continue;
    }
    const double delta = query[node.axis] - node.split;
    const std::int32_t nearChild = delta < 0 ? node.left : node.right;
    const std::int32_t farChild = delta < 0 ? node.right : node.left;
    stack.emplace_back(farChild, std::max(bound, delta * delta));
    stack.emplace_back(nearChild, bound);
  }

  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::size_t KdTree::nearest(const Vec3& query) const {
  const auto result = knn(query, 1);
  return result.empty() ? 0 : result.front();
}

std::vector<std::size_t> KdTree::radius(const Vec3& query, double r) const {
  std::vector<std::size_t> out;
  if (points_.empty()) return out;
  const double r2 = r * r;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        if ((points_[order_[i]] - query).squaredNorm() <= r2) out.push_back(order_[i]);
      }
      continue;
    }
    const double delta = query[node.axis] - node.split;
    if (delta - r <= 0) stack.push_back(node.left);
    if (delta + r >= 0) stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cageloop
