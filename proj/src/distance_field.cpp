#include "cageloop/distance_field.hpp"

#include <cmath>
#include <ostream>
#include <queue>
#include <string>

namespace cageloop {

std::vector<NeighborOffset> neighbor_offsets(Connectivity connectivity) {
  std::vector<NeighborOffset> out;
  for (int order = 1; order <= 3; ++order) {
    for (int dk = -1; dk <= 1; ++dk) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int nonzero = (di != 0) + (dj != 0) + (dk != 0);
          if (nonzero != order) continue;
          if (connectivity == Connectivity::Six && order > 1) continue;
          out.push_back({di, dj, dk, std::sqrt(static_cast<double>(order))});
        }
      }
    }
  }
  return out;
}

DistanceField compute_field(const VoxelGrid& grid, VoxelIndex base, double cap, Connectivity connectivity) {
  if (base < 0 || static_cast<std::size_t>(base) >= grid.size() || !grid.grasping(base)) {
    throw Error(ErrorCode::BaseNotInGraspingSpace, "base voxel " + std::to_string(base) + " is not GRASPING");
  }
  if (!(cap > 0.0)) throw Error(ErrorCode::BadParams, "sweep cap must be positive");

  constexpr double inf = std::numeric_limits<double>::infinity();
  DistanceField field;
  field.base = base;
  field.cap = cap;
  field.connectivity = connectivity;
  field.dist.assign(grid.size(), inf);
  field.pred.assign(grid.size(), kNoVoxel);

  const auto offsets = neighbor_offsets(connectivity);
  std::vector<double> weights;
  std::vector<VoxelIndex> deltas;
  for (const auto& o : offsets) {
    weights.push_back(o.length * grid.spacing());
    deltas.push_back(grid.index(o.di, o.dj, o.dk));
  }
  const auto& dims = grid.dims();

  std::vector<char> settled(grid.size(), 0);
  using Entry = std::pair<double, VoxelIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  field.dist[base] = 0.0;
  heap.emplace(0.0, base);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    if (d > cap) break;
    heap.pop();
    if (settled[v] || d > field.dist[v]) continue;
    settled[v] = 1;
    const auto c = grid.coords(v);
    const bool interior = c[0] > 0 && c[1] > 0 && c[2] > 0 && c[0] < dims[0] - 1 && c[1] < dims[1] - 1 &&
                          c[2] < dims[2] - 1;
    for (std::size_t n = 0; n < offsets.size(); ++n) {
      if (!interior && !grid.in_bounds(c[0] + offsets[n].di, c[1] + offsets[n].dj, c[2] + offsets[n].dk)) continue;
      const VoxelIndex u = v + deltas[n];
      if (settled[u] || !grid.grasping(u)) continue;
      const double nd = d + weights[n];
      if (nd < field.dist[u] || (nd == field.dist[u] && v < field.pred[u])) {
        field.dist[u] = nd;
        field.pred[u] = v;
        heap.emplace(nd, u);
      }
    }
  }
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (!settled[v]) {
      field.dist[v] = inf;
      field.pred[v] = kNoVoxel;
    }
  }
  return field;
}

FieldStats field_stats(const DistanceField& field, const VoxelGrid& grid) {
  FieldStats stats;
  const auto offsets = neighbor_offsets(field.connectivity);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    const auto vi = static_cast<VoxelIndex>(v);
    if (field.finite(vi)) {
      ++stats.visited;
      stats.max_dist = std::max(stats.max_dist, field.dist[v]);
      continue;
    }
    if (!grid.grasping(vi)) continue;
    const auto c = grid.coords(vi);
    for (const auto& o : offsets) {
      if (!grid.in_bounds(c[0] + o.di, c[1] + o.dj, c[2] + o.dk)) continue;
      if (field.finite(grid.index(c[0] + o.di, c[1] + o.dj, c[2] + o.dk))) {
        ++stats.frontier;
        break;
      }
    }
  }
  return stats;
}

void write_field(std::ostream& out, const DistanceField& field, const VoxelGrid& grid) {
  out.precision(17);
  out << "DISTANCEFIELD 1\n"
      << "origin " << grid.origin().x() << ' ' << grid.origin().y() << ' ' << grid.origin().z() << '\n'
      << "spacing " << grid.spacing() << '\n'
      << "dims " << grid.dims()[0] << ' ' << grid.dims()[1] << ' ' << grid.dims()[2] << '\n'
      << "base " << field.base << '\n'
      << "cap " << field.cap << '\n'
      << "dist\n";
  for (double d : field.dist) {
    if (std::isfinite(d)) {
      out << d << '\n';
    } else {
      out << "inf\n";
    }
  }
}

}  // namespace cageloop
