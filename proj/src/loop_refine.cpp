#include "cageloop/loop_refine.hpp"

#include "cageloop/grasp_pose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cageloop {

namespace {

bool allowed(const VoxelGrid& grid, const Vec3& x) {
  const VoxelIndex v = grid.locate(x);
  return v != kNoVoxel && grid.grasping(v);
}

bool all_allowed(const VoxelGrid& grid, const std::vector<Vec3>& verts) {
  return std::all_of(verts.begin(), verts.end(), [&](const Vec3& x) { return allowed(grid, x); });
}

// Nearest point to x inside a GRASPING voxel of the 3x3x3 block around x,
// kept a hair inside the cube so it locates back into that voxel. Returns
// false when the block holds no GRASPING voxel.
bool project_to_grasping(const VoxelGrid& grid, const Vec3& x, Vec3& out) {
  const Vec3 local = (x - grid.origin()) / grid.spacing();
  const int ci = static_cast<int>(std::floor(local.x()));
  const int cj = static_cast<int>(std::floor(local.y()));
  const int ck = static_cast<int>(std::floor(local.z()));
  constexpr double kInset = 1e-6;
  double best = std::numeric_limits<double>::infinity();
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int i = ci + di, j = cj + dj, k = ck + dk;
        if (!grid.in_bounds(i, j, k) || !grid.grasping(grid.index(i, j, k))) continue;
        const Vec3 q(std::clamp(local.x(), i + kInset, i + 1 - kInset), std::clamp(local.y(), j + kInset, j + 1 - kInset),
                     std::clamp(local.z(), k + kInset, k + 1 - kInset));
        const double d = (q - local).squaredNorm();
        if (d < best) {
          best = d;
          out = grid.origin() + grid.spacing() * q;
        }
      }
    }
  }
  return best < std::numeric_limits<double>::infinity();
}

// Moves vertex i toward the midpoint of its neighbours by `step`. A target
// outside the GRASPING region is projected onto the nearest GRASPING voxel
// and kept only if that still shortens the two incident edges; otherwise
// the step is halved, twice. A vertex still blocked then tries projected
// steps along the descent direction of its two edges, which differs from the
// midpoint direction when the edges are unequal.
void shorten_vertex(std::vector<Vec3>& verts, std::size_t i, const VoxelGrid& grid, double step) {
  const std::size_t n = verts.size();
  const Vec3& prev = verts[(i + n - 1) % n];
  const Vec3& next = verts[(i + 1) % n];
  const Vec3 delta = 0.5 * (prev + next) - verts[i];
  auto local = [&](const Vec3& p) { return (p - prev).norm() + (p - next).norm(); };
  const double current = local(verts[i]);
  auto accept_projected = [&](Vec3 candidate) {
    if (project_to_grasping(grid, candidate, candidate) && local(candidate) < current && allowed(grid, candidate)) {
      verts[i] = candidate;
      return true;
    }
    return false;
  };
  double lambda = step;
  for (int attempt = 0; attempt < 3; ++attempt, lambda *= 0.5) {
    const Vec3 candidate = verts[i] + lambda * delta;
    if (allowed(grid, candidate)) {
      verts[i] = candidate;
      return;
    }
    if (accept_projected(candidate)) return;
  }
  const double to_prev = (prev - verts[i]).norm();
  const double to_next = (next - verts[i]).norm();
  if (to_prev == 0.0 || to_next == 0.0) return;
  const Vec3 descent = (prev - verts[i]) / to_prev + (next - verts[i]) / to_next;
  const double norm = descent.norm();
  if (norm == 0.0) return;
  double dist = std::min({0.5 * grid.spacing(), 0.5 * to_prev, 0.5 * to_next});
  for (int attempt = 0; attempt < 3; ++attempt, dist *= 0.5) {
    if (accept_projected(verts[i] + dist / norm * descent)) return;
  }
}

// Uniform arclength resampling at about one voxel spacing. Samples that
// land outside the GRASPING region are projected into it when `project` is
// set, else snapped to the nearer segment endpoint, which keeps the result
// inscribed in the input and never longer.
std::vector<Vec3> resample(const std::vector<Vec3>& verts, const VoxelGrid& grid, bool project) {
  const std::size_t n = verts.size();
  const double length = polyline_length(verts);
  const auto count = std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(length / grid.spacing())));
  const double step = length / static_cast<double>(count);

  std::vector<Vec3> out;
  out.reserve(count);
  std::size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = (verts[1 % n] - verts[0]).norm();
  double last = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = step * static_cast<double>(k);
    while (seg + 1 < n && s > seg_start + seg_len) {
      seg_start += seg_len;
      ++seg;
      seg_len = (verts[(seg + 1) % n] - verts[seg]).norm();
    }
    const Vec3& a = verts[seg];
    const Vec3& b = verts[(seg + 1) % n];
    const double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
    if (s < last) continue;  // behind a sample that snapped forward
    Vec3 p = a + t * (b - a);
    double at = s;
    Vec3 moved;
    if (!allowed(grid, p) && project && project_to_grasping(grid, p, moved) && allowed(grid, moved)) {
      p = moved;
    } else if (!allowed(grid, p)) {
      // Snap backward only if that keeps the samples in arclength order.
      const bool back = t < 0.5 && seg_start >= last;
      p = back ? a : b;
      at = back ? seg_start : seg_start + seg_len;
    }
    last = at;
    if (out.empty() || (out.back() - p).squaredNorm() > 0.0) out.push_back(p);
  }
  while (out.size() > 1 && (out.back() - out.front()).squaredNorm() == 0.0) out.pop_back();
  return out;
}

// Drops vertices closer than `eps` to their predecessor. Removing a vertex
// never lengthens the polyline.
void merge_close(std::vector<Vec3>& verts, double eps) {
  std::vector<Vec3> out;
  out.reserve(verts.size());
  for (const Vec3& v : verts) {
    if (out.empty() || (v - out.back()).norm() >= eps) out.push_back(v);
  }
  while (out.size() > 1 && (out.back() - out.front()).norm() < eps) out.pop_back();
  verts.swap(out);
}

}  // namespace

CagingLoop relax_loop(const CagingLoop& loop, const VoxelGrid& grid, const RelaxParams& params, RelaxTrace* trace) {
  if (params.iters < 1) throw Error(ErrorCode::BadParams, "relaxation needs at least one iteration");
  if (loop.vertices.size() < 3) throw Error(ErrorCode::CollapsedLoop, "loop has fewer than 3 vertices");

  std::vector<Vec3> verts = loop.vertices;
  double length = polyline_length(verts);
  if (trace) {
    trace->lengths.assign(1, length);
    trace->contained = all_allowed(grid, verts);
  }
  // Stops once the length has not dropped by min_decrease for kPatience
  // sweeps; single sweeps can stall while a vertex slides around a corner.
  constexpr int kPatience = 20;
  const double min_decrease = params.min_decrease * grid.spacing();
  double best = length;
  int best_iter = 0;
  for (int it = 1; it <= params.iters; ++it) {
    for (std::size_t i = 0; i < verts.size(); ++i) shorten_vertex(verts, i, grid, params.step);
    merge_close(verts, 0.25 * grid.spacing());
    if (verts.size() < 3) throw Error(ErrorCode::CollapsedLoop, "loop collapsed to fewer than 3 vertices");
    if (params.resample_every > 0 && it % params.resample_every == 0) {
      // Projected samples avoid long snapped edges but may lengthen the
      // loop; the inscribed version never does.
      std::vector<Vec3> projected = resample(verts, grid, true);
      verts = polyline_length(projected) <= polyline_length(verts) ? std::move(projected) : resample(verts, grid, false);
      if (verts.size() < 3) throw Error(ErrorCode::CollapsedLoop, "loop collapsed during resampling");
    }
    const double next = polyline_length(verts);
    if (trace) {
      trace->lengths.push_back(next);
      trace->contained = trace->contained && all_allowed(grid, verts);
    }
    length = next;
    if (length < best - min_decrease) {
      best = length;
      best_iter = it;
    } else if (it - best_iter >= kPatience) {
      break;
    }
  }

  if (length < 4.0 * grid.spacing()) {
    throw Error(ErrorCode::CollapsedLoop, "relaxed loop length " + std::to_string(length) + " is below 4 voxels");
  }
  CagingLoop out = loop;
  out.vertices = std::move(verts);
  out.length = length;
  return out;
}

bool filter_length(const CagingLoop& loop, const GripperSpec& gripper) { return loop.length < 4.0 * gripper.h; }

ShortnessResult filter_local_shortest_at_base(const CagingLoop& loop, const VoxelGrid& grid,
                                              const ShortnessParams& params, double step) {
  std::vector<Vec3> verts = loop.vertices;
  const std::size_t n = verts.size();
  ShortnessResult result;
  if (n < 4) return result;
  const double before = polyline_length(verts);

  std::size_t center = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (verts[i] - loop.base).squaredNorm();
    if (d < best) {
      best = d;
      center = i;
    }
  }

  // Window of vertices within half the window arclength on each side.
  const double half = 0.5 * params.window * before;
  std::vector<std::size_t> window{center};
  double walked = 0.0;
  for (std::size_t k = 1; k + 2 < n; ++k) {
    const std::size_t i = (center + n - k) % n;
    walked += (verts[(i + 1) % n] - verts[i]).norm();
    if (walked > half) break;
    window.insert(window.begin(), i);
  }
  walked = 0.0;
  for (std::size_t k = 1; window.size() + 2 < n; ++k) {
    const std::size_t i = (center + k) % n;
    walked += (verts[i] - verts[(i + n - 1) % n]).norm();
    if (walked > half) break;
    window.push_back(i);
  }

  for (int it = 0; it < params.iters; ++it) {
    for (std::size_t i : window) shorten_vertex(verts, i, grid, step);
  }
  const double after = polyline_length(verts);
  result.residual = before > 0.0 ? std::max(0.0, (before - after) / before) : 0.0;
  result.keep = result.residual < params.residual_max;
  return result;
}

namespace {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double distance_to_polyline(const Vec3& p, const std::vector<Vec3>& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

// Directed distance, giving up early once it reaches `stop`.
double directed_hausdorff(const std::vector<Vec3>& from, const std::vector<Vec3>& to, double stop) {
  double worst = 0.0;
  for (const Vec3& p : from) {
    worst = std::max(worst, distance_to_polyline(p, to));
    if (worst >= stop) break;
  }
  return worst;
}

}  // namespace

double hausdorff(const CagingLoop& a, const CagingLoop& b) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (a.vertices.empty() || b.vertices.empty()) return inf;
  return std::max(directed_hausdorff(a.vertices, b.vertices, inf), directed_hausdorff(b.vertices, a.vertices, inf));
}

bool hausdorff_below(const CagingLoop& a, const CagingLoop& b, double tau) {
  if (a.vertices.empty() || b.vertices.empty()) return false;
  // Bounding boxes of two sets within Hausdorff distance d differ by at most
  // d in every coordinate.
  const BoundingBox ba = bounding_box(a.vertices);
  const BoundingBox bb = bounding_box(b.vertices);
  if ((ba.lo - bb.lo).cwiseAbs().maxCoeff() >= tau || (ba.hi - bb.hi).cwiseAbs().maxCoeff() >= tau) return false;
  return directed_hausdorff(a.vertices, b.vertices, tau) < tau && directed_hausdorff(b.vertices, a.vertices, tau) < tau;
}

void score_loop(CagingLoop& loop, const Vec3& object_centroid, double object_diagonal, const Vec3& gravity,
                const GripperSpec& gripper, const ScoreWeights& weights) {
  LoopScores& s = loop.scores;
  s.centroid = (vertex_mean(loop.vertices) - object_centroid).norm() / object_diagonal;
  try {
    const Plane plane = fit_plane(loop.vertices, gravity);
    s.horizontality = 1.0 - std::abs(plane.normal.dot(gravity.normalized()));
  } catch (const Error&) {
    s.horizontality = 1.0;
  }
  s.length_fit = loop.length / (4.0 * gripper.h);
  s.total = weights[0] * s.centroid + weights[1] * s.horizontality + weights[2] * s.length_fit +
            weights[3] * s.residual;
}

namespace {

std::vector<std::size_t> score_order(const std::vector<CagingLoop>& loops, const std::vector<std::size_t>& origin) {
  std::vector<std::size_t> order(loops.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = loops[x];
    const auto& b = loops[y];
    if (a.scores.total != b.scores.total) return a.scores.total < b.scores.total;
    if (a.length != b.length) return a.length < b.length;
    return origin[x] < origin[y];
  });
  return order;
}

}  // namespace

LoopCandidateSet dedup(const std::vector<CagingLoop>& loops, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::BadParams, "dedup threshold must be positive");
  std::vector<std::size_t> identity(loops.size());
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  const auto order = score_order(loops, identity);

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const bool duplicate = std::any_of(kept.begin(), kept.end(),
                                       [&](std::size_t k) { return hausdorff_below(loops[idx], loops[k], tau); });
    if (!duplicate) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());

  LoopCandidateSet set;
  for (std::size_t idx : kept) {
    set.loops.push_back(loops[idx]);
    set.provenance.emplace_back(loops[idx].base_voxel, loops[idx].source.voxel);
    set.origin.push_back(idx);
  }
  set.ranking.resize(set.loops.size());
  std::iota(set.ranking.begin(), set.ranking.end(), std::size_t{0});
  return set;
}

LoopCandidateSet rank(LoopCandidateSet set, const VoxelGrid& grid, const Vec3& gravity, const GripperSpec& gripper,
                      const ScoreWeights& weights) {
  if (set.origin.size() != set.loops.size()) {
    set.origin.resize(set.loops.size());
    std::iota(set.origin.begin(), set.origin.end(), std::size_t{0});
  }
  if (set.loops.empty()) {
    set.ranking.clear();
    return set;
  }
  const Vec3 centroid = centroid_of_object(grid);
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (grid.labels()[v] != Label::Object) continue;
    const Vec3 c = grid.center(static_cast<VoxelIndex>(v));
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  const double diagonal = std::max((hi - lo).norm(), grid.spacing());
  for (auto& loop : set.loops) score_loop(loop, centroid, diagonal, gravity, gripper, weights);
  set.ranking = score_order(set.loops, set.origin);
  return set;
}

}  // namespace cageloop
