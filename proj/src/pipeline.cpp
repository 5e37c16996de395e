#include "cageloop/pipeline.hpp"

#include "cageloop/morse.hpp"
#include "cageloop/rbf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace cageloop {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

struct BaseOutcome {
  std::vector<CagingLoop> survivors;
  std::size_t saddles = 0, maxima = 0, attempts = 0, traced = 0, relaxed = 0, after_length = 0, after_residual = 0;
  std::map<std::string, std::size_t> rejections;
  std::string last_rejection;

  void reject(const char* bucket) {
    ++rejections[bucket];
    last_rejection = bucket;
  }
};

BaseOutcome process_base(const PipelineConfig& config, const VoxelGrid& grid, VoxelIndex base) {
  BaseOutcome out;
  const DistanceField field = compute_field(grid, base, 2.0 * config.gripper.h, config.connectivity);
  for (const CriticalPoint& cp : find_critical_points(field, grid)) {
    (cp.kind == CriticalKind::Saddle ? out.saddles : out.maxima) += 1;
    for (int axis : loop_axes(field, grid, cp)) {
      ++out.attempts;
      CagingLoop loop;
      try {
        loop = trace_loop(field, grid, cp, axis);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateLoop) throw;
        out.reject(kRejectDegenerate);
        continue;
      }
      ++out.traced;
      try {
        loop = relax_loop(loop, grid, config.relax);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::CollapsedLoop) throw;
        out.reject(kRejectCollapsed);
        continue;
      }
      ++out.relaxed;
      if (!filter_length(loop, config.gripper)) {
        out.reject(kRejectLength);
        continue;
      }
      ++out.after_length;
      const ShortnessResult shortness = filter_local_shortest_at_base(loop, grid, config.shortness, config.relax.step);
      loop.scores.residual = shortness.residual;
      if (!shortness.keep) {
        out.reject(kRejectResidual);
        continue;
      }
      ++out.after_residual;
      out.survivors.push_back(std::move(loop));
    }
  }
  return out;
}

}  // namespace

BaseSampling sample_base_points(const PointCloud& cloud, const VoxelGrid& grid, std::size_t n, std::uint64_t seed,
                                bool curvature_filter, std::size_t curvature_k) {
  if (n < 1) throw Error(ErrorCode::BadParams, "base point count must be at least 1");
  if (cloud.empty()) throw Error(ErrorCode::NoBasePoints, "empty cloud");
  BaseSampling out;
  std::mt19937_64 rng(seed);
  const std::size_t start = static_cast<std::size_t>(rng() % cloud.size());
  std::vector<std::size_t> picked = farthest_point_subsample(cloud.points, n, start);
  out.sampled = picked.size();

  if (curvature_filter) {
    const auto curv = estimate_curvatures(cloud, curvature_k, picked);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < picked.size(); ++i) {
      if (curv[i].k1 < 0.0 && curv[i].k2 < 0.0) {
        ++out.curvature_removed;
      } else {
        kept.push_back(picked[i]);
      }
    }
    picked.swap(kept);
  }

  constexpr int kSearch = 3;
  const double lift = grid.offset_radius() + grid.spacing();
  std::vector<char> used(grid.size(), 0);
  for (std::size_t idx : picked) {
    const Vec3 target = cloud.points[idx] + lift * cloud.normals[idx];
    const Vec3 local = (target - grid.origin()) / grid.spacing();
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) c[a] = std::clamp(static_cast<int>(std::floor(local[a])), 0, grid.dims()[a] - 1);
    VoxelIndex best = kNoVoxel;
    double best_d = std::numeric_limits<double>::infinity();
    for (int dk = -kSearch; dk <= kSearch; ++dk) {
      for (int dj = -kSearch; dj <= kSearch; ++dj) {
        for (int di = -kSearch; di <= kSearch; ++di) {
          if (!grid.in_bounds(c[0] + di, c[1] + dj, c[2] + dk)) continue;
          const VoxelIndex v = grid.index(c[0] + di, c[1] + dj, c[2] + dk);
          if (!grid.grasping(v)) continue;
          const double d = (grid.center(v) - target).squaredNorm();
          if (d < best_d || (d == best_d && v < best)) {
            best_d = d;
            best = v;
          }
        }
      }
    }
    if (best == kNoVoxel) {
      ++out.unmapped;
    } else if (used[best]) {
      ++out.duplicates;
    } else {
      used[best] = 1;
      out.voxels.push_back(best);
      out.points.push_back(idx);
    }
  }
  if (out.voxels.empty()) {
    std::string advice = curvature_filter && out.curvature_removed > 0
                             ? "; the curvature filter removed every sample (convex shape), set curvature_filter to false"
                             : "";
    throw Error(ErrorCode::NoBasePoints, "no base point maps into the grasping space" + advice);
  }
  return out;
}

RunReport run(const PipelineConfig& config, const PointCloud& input, PipelineArtifacts* artifacts) {
  config.validate();
  const auto run_start = Clock::now();
  RunReport report;
  report.config_echo = config.source_text;
  report.offset_radius = config.offset();
  report.h = config.gripper.h;
  report.residual_max = config.shortness.residual_max;
  report.counts.input_points = input.size();

  auto t = Clock::now();
  PointCloud cloud = staged("subsample", [&] {
    input.validate();
    if (input.size() <= config.max_points) return input;
    std::mt19937_64 rng(config.seed);
    const auto keep = farthest_point_subsample(input.points, config.max_points,
                                               static_cast<std::size_t>(rng() % input.size()));
    PointCloud sub;
    for (std::size_t i : keep) {
      sub.points.push_back(input.points[i]);
      sub.normals.push_back(input.normals[i]);
    }
    return sub;
  });
  if (cloud.size() < input.size()) {
    report.warnings.push_back("input subsampled from " + std::to_string(input.size()) + " to " +
                              std::to_string(cloud.size()) + " points");
  }
  report.counts.fitted_points = cloud.size();
  report.timings.emplace_back("subsample", seconds_since(t));

  t = Clock::now();
  const ImplicitSurface surface = staged("fit_rbf", [&] {
    return fit_rbf(cloud, config.offset(), RbfOptions{config.max_points});
  });
  {
    const auto res = surface.residuals();
    report.rbf_residual = std::max(res.surface, res.offset);
  }
  report.timings.emplace_back("fit_rbf", seconds_since(t));

  t = Clock::now();
  VoxelGrid grid = staged("build_grid", [&] {
    return build_grid(surface, cloud, GridOptions{config.resolution, config.margin, config.hull_slack});
  });
  report.dims = grid.dims();
  report.spacing = grid.spacing();
  report.label_counts = label_counts(grid);
  report.grasping_components = count_components(grid, Label::Grasping);
  if (report.grasping_components > 1) {
    report.warnings.push_back("grasping space splits into " + std::to_string(report.grasping_components) +
                              " connected components");
  }
  report.tau = config.dedup_tau_voxels * grid.spacing();
  report.timings.emplace_back("build_grid", seconds_since(t));

  t = Clock::now();
  const BaseSampling bases = staged("sample_base_points", [&] {
    return sample_base_points(cloud, grid, config.samples, config.seed, config.curvature_filter, config.curvature_k);
  });
  report.counts.base_sampled = bases.sampled;
  report.counts.base_after_curvature = bases.sampled - bases.curvature_removed;
  report.counts.base_points = bases.voxels.size();
  report.timings.emplace_back("sample_base_points", seconds_since(t));

  t = Clock::now();
  std::vector<BaseOutcome> outcomes(bases.voxels.size());
  const auto base_count = static_cast<std::ptrdiff_t>(bases.voxels.size());
  std::vector<Error> errors;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < base_count; ++b) {
    try {
      outcomes[b] = process_base(config, grid, bases.voxels[b]);
    } catch (const Error& e) {
#pragma omp critical
      errors.push_back(e);
    }
  }
  if (!errors.empty()) throw errors.front().with_stage("caging_loops");

  std::vector<CagingLoop> survivors;
  std::string last_rejection;
  for (auto& o : outcomes) {
    report.counts.fields += 1;
    report.counts.saddles += o.saddles;
    report.counts.maxima += o.maxima;
    report.counts.trace_attempts += o.attempts;
    report.counts.traced += o.traced;
    report.counts.relaxed += o.relaxed;
    report.counts.after_length += o.after_length;
    report.counts.after_residual += o.after_residual;
    for (const auto& [bucket, count] : o.rejections) report.rejections[bucket] += count;
    if (!o.last_rejection.empty()) last_rejection = o.last_rejection;
    for (auto& loop : o.survivors) survivors.push_back(std::move(loop));
  }
  report.timings.emplace_back("caging_loops", seconds_since(t));

  t = Clock::now();
  LoopCandidateSet ranked;
  if (!survivors.empty()) {
    const Vec3 centroid = staged("rank", [&] { return centroid_of_object(grid); });
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (std::size_t v = 0; v < grid.size(); ++v) {
      if (grid.labels()[v] != Label::Object) continue;
      lo = lo.cwiseMin(grid.center(static_cast<VoxelIndex>(v)));
      hi = hi.cwiseMax(grid.center(static_cast<VoxelIndex>(v)));
    }
    const double diagonal = std::max((hi - lo).norm(), grid.spacing());
    for (auto& loop : survivors) score_loop(loop, centroid, diagonal, config.pose.gravity, config.gripper, config.weights);
    ranked = dedup(survivors, report.tau);
    report.rejections[kRejectDuplicate] += survivors.size() - ranked.loops.size();
    ranked = rank(std::move(ranked), grid, config.pose.gravity, config.gripper, config.weights);
  }
  report.counts.retained = ranked.loops.size();
  report.timings.emplace_back("dedup_rank", seconds_since(t));

  // Contact diagnostic: vertices within 1.5 voxel diagonals of f = r.
  const double contact_band = 1.5 * std::sqrt(3.0) * grid.spacing();
  for (std::size_t pos = 0; pos < ranked.ranking.size(); ++pos) {
    const auto& loop = ranked.loops[ranked.ranking[pos]];
    std::size_t contacts = 0;
    for (const Vec3& v : loop.vertices) {
      if (std::abs(surface(v) - surface.offset_radius()) <= contact_band) ++contacts;
    }
    if (contacts < 3) {
      report.warnings.push_back("loop " + std::to_string(pos) + " touches the offset surface at only " +
                                std::to_string(contacts) + " vertices");
    }
  }

  t = Clock::now();
  const KdTree cloud_tree(cloud.points);
  for (std::size_t pos = 0; pos < ranked.ranking.size(); ++pos) {
    const std::size_t idx = ranked.ranking[pos];
    RankedResult result;
    result.loop = ranked.loops[idx];
    result.base_voxel = ranked.provenance[idx].first;
    result.critical_voxel = ranked.provenance[idx].second;
    std::vector<GraspPose> candidates;
    try {
      candidates = pose_candidates(result.loop, grid, cloud, cloud_tree, config.gripper, config.pose);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::CollinearLoop) throw e.with_stage("make_pose");
    }
    for (const GraspPose& candidate : candidates) {
      if (candidate.opening_angle < config.pose.min_angle) break;
      if (!result.has_pose) {
        result.has_pose = true;
        result.pose = candidate;
      }
      if (check_interference(candidate, result.loop, config.gripper, grid)) {
        result.pose = candidate;
        result.pose.valid = true;
        break;
      }
    }
    report.counts.poses += result.has_pose ? 1 : 0;
    report.counts.valid_poses += result.pose.valid ? 1 : 0;
    if (!result.has_pose) report.warnings.push_back("loop " + std::to_string(pos) + ": NoValidOrigin");
    report.results.push_back(std::move(result));
  }
  report.timings.emplace_back("grasp_poses", seconds_since(t));
  report.timings.emplace_back("total", seconds_since(run_start));

  if (report.results.empty()) {
    report.status = "EmptyResult";
    report.empty_reason = report.counts.trace_attempts == 0 ? "find_critical_points" : last_rejection;
  } else if (report.counts.valid_poses == 0) {
    report.status = "NoValidPose";
  }

  if (artifacts) {
    artifacts->grid = std::move(grid);
    artifacts->cloud = std::move(cloud);
  }
  return report;
}

RunReport run(const PipelineConfig& config, PipelineArtifacts* artifacts) {
  const auto t = Clock::now();
  const PointCloud cloud = staged("load_shape", [&] {
    return load_shape(config.input, config.format.value_or(guess_format(config.input)));
  });
  const double load_time = seconds_since(t);
  RunReport report = run(config, cloud, artifacts);
  report.timings.insert(report.timings.begin(), {"load_shape", load_time});
  report.timings.back().second += load_time;
  return report;
}

int exit_code(const RunReport& report) { return report.counts.valid_poses > 0 ? 0 : 2; }

}  // namespace cageloop
