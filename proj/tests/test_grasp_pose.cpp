#include "cageloop/grasp_pose.hpp"
#include "cageloop/pipeline.hpp"
#include "cageloop/shapes.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace cageloop;

namespace {

constexpr double kS = 0.005;  // spacing of the hand-built grids

// 80^3 grid of 0.4 m centred on the origin.
VoxelGrid box_grid(const std::function<Label(const Vec3&)>& label_at) {
  const Vec3 origin = Vec3::Constant(-0.2);
  return oracle::make_grid(
      {80, 80, 80}, kS, [&](int i, int j, int k) { return label_at(origin + kS * Vec3(i + 0.5, j + 0.5, k + 0.5)); },
      origin);
}

std::vector<Vec3> circle(const Vec3& c, double radius, int n) {
  std::vector<Vec3> v;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    v.push_back(c + radius * Vec3(std::cos(t), std::sin(t), 0.0));
  }
  return v;
}

CagingLoop loop_of(std::vector<Vec3> verts) {
  CagingLoop loop;
  loop.vertices = std::move(verts);
  loop.base = loop.vertices.front();
  loop.length = oracle::closed_length(loop.vertices);
  return loop;
}

void expect_orthonormal(const GraspPose& p) {
  EXPECT_NEAR(p.dir1.norm(), 1.0, 1e-9);
  EXPECT_NEAR(p.dir2.norm(), 1.0, 1e-9);
  EXPECT_NEAR(p.plane_normal.norm(), 1.0, 1e-9);
  EXPECT_NEAR(p.dir1.dot(p.dir2), 0.0, 1e-6);
  EXPECT_NEAR(p.dir1.dot(p.plane_normal), 0.0, 1e-6);
  EXPECT_NEAR(p.dir2.dot(p.plane_normal), 0.0, 1e-6);
}

struct TorusRun {
  RunReport report;
  PipelineArtifacts artifacts;
  ShapeParams params = ShapeParams::defaults(ShapeKind::Torus);
};

const TorusRun& torus_run() {
  static const TorusRun run = [] {
    TorusRun r;
    PipelineConfig config;
    config.gripper.h = 0.12;
    config.gripper.r = 0.01;
    r.report = cageloop::run(config, generate_shape(ShapeKind::Torus, r.params, 2000, 7), &r.artifacts);
    return r;
  }();
  return run;
}

}  // namespace

TEST(GraspPose, PlaneOfHorizontalCircle) {
  for (double c : {-0.3, 0.0, 0.7}) {
    const Plane p = fit_plane(circle(Vec3(0.1, -0.2, c), 0.5, 40));
    EXPECT_NEAR(p.normal.z(), 1.0, 1e-12);
    EXPECT_NEAR(p.offset, c, 1e-12);
  }
  // Normal flips to oppose gravity.
  const Plane up = fit_plane(circle(Vec3(0, 0, 0.5), 0.5, 40), Vec3(0, 0, 1));
  EXPECT_NEAR(up.normal.z(), -1.0, 1e-12);
  EXPECT_NEAR(up.offset, -0.5, 1e-12);
}

TEST(GraspPose, PlaneOfJitteredCircleAgreesWithLeastSquares) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> jitter(-kS, kS);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = circle(Vec3::Zero(), 0.1, 60);
    for (auto& p : pts) p.z() += jitter(rng);
    const Plane p = fit_plane(pts);
    EXPECT_LT(std::acos(std::min(1.0, p.normal.z())), 5.0 * M_PI / 180.0);
    const Vec3 want = oracle::svd_plane(pts).normal;
    EXPECT_NEAR(std::abs(p.normal.dot(want)), 1.0, 1e-9);
  }
}

TEST(GraspPose, PlaneThroughThreePoints) {
  const std::vector<Vec3> pts{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}};
  const Plane p = fit_plane(pts);
  for (const Vec3& x : pts) EXPECT_NEAR(p.normal.dot(x), p.offset, 1e-12);
  EXPECT_LE(p.normal.dot(kDefaultGravity), 0.0);
}

TEST(GraspPose, CollinearLoopIsRejected) {
  const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  try {
    fit_plane(line);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CollinearLoop);
  }
  EXPECT_THROW(fit_plane(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}), Error);
}

TEST(GraspPose, OpenSpaceConeIsFlat) {
  const VoxelGrid grid = oracle::open_grid(20, 0.01);
  EXPECT_DOUBLE_EQ(opening_angle(Vec3::Constant(0.1), Vec3::UnitX(), grid, 0.03), M_PI / 2);
}

TEST(GraspPose, ConeAboveSlabMatchesTangency) {
  // OBJECT fills z < 0; a horizontal cone at height d touches the slab when
  // depth * tan(theta) = d.
  const VoxelGrid grid = box_grid([](const Vec3& x) { return x.z() < 0.0 ? Label::Object : Label::Grasping; });
  for (double d : {0.01, 0.02, 0.03}) {
    for (double depth : {0.04, 0.06}) {
      const double theta = opening_angle(Vec3(0.0, 0.0, d), Vec3::UnitX(), grid, depth);
      EXPECT_NEAR(theta, std::atan(d / depth), 0.01) << d << " " << depth;
    }
  }
}

TEST(GraspPose, ConeIsMonotoneInDepth) {
  const VoxelGrid grid = box_grid([](const Vec3& x) { return x.z() < 0.0 ? Label::Object : Label::Grasping; });
  double last = M_PI;
  for (double depth = 0.005; depth < 0.15; depth += 0.005) {
    const double theta = opening_angle(Vec3(0.0, 0.0, 0.02), Vec3(1.0, 0.0, -0.3), grid, depth);
    EXPECT_LE(theta, last + 1e-12) << depth;
    last = theta;
  }
}

TEST(GraspPose, ApexInBandHasNoCone) {
  const VoxelGrid grid = box_grid([](const Vec3& x) {
    if (x.z() < 0.0) return Label::Object;
    return x.z() < 0.01 ? Label::Band : Label::Grasping;
  });
  EXPECT_DOUBLE_EQ(opening_angle(Vec3(0.0, 0.0, 0.005), Vec3::UnitZ(), grid, 0.03), 0.0);
}

TEST(GraspPose, FrameClosedForm) {
  const double R = 0.37;
  const GraspPose p = frame_from_origin(Vec3(R, 0, 0), Vec3::Zero(), Vec3::UnitZ());
  EXPECT_TRUE(p.dir1.isApprox(Vec3(1, 0, 0), 1e-12));
  EXPECT_TRUE(p.dir2.isApprox(Vec3(0, -1, 0), 1e-12));
  expect_orthonormal(p);
}

TEST(GraspPose, FrameIsOrthonormalForRandomInput) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o(g(rng), g(rng), g(rng));
    const Vec3 c(g(rng), g(rng), g(rng));
    const Vec3 n(g(rng), g(rng), g(rng));
    const GraspPose p = frame_from_origin(o, c, n);
    expect_orthonormal(p);
    // dir1 lies in the plane spanned by o - c and n.
    EXPECT_NEAR(p.dir1.dot((o - c).cross(n).normalized()), 0.0, 1e-9);
  }
  // Origin above the centre along n still yields a frame.
  expect_orthonormal(frame_from_origin(Vec3(0, 0, 1), Vec3::Zero(), Vec3::UnitZ()));
}

TEST(GraspPose, SlotHasNoValidOrigin) {
  // Two OBJECT slabs leave a 2-voxel slot around z = 0.
  const VoxelGrid grid = box_grid([](const Vec3& x) { return std::abs(x.z()) < kS ? Label::Grasping : Label::Object; });
  const CagingLoop loop = loop_of(circle(Vec3::Zero(), 0.1, 48));
  PointCloud cloud;
  for (const Vec3& v : loop.vertices) {
    cloud.points.push_back(v + Vec3(0, 0, -kS));
    cloud.normals.push_back(Vec3::UnitZ());
  }
  const KdTree tree(cloud.points);
  GripperSpec g;
  try {
    make_pose(loop, grid, cloud, tree, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoValidOrigin);
  }
}

TEST(GraspPose, OffSurfaceFrameUsesTangentCrossNormal) {
  const VoxelGrid grid = oracle::open_grid(80, kS, Vec3::Constant(-0.2));
  const CagingLoop loop = loop_of(circle(Vec3::Zero(), 0.1, 48));
  const KdTree empty;
  const auto poses = pose_candidates(loop, grid, PointCloud{}, empty, GripperSpec{});
  ASSERT_EQ(poses.size(), loop.vertices.size());
  for (const auto& p : poses) {
    expect_orthonormal(p);
    const Vec3& o = loop.vertices[p.vertex];
    EXPECT_TRUE(p.origin.isApprox(o));
    // On a circle, tangent x normal is the outward radial direction.
    EXPECT_NEAR(p.dir1.dot(o.normalized()), 1.0, 1e-2);
  }
  // Ties in angle fall back to vertex order.
  EXPECT_EQ(poses.front().vertex, 0u);
}

TEST(GraspPose, GripperInOpenSpaceIsValid) {
  const VoxelGrid grid = oracle::open_grid(80, kS, Vec3::Constant(-0.2));
  const GraspPose p = frame_from_origin(Vec3::Zero(), Vec3(-1, 0, 0), Vec3::UnitZ());
  GripperSpec g;
  g.h = 0.1;
  EXPECT_TRUE(check_interference(p, CagingLoop{}, g, grid));
}

TEST(GraspPose, FingerAimedAtObjectIsInvalid) {
  GripperSpec g;
  g.h = 0.1;
  const GraspPose p = frame_from_origin(Vec3::Zero(), Vec3(-1, 0, 0), Vec3::UnitZ());
  const Vec3 palm = g.palm_offset * g.h * p.dir1;
  const double spread = g.spread_deg * M_PI / 180.0;
  const Vec3 finger = std::cos(spread) * (-p.dir1) + std::sin(spread) * p.dir2;
  const Vec3 target = palm + 0.6 * g.h * finger;
  const VoxelGrid grid = box_grid([&](const Vec3& x) { return (x - target).norm() < 0.02 ? Label::Object : Label::Grasping; });
  EXPECT_FALSE(check_interference(p, CagingLoop{}, g, grid));
  // The same ball mirrored to the other side of the closing axis blocks
  // the thumb.
  const Vec3 thumb = std::cos(spread) * (-p.dir1) - std::sin(spread) * p.dir2;
  const Vec3 other = palm + 0.6 * g.h * thumb;
  const VoxelGrid grid2 = box_grid([&](const Vec3& x) { return (x - other).norm() < 0.02 ? Label::Object : Label::Grasping; });
  EXPECT_FALSE(check_interference(p, CagingLoop{}, g, grid2));
}

TEST(GraspPose, GripperSamplesCoverFingersAndPalm) {
  GripperSpec g;
  g.h = 0.1;
  g.r = 0.01;
  const GraspPose p = frame_from_origin(Vec3::Zero(), Vec3(-1, 0, 0), Vec3::UnitZ());
  const auto samples = gripper_samples(p, g, 0.005);
  const Vec3 palm = g.palm_offset * g.h * p.dir1;
  double reach = 0.0;
  for (const Vec3& s : samples) reach = std::max(reach, (s - palm).norm());
  EXPECT_NEAR(reach, std::hypot(g.h, g.r), 1e-9);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    double nearest = 1e9;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) nearest = std::min(nearest, (samples[i] - samples[j]).norm());
    }
    EXPECT_LE(nearest, 0.005 + 1e-9);
  }
}

TEST(GraspPose, TorusPoseOpensOnTheOuterSide) {
  // A cone deep enough to reach across the hole separates the sides of the
  // tube; near the surface the voxel staircase dominates either side.
  const TorusRun& t = torus_run();
  const VoxelGrid& grid = t.artifacts.grid;
  const KdTree tree(t.artifacts.cloud.points);
  GripperSpec g{0.12, 0.01};
  g.approach_depth = 0.1;
  std::size_t tube_loops = 0, compared = 0;
  for (const auto& r : t.report.results) {
    if (std::abs(oracle::winding_about_core_circle(r.loop.vertices, t.params.major)) != 1) continue;
    ++tube_loops;
    const auto poses = pose_candidates(r.loop, grid, t.artifacts.cloud, tree, g);
    double inner = -1.0, outer = -1.0;
    for (const auto& p : poses) {
      if (std::abs(p.origin.z()) > 0.5 * t.params.minor) continue;
      double& side = std::hypot(p.origin.x(), p.origin.y()) > t.params.major ? outer : inner;
      side = std::max(side, p.opening_angle);
    }
    if (inner < 0.0 || outer < 0.0) continue;  // loop misses one side's equator
    ++compared;
    EXPECT_GT(outer, inner);
    const Vec3& o = poses.front().origin;
    EXPECT_FALSE(std::abs(o.z()) <= 0.5 * t.params.minor && std::hypot(o.x(), o.y()) < t.params.major);
  }
  EXPECT_GT(tube_loops, 0u);
  EXPECT_GT(compared, 0u);
}

TEST(GraspPose, ValidGripperStaysOutsideOffsetSurface) {
  const TorusRun& t = torus_run();
  const VoxelGrid& grid = t.artifacts.grid;
  const double diag = std::sqrt(3.0) * grid.spacing();
  GripperSpec g{0.12, 0.01};
  std::size_t checked = 0;
  for (const auto& r : t.report.results) {
    if (!r.pose.valid) continue;
    for (const Vec3& x : gripper_samples(r.pose, g, 0.5 * grid.spacing())) {
      EXPECT_GE(shape_signed_distance(ShapeKind::Torus, t.params, x), g.r - diag);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(GraspPose, RawSurfaceLoopCollidesWhileEmbeddedLoopIsFree) {
  const ShapeParams params = ShapeParams::defaults(ShapeKind::BlockyL);
  const PointCloud cloud = generate_shape(ShapeKind::BlockyL, params, 2000, 7);
  PipelineConfig config;
  config.gripper.h = 0.2;
  config.gripper.r = 0.01;
  PipelineArtifacts artifacts;
  const RunReport report = run(config, cloud, &artifacts);
  const VoxelGrid& grid = artifacts.grid;

  // Embedding-space loop: the pipeline finds an interference-free pose.
  bool embedded_valid = false;
  for (const auto& r : report.results) embedded_valid = embedded_valid || r.pose.valid;
  EXPECT_TRUE(embedded_valid);

  // Raw-surface loop: the surface points in the mid-depth slice, in angular
  // order about their mean. Poses at its vertices in the concave corner
  // collide.
  std::vector<Vec3> slice;
  for (const Vec3& p : cloud.points) {
    if (std::abs(p.z()) < 0.004) slice.push_back(p);
  }
  ASSERT_GE(slice.size(), 8u);
  const Vec3 c = oracle::svd_plane(slice).center;
  std::sort(slice.begin(), slice.end(), [&](const Vec3& a, const Vec3& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  const CagingLoop raw = loop_of(slice);
  const Plane plane = fit_plane(raw.vertices);
  const Vec3 corner(params.thickness - 0.5 * params.arm, params.thickness - 0.5 * params.arm, 0.0);
  std::size_t tested = 0, valid = 0;
  for (const Vec3& o : raw.vertices) {
    if ((o - corner).norm() > 0.03) continue;
    ++tested;
    valid += check_interference(frame_from_origin(o, vertex_mean(raw.vertices), plane.normal), raw, config.gripper, grid);
  }
  EXPECT_GT(tested, 0u);
  EXPECT_EQ(valid, 0u);
}
