#include "cageloop/distance_field.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace cageloop;

namespace {

VoxelIndex random_grasping(const VoxelGrid& grid, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (;;) {
    const auto v = static_cast<VoxelIndex>(pick(rng));
    if (grid.grasping(v)) return v;
  }
}

}  // namespace

TEST(DistanceField, AxisAndDiagonalNeighbours) {
  const VoxelGrid grid = oracle::open_grid(9, 0.25);
  const VoxelIndex p = grid.index(4, 4, 4);
  const DistanceField f = compute_field(grid, p, 10.0);
  EXPECT_EQ(f.dist[p], 0.0);
  EXPECT_EQ(f.pred[p], kNoVoxel);
  EXPECT_DOUBLE_EQ(f.dist[grid.index(5, 4, 4)], 0.25);
  EXPECT_DOUBLE_EQ(f.dist[grid.index(4, 3, 4)], 0.25);
  EXPECT_DOUBLE_EQ(f.dist[grid.index(5, 5, 4)], std::sqrt(2.0) * 0.25);
  EXPECT_DOUBLE_EQ(f.dist[grid.index(5, 5, 5)], std::sqrt(3.0) * 0.25);
  EXPECT_DOUBLE_EQ(f.dist[grid.index(3, 3, 3)], std::sqrt(3.0) * 0.25);
  EXPECT_EQ(f.pred[grid.index(5, 5, 5)], p);
}

TEST(DistanceField, NeighbourOffsets) {
  const auto six = neighbor_offsets(Connectivity::Six);
  const auto all = neighbor_offsets(Connectivity::TwentySix);
  ASSERT_EQ(six.size(), 6u);
  ASSERT_EQ(all.size(), 26u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& o = all[i];
    const int n2 = o.di * o.di + o.dj * o.dj + o.dk * o.dk;
    EXPECT_DOUBLE_EQ(o.length, std::sqrt(double(n2)));
    EXPECT_EQ(n2, i < 6 ? 1 : (i < 18 ? 2 : 3));
  }
}

TEST(DistanceField, MatchesRelaxationOracleOnRandomWallGrids) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const VoxelGrid grid = oracle::random_wall_grid(rng);
    const VoxelIndex p = random_grasping(grid, rng);
    const double cap = std::uniform_real_distribution<double>(2.0, 12.0)(rng);
    const DistanceField f = compute_field(grid, p, cap);
    const auto expected = oracle::relaxation_distances(grid, p, cap);
    for (std::size_t v = 0; v < grid.size(); ++v) {
      ASSERT_EQ(f.dist[v], expected[v]) << "trial " << trial << " voxel " << v;
    }
  }
}

TEST(DistanceField, SixConnectedMatchesOracle) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const VoxelGrid grid = oracle::random_wall_grid(rng, 12);
    const VoxelIndex p = random_grasping(grid, rng);
    const DistanceField f = compute_field(grid, p, 1e9, Connectivity::Six);
    const auto expected = oracle::relaxation_distances(grid, p, 1e9, true);
    for (std::size_t v = 0; v < grid.size(); ++v) ASSERT_EQ(f.dist[v], expected[v]);
  }
}

TEST(DistanceField, WallDetour) {
  // OBJECT wall at i = 5 with a single hole at (5, 0, 0).
  const VoxelGrid grid = oracle::make_grid({11, 6, 6}, 1.0, [](int i, int j, int k) {
    return (i == 5 && !(j == 0 && k == 0)) ? Label::Object : Label::Grasping;
  });
  const VoxelIndex p = grid.index(2, 4, 4);
  const VoxelIndex q = grid.index(8, 4, 4);
  const DistanceField f = compute_field(grid, p, 100.0);
  const auto expected = oracle::relaxation_distances(grid, p, 100.0);
  EXPECT_EQ(f.dist[q], expected[q]);
  EXPECT_GT(f.dist[q], 6.0 + 1.0);
  EXPECT_FALSE(f.finite(grid.index(5, 3, 3)));
}

TEST(DistanceField, DistancesBeyondCapAreInfinite) {
  const VoxelGrid grid = oracle::open_grid(12);
  const VoxelIndex p = grid.index(0, 0, 0);
  const DistanceField f = compute_field(grid, p, 3.0);
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (f.finite(static_cast<VoxelIndex>(v))) {
      EXPECT_LE(f.dist[v], 3.0);
    }
  }
  EXPECT_FALSE(f.finite(grid.index(4, 0, 0)));
  EXPECT_TRUE(f.finite(grid.index(3, 0, 0)));
}

TEST(DistanceField, MetricSymmetry) {
  std::mt19937_64 rng(11);
  std::size_t checked = 0;
  while (checked < 100) {
    const VoxelGrid grid = oracle::random_wall_grid(rng, 14);
    for (int pair = 0; pair < 20 && checked < 100; ++pair) {
      const VoxelIndex p = random_grasping(grid, rng);
      const VoxelIndex q = random_grasping(grid, rng);
      const DistanceField fp = compute_field(grid, p, 15.0);
      const DistanceField fq = compute_field(grid, q, 15.0);
      if (!fp.finite(q) || !fq.finite(p)) continue;
      // The reversed path sums the same edge lengths in the opposite order.
      EXPECT_NEAR(fp.dist[q], fq.dist[p], 1e-12 * fp.dist[q]);
      ++checked;
    }
  }
}

TEST(DistanceField, RaisingTheCapOnlyExtendsCoverage) {
  std::mt19937_64 rng(3);
  const VoxelGrid grid = oracle::random_wall_grid(rng, 16);
  const VoxelIndex p = random_grasping(grid, rng);
  DistanceField previous = compute_field(grid, p, 1.0);
  for (double cap : {2.0, 3.5, 5.0, 8.0, 1e9}) {
    const DistanceField f = compute_field(grid, p, cap);
    std::size_t before = 0, after = 0;
    for (std::size_t v = 0; v < grid.size(); ++v) {
      if (previous.finite(static_cast<VoxelIndex>(v))) {
        ++before;
        EXPECT_EQ(f.dist[v], previous.dist[v]);
      }
      after += f.finite(static_cast<VoxelIndex>(v));
    }
    EXPECT_GE(after, before);
    previous = f;
  }
}

TEST(DistanceField, PredecessorChainsDescendToBase) {
  std::mt19937_64 rng(8);
  const VoxelGrid grid = oracle::random_wall_grid(rng, 16);
  const VoxelIndex p = random_grasping(grid, rng);
  const DistanceField f = compute_field(grid, p, 9.0);
  const auto offsets = neighbor_offsets(Connectivity::TwentySix);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    VoxelIndex v = static_cast<VoxelIndex>(i);
    if (!f.finite(v)) continue;
    std::size_t steps = 0;
    while (v != p) {
      const VoxelIndex u = f.pred[v];
      ASSERT_NE(u, kNoVoxel);
      ASSERT_LT(f.dist[u], f.dist[v]);
      const auto a = grid.coords(u), b = grid.coords(v);
      const int n2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]);
      ASSERT_GE(n2, 1);
      ASSERT_LE(n2, 3);
      ASSERT_DOUBLE_EQ(f.dist[v], f.dist[u] + std::sqrt(double(n2)) * grid.spacing());
      v = u;
      ASSERT_LT(++steps, grid.size());
    }
  }
}

TEST(DistanceField, RelaxationConditionHolds) {
  std::mt19937_64 rng(21);
  const VoxelGrid grid = oracle::random_wall_grid(rng, 14);
  const VoxelIndex p = random_grasping(grid, rng);
  const double cap = 6.0;
  const DistanceField f = compute_field(grid, p, cap);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto u = static_cast<VoxelIndex>(i);
    if (!f.finite(u)) continue;
    const auto c = grid.coords(u);
    for (const auto& o : neighbor_offsets(Connectivity::TwentySix)) {
      if (!grid.in_bounds(c[0] + o.di, c[1] + o.dj, c[2] + o.dk)) continue;
      const VoxelIndex v = grid.index(c[0] + o.di, c[1] + o.dj, c[2] + o.dk);
      if (!grid.grasping(v)) continue;
      const double via = f.dist[u] + o.length * grid.spacing();
      if (via <= cap) EXPECT_LE(f.dist[v], via);
    }
  }
}

TEST(DistanceField, BaseMustBeGrasping) {
  const VoxelGrid grid = oracle::make_grid({5, 5, 5}, 1.0, [](int i, int, int) {
    return i == 2 ? Label::Band : Label::Grasping;
  });
  for (VoxelIndex bad : {grid.index(2, 2, 2), VoxelIndex{-1}, static_cast<VoxelIndex>(grid.size())}) {
    try {
      compute_field(grid, bad, 5.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BaseNotInGraspingSpace);
    }
  }
  EXPECT_THROW(compute_field(grid, grid.index(0, 0, 0), 0.0), Error);
}

TEST(DistanceField, Stats) {
  const VoxelGrid grid = oracle::open_grid(10, 0.5);
  const VoxelIndex p = grid.index(5, 5, 5);
  const FieldStats tiny = field_stats(compute_field(grid, p, 0.4), grid);
  EXPECT_EQ(tiny.visited, 1u);
  EXPECT_EQ(tiny.max_dist, 0.0);
  EXPECT_EQ(tiny.frontier, 26u);
  const FieldStats full = field_stats(compute_field(grid, p, 100.0), grid);
  EXPECT_EQ(full.visited, grid.size());
  EXPECT_EQ(full.frontier, 0u);
  const FieldStats mid = field_stats(compute_field(grid, p, 1.2), grid);
  EXPECT_LE(mid.max_dist, 1.2);
  EXPECT_GT(mid.frontier, 0u);
}

TEST(DistanceField, ChamferOverestimateIsBounded) {
  const int n = 31;
  const VoxelGrid grid = oracle::open_grid(n, 1.0);
  const VoxelIndex p = grid.index(15, 15, 15);
  const DistanceField f = compute_field(grid, p, 1e9);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = static_cast<VoxelIndex>(i);
    if (v == p) continue;
    const double euclid = (grid.center(v) - grid.center(p)).norm();
    EXPECT_GE(f.dist[i], euclid - 1e-9);
    worst = std::max(worst, f.dist[i] / euclid - 1.0);
  }
  // Along a direction sorted as a >= b >= c the path length is
  // w . (a, b, c) with w = (1, sqrt2 - 1, sqrt3 - sqrt2), so the worst ratio
  // is |w|, about 1.128.
  const double bound = Vec3(1.0, std::sqrt(2.0) - 1.0, std::sqrt(3.0) - std::sqrt(2.0)).norm() - 1.0;
  EXPECT_LE(worst, bound + 1e-12);
  EXPECT_GT(worst, 0.9 * bound);
}

TEST(DistanceField, DeterministicPredecessors) {
  std::mt19937_64 rng(31);
  const VoxelGrid grid = oracle::random_wall_grid(rng, 16);
  const VoxelIndex p = random_grasping(grid, rng);
  const DistanceField a = compute_field(grid, p, 8.0);
  const DistanceField b = compute_field(grid, p, 8.0);
  EXPECT_EQ(a.pred, b.pred);
  EXPECT_EQ(a.dist, b.dist);
  std::ostringstream out;
  write_field(out, a, grid);
  EXPECT_EQ(out.str().rfind("DISTANCEFIELD 1\n", 0), 0u);
}
