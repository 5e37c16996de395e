#pragma once

#include "cageloop/convex_hull.hpp"
#include "cageloop/point_cloud.hpp"
#include "cageloop/rbf.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace cageloop {

enum class Label : std::uint8_t { Object = 0, Band = 1, Grasping = 2, OutsideHull = 3 };

std::string_view to_string(Label label);

struct GridOptions {
  int resolution = 50;   // voxels along the longest bounding-box axis
  double margin = 0.15;  // bounding-box expansion, fraction of its diagonal
  // Tolerance of the hull test, fraction of the bounding-box diagonal.
  double hull_slack = 0.03;
};

class VoxelGrid {
 public:
  VoxelGrid() = default;
  VoxelGrid(Vec3 origin, double spacing, std::array<int, 3> dims, std::vector<Label> labels);

  const Vec3& origin() const { return origin_; }
  double spacing() const { return spacing_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<Label>& labels() const { return labels_; }

  Label label(VoxelIndex v) const { return labels_[static_cast<std::size_t>(v)]; }
  bool grasping(VoxelIndex v) const { return label(v) == Label::Grasping; }
  bool blocked(VoxelIndex v) const { return label(v) == Label::Object || label(v) == Label::Band; }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims_[0] && j < dims_[1] && k < dims_[2];
  }
  VoxelIndex index(int i, int j, int k) const {
    return static_cast<VoxelIndex>(i) + static_cast<VoxelIndex>(dims_[0]) * (j + static_cast<VoxelIndex>(dims_[1]) * k);
  }
  std::array<int, 3> coords(VoxelIndex v) const {
    const auto nx = static_cast<VoxelIndex>(dims_[0]);
    const auto ny = static_cast<VoxelIndex>(dims_[1]);
    return {static_cast<int>(v % nx), static_cast<int>((v / nx) % ny), static_cast<int>(v / (nx * ny))};
  }
  Vec3 center(VoxelIndex v) const;
  // Containing voxel, or kNoVoxel outside the grid.
  VoxelIndex locate(const Vec3& x) const;
  bool on_boundary(VoxelIndex v) const;

  // Hull used for labeling; null for hand-built grids.
  const std::shared_ptr<const ConvexHull>& hull() const { return hull_; }
  void set_hull(std::shared_ptr<const ConvexHull> hull) { hull_ = std::move(hull); }

  // Offset radius r the labels were computed for; 0 for hand-built grids.
  double offset_radius() const { return offset_radius_; }
  void set_offset_radius(double r) { offset_radius_ = r; }

 private:
  Vec3 origin_ = Vec3::Zero();
  double spacing_ = 1.0;
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<Label> labels_;
  std::shared_ptr<const ConvexHull> hull_;
  double offset_radius_ = 0.0;
};

// Labels voxel centers against f and the hull of the offset points. Throws
// EmptyGraspingSpace when no voxel is GRASPING.
VoxelGrid build_grid(const ImplicitSurface& surface, const PointCloud& cloud, const GridOptions& options = {});

// Mean of OBJECT voxel centers; throws NoObjectVoxels.
Vec3 centroid_of_object(const VoxelGrid& grid);

std::array<std::size_t, 4> label_counts(const VoxelGrid& grid);

// Number of 26-connected components formed by voxels with the given label.
std::size_t count_components(const VoxelGrid& grid, Label label);

// Text header followed by one ASCII digit per voxel, x-fastest.
void write_grid(std::ostream& out, const VoxelGrid& grid);
VoxelGrid read_grid(std::istream& in);

}  // namespace cageloop
