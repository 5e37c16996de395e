#include "cageloop/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace cageloop {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Object: return "OBJECT";
    case Label::Band: return "BAND";
    case Label::Grasping: return "GRASPING";
    case Label::OutsideHull: return "OUTSIDE_HULL";
  }
  return "UNKNOWN";
}

VoxelGrid::VoxelGrid(Vec3 origin, double spacing, std::array<int, 3> dims, std::vector<Label> labels)
    : origin_(std::move(origin)), spacing_(spacing), dims_(dims), labels_(std::move(labels)) {
  if (!(spacing_ > 0.0) || dims_[0] < 1 || dims_[1] < 1 || dims_[2] < 1) {
    throw Error(ErrorCode::BadParams, "voxel grid needs positive spacing and dimensions");
  }
  const std::size_t expected = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  if (labels_.size() != expected) throw Error(ErrorCode::BadParams, "label count does not match grid dimensions");
}

Vec3 VoxelGrid::center(VoxelIndex v) const {
  const auto c = coords(v);
  return origin_ + spacing_ * Vec3(c[0] + 0.5, c[1] + 0.5, c[2] + 0.5);
}

VoxelIndex VoxelGrid::locate(const Vec3& x) const {
  const Vec3 local = (x - origin_) / spacing_;
  const double fi = std::floor(local.x()), fj = std::floor(local.y()), fk = std::floor(local.z());
  if (!(fi >= 0 && fj >= 0 && fk >= 0 && fi < dims_[0] && fj < dims_[1] && fk < dims_[2])) return kNoVoxel;
  return index(static_cast<int>(fi), static_cast<int>(fj), static_cast<int>(fk));
}

bool VoxelGrid::on_boundary(VoxelIndex v) const {
  const auto c = coords(v);
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0 || c[a] == dims_[a] - 1) return true;
  }
  return false;
}

VoxelGrid build_grid(const ImplicitSurface& surface, const PointCloud& cloud, const GridOptions& options) {
  if (options.resolution < 16) throw Error(ErrorCode::BadParams, "grid resolution must be at least 16");
  if (!(options.margin >= 0.0)) throw Error(ErrorCode::BadParams, "grid margin must be non-negative");
  if (!(options.hull_slack >= 0.0)) throw Error(ErrorCode::BadParams, "hull slack must be non-negative");

  const double r = surface.offset_radius();
  const std::vector<Vec3> offsets(surface.centers().begin() + static_cast<std::ptrdiff_t>(surface.surface_count()),
                                  surface.centers().end());
  std::vector<Vec3> all(cloud.points);
  all.insert(all.end(), offsets.begin(), offsets.end());
  const BoundingBox box = bounding_box(all);
  const double diag = box.diagonal();
  const Vec3 extent = (box.hi - box.lo).array() + 2.0 * options.margin * diag;
  const double spacing = extent.maxCoeff() / options.resolution;
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) dims[a] = std::max(1, static_cast<int>(std::ceil(extent[a] / spacing - 1e-9)));
  const Vec3 origin = box.center() - 0.5 * spacing * Vec3(dims[0], dims[1], dims[2]);

  auto hull = std::make_shared<const ConvexHull>(offsets);
  const double slack = options.hull_slack * diag;

  const std::size_t total = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::vector<Label> labels(total, Label::OutsideHull);
  VoxelGrid grid(origin, spacing, dims, std::move(labels));

  std::vector<Vec3> centers(total);
  for (std::size_t v = 0; v < total; ++v) centers[v] = grid.center(static_cast<VoxelIndex>(v));
  std::vector<double> values(total);
  surface.evaluate(centers, values);

  std::vector<Label> out(total);
  const auto count = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::ptrdiff_t v = 0; v < count; ++v) {
    const double f = values[v];
    if (f < 0.0) {
      out[v] = Label::Object;
    } else if (f < r) {
      out[v] = Label::Band;
    } else {
      out[v] = hull->contains(centers[v], slack) ? Label::Grasping : Label::OutsideHull;
    }
  }
  grid = VoxelGrid(origin, spacing, dims, std::move(out));
  grid.set_hull(hull);
  grid.set_offset_radius(r);
  if (label_counts(grid)[static_cast<int>(Label::Grasping)] == 0) {
    throw Error(ErrorCode::EmptyGraspingSpace, "no voxel lies in the grasping space; check offset radius and resolution");
  }
  return grid;
}

Vec3 centroid_of_object(const VoxelGrid& grid) {
  Vec3 sum = Vec3::Zero();
  std::size_t count = 0;
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (grid.labels()[v] != Label::Object) continue;
    sum += grid.center(static_cast<VoxelIndex>(v));
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::NoObjectVoxels, "grid has no OBJECT voxels");
  return sum / static_cast<double>(count);
}

std::array<std::size_t, 4> label_counts(const VoxelGrid& grid) {
  std::array<std::size_t, 4> counts{};
  for (Label l : grid.labels()) ++counts[static_cast<int>(l)];
  return counts;
}

std::size_t count_components(const VoxelGrid& grid, Label label) {
  std::vector<char> seen(grid.size(), 0);
  std::vector<VoxelIndex> stack;
  std::size_t components = 0;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    if (seen[s] || grid.labels()[s] != label) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(static_cast<VoxelIndex>(s));
    while (!stack.empty()) {
      const VoxelIndex v = stack.back();
      stack.pop_back();
      const auto c = grid.coords(v);
      for (int dk = -1; dk <= 1; ++dk) {
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if (!grid.in_bounds(c[0] + di, c[1] + dj, c[2] + dk)) continue;
            const VoxelIndex u = grid.index(c[0] + di, c[1] + dj, c[2] + dk);
            if (seen[u] || grid.label(u) != label) continue;
            seen[u] = 1;
            stack.push_back(u);
          }
        }
      }
    }
  }
  return components;
}

void write_grid(std::ostream& out, const VoxelGrid& grid) {
  std::ostringstream header;
  header.precision(17);
  header << "VOXELGRID 1\n"
         << "origin " << grid.origin().x() << ' ' << grid.origin().y() << ' ' << grid.origin().z() << '\n'
         << "spacing " << grid.spacing() << '\n'
         << "dims " << grid.dims()[0] << ' ' << grid.dims()[1] << ' ' << grid.dims()[2] << '\n'
         << "labels\n";
  out << header.str();
  std::string body(grid.size(), '0');
  for (std::size_t v = 0; v < grid.size(); ++v) body[v] = static_cast<char>('0' + static_cast<int>(grid.labels()[v]));
  out << body << '\n';
}

VoxelGrid read_grid(std::istream& in) {
  auto fail = [](const std::string& what) { return Error(ErrorCode::ParseError, "voxel grid: " + what); };
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "VOXELGRID" || version != 1) throw fail("bad magic");
  Vec3 origin;
  double spacing = 0.0;
  std::array<int, 3> dims{};
  if (!(in >> tag >> origin.x() >> origin.y() >> origin.z()) || tag != "origin") throw fail("missing origin");
  if (!(in >> tag >> spacing) || tag != "spacing") throw fail("missing spacing");
  if (!(in >> tag >> dims[0] >> dims[1] >> dims[2]) || tag != "dims") throw fail("missing dims");
  if (!(in >> tag) || tag != "labels") throw fail("missing labels");
  in.get();
  const std::size_t total = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  std::string body(total, '\0');
  if (!in.read(body.data(), static_cast<std::streamsize>(total))) throw fail("truncated labels");
  std::vector<Label> labels(total);
  for (std::size_t v = 0; v < total; ++v) {
    if (body[v] < '0' || body[v] > '3') throw fail("bad label byte");
    labels[v] = static_cast<Label>(body[v] - '0');
  }
  return VoxelGrid(origin, spacing, dims, std::move(labels));
}

}  // namespace cageloop
