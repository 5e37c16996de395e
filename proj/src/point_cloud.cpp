#include "cageloop/point_cloud.hpp"

#include "cageloop/kdtree.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>
#include <random>
#include <sstream>
#include <string>

namespace cageloop {

namespace {

constexpr double kCoincidentTol = 1e-9;
constexpr double kUnitTol = 1e-6;

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Any unit vector orthogonal to n.
Vec3 orthogonal_unit(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(helper).normalized();
}

Vec3 pca_normal(std::span<const Vec3> points, std::span<const std::size_t> ids) {
  Vec3 mean = Vec3::Zero();
  for (std::size_t id : ids) mean += points[id];
  mean /= static_cast<double>(ids.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t id : ids) {
    const Vec3 d = points[id] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  return eig.eigenvectors().col(0).normalized();
}

// Flip normals so that neighbouring normals agree, walking a minimum
// spanning tree of the k-NN graph (edge cost 1 - |n_i . n_j|).
void propagate_orientation(std::span<const Vec3> points, std::vector<Vec3>& normals,
                           const std::vector<std::vector<std::size_t>>& neighbours) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbours[i]) {
      if (j == i) continue;
      adjacency[i].push_back(j);
      adjacency[j].push_back(i);
    }
  }
  for (auto& list : adjacency) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  std::vector<char> done(n, 0);
  using Entry = std::tuple<double, std::size_t, std::size_t>;  // cost, node, parent
  for (;;) {
    // Seed each component at its highest point with an upward normal.
    std::size_t seed = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && (seed == n || points[i].z() > points[seed].z())) seed = i;
    }
    if (seed == n) break;
    if (normals[seed].z() < 0) normals[seed] = -normals[seed];

    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.emplace(0.0, seed, seed);
    while (!heap.empty()) {
      const auto [cost, node, parent] = heap.top();
      heap.pop();
      if (done[node]) continue;
      done[node] = 1;
      if (node != parent && normals[node].dot(normals[parent]) < 0) normals[node] = -normals[node];
      for (std::size_t next : adjacency[node]) {
        if (done[next]) continue;
        heap.emplace(1.0 - std::abs(normals[node].dot(normals[next])), next, node);
      }
    }
  }
}

void orient_outward(std::span<const Vec3> points, std::vector<Vec3>& normals) {
  const Vec3 c = centroid(points);
  std::size_t outward = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (normals[i].dot(points[i] - c) > 0) ++outward;
  }
  if (2 * outward < points.size()) {
    for (Vec3& nrm : normals) nrm = -nrm;
  }
}

// Replace zero-length normals with PCA estimates that face away from the
// centroid. Throws when there are too few points to estimate anything.
void repair_normals(const std::vector<Vec3>& points, std::vector<Vec3>& normals) {
  const bool needs_repair = std::any_of(normals.begin(), normals.end(),
                                        [](const Vec3& n) { return n.norm() < 1e-12; });
  if (!needs_repair) return;
  if (points.size() < 4) {
    throw Error(ErrorCode::DegenerateInput, "zero-length normals and too few points to re-estimate");
  }
  const KdTree tree(points);
  const Vec3 c = centroid(points);
  const std::size_t k = std::min<std::size_t>(12, points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (normals[i].norm() >= 1e-12) continue;
    const auto ids = tree.knn(points[i], k);
    Vec3 nrm = pca_normal(points, ids);
    if (nrm.dot(points[i] - c) < 0) nrm = -nrm;
    normals[i] = nrm;
  }
}

}  // namespace

void PointCloud::validate() const {
  if (points.size() < 4) {
    throw Error(ErrorCode::DegenerateInput,
                "point cloud needs at least 4 points, got " + std::to_string(points.size()));
  }
  if (normals.size() != points.size()) {
    throw Error(ErrorCode::DegenerateInput, "normal count does not match point count");
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!points[i].allFinite() || std::abs(normals[i].norm() - 1.0) > kUnitTol) {
      throw Error(ErrorCode::DegenerateInput, "point " + std::to_string(i) + " has a non-unit normal");
    }
  }
  const KdTree tree(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nn = tree.knn(points[i], 2);
    const std::size_t other = nn[0] == i ? nn[1] : nn[0];
    if ((points[other] - points[i]).norm() <= kCoincidentTol) {
      throw Error(ErrorCode::DegenerateInput,
                  "points " + std::to_string(i) + " and " + std::to_string(other) + " coincide");
    }
  }
}

BoundingBox bounding_box(std::span<const Vec3> points) {
  BoundingBox box;
  if (points.empty()) return box;
  box.lo = box.hi = points.front();
  for (const Vec3& p : points) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  return points.empty() ? c : Vec3(c / static_cast<double>(points.size()));
}

PointCloud read_mesh(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;

  auto add_polygon = [&](const std::vector<long long>& raw) {
    std::vector<std::size_t> ids;
    for (long long v : raw) {
      if (v < 0 || static_cast<std::size_t>(v) >= vertices.size()) {
        throw Error(ErrorCode::ParseError, "face references missing vertex " + std::to_string(v));
      }
      ids.push_back(static_cast<std::size_t>(v));
    }
    if (ids.size() < 3) throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices");
    for (std::size_t i = 1; i + 1 < ids.size(); ++i) triangles.push_back({ids[0], ids[i], ids[i + 1]});
  };

  std::string line;
  std::string first;
  while (first.empty() && std::getline(in, line)) {
    std::istringstream ls(line);
    ls >> first;
    if (!first.empty() && first[0] == '#') first.clear();
  }
  if (first.empty()) throw Error(ErrorCode::DegenerateInput, "empty mesh file");

  if (first == "OFF") {
    std::size_t nv = 0, nf = 0, ne = 0;
    std::istringstream rest(line.substr(line.find("OFF") + 3));
    if (!(rest >> nv >> nf >> ne)) {
      std::string counts;
      do {
        if (!std::getline(in, counts)) throw Error(ErrorCode::ParseError, "OFF header missing counts");
      } while (counts.find_first_not_of(" \t\r") == std::string::npos || counts[0] == '#');
      std::istringstream cs(counts);
      if (!(cs >> nv >> nf >> ne)) throw Error(ErrorCode::ParseError, "malformed OFF counts");
    }
    vertices.reserve(nv);
    while (vertices.size() < nv && std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      std::istringstream vs(line);
      double x, y, z;
      if (!(vs >> x >> y >> z)) throw Error(ErrorCode::ParseError, "malformed OFF vertex: " + line);
      vertices.emplace_back(x, y, z);
    }
    if (vertices.size() != nv) throw Error(ErrorCode::ParseError, "OFF file ends before all vertices");
    std::size_t faces = 0;
    while (faces < nf && std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      std::istringstream fs(line);
      std::size_t count = 0;
      if (!(fs >> count)) throw Error(ErrorCode::ParseError, "malformed OFF face: " + line);
      std::vector<long long> raw(count);
      for (auto& v : raw) {
        if (!(fs >> v)) throw Error(ErrorCode::ParseError, "malformed OFF face: " + line);
      }
      add_polygon(raw);
      ++faces;
    }
    if (faces != nf) throw Error(ErrorCode::ParseError, "OFF file ends before all faces");
  } else {
    auto parse_obj_line = [&](const std::string& text) {
      std::istringstream ls(text);
      std::string tag;
      if (!(ls >> tag) || tag[0] == '#') return;
      if (tag == "v") {
        double x, y, z;
        if (!(ls >> x >> y >> z)) throw Error(ErrorCode::ParseError, "malformed vertex: " + text);
        vertices.emplace_back(x, y, z);
      } else if (tag == "f") {
        std::vector<long long> raw;
        std::string token;
        while (ls >> token) {
          long long v = 0;
          try {
            v = std::stoll(token.substr(0, token.find('/')));
          } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "malformed face index: " + token);
          }
          raw.push_back(v > 0 ? v - 1 : static_cast<long long>(vertices.size()) + v);
        }
        add_polygon(raw);
      } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" || tag == "s" ||
                 tag == "usemtl" || tag == "mtllib" || tag == "l") {
        return;
      } else {
        throw Error(ErrorCode::ParseError, "unknown OBJ record: " + tag);
      }
    };
    parse_obj_line(line);
    while (std::getline(in, line)) parse_obj_line(line);
  }

  if (vertices.size() < 4) throw Error(ErrorCode::DegenerateInput, "mesh has fewer than 4 vertices");

  std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
  double signed_volume = 0.0;
  for (const auto& t : triangles) {
    const Vec3& a = vertices[t[0]];
    const Vec3& b = vertices[t[1]];
    const Vec3& c = vertices[t[2]];
    const Vec3 area_normal = (b - a).cross(c - a);  // length = 2 * area
    for (std::size_t v : t) normals[v] += area_normal;
    signed_volume += a.dot(b.cross(c));
  }
  const double orientation = signed_volume < 0 ? -1.0 : 1.0;
  for (Vec3& n : normals) {
    const double len = n.norm();
    n = len > 1e-300 ? Vec3(orientation * n / len) : Vec3::Zero();
  }
  repair_normals(vertices, normals);

  PointCloud cloud{std::move(vertices), std::move(normals)};
  cloud.validate();
  return cloud;
}

PointCloud read_points(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int columns = -1;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw Error(ErrorCode::ParseError, "non-numeric token on line " + std::to_string(line_no));
    const int count = static_cast<int>(values.size());
    if (count != 3 && count != 6) {
      throw Error(ErrorCode::ParseError, "expected 3 or 6 values on line " + std::to_string(line_no));
    }
    if (columns < 0) columns = count;
    if (count != columns) throw Error(ErrorCode::ParseError, "inconsistent columns on line " + std::to_string(line_no));
    cloud.points.emplace_back(values[0], values[1], values[2]);
    if (count == 6) {
      Vec3 n(values[3], values[4], values[5]);
      const double len = n.norm();
      cloud.normals.push_back(len > 1e-12 ? Vec3(n / len) : Vec3::Zero());
    }
  }
  if (cloud.points.size() < 4) {
    throw Error(ErrorCode::DegenerateInput,
                "point file holds " + std::to_string(cloud.points.size()) + " points, need at least 4");
  }
  if (columns == 3) {
    cloud.normals = estimate_normals(cloud.points);
  } else {
    repair_normals(cloud.points, cloud.normals);
  }
  cloud.validate();
  return cloud;
}

ShapeFormat guess_format(const std::filesystem::path& path) {
  const std::string ext = lowercase(path.extension().string());
  return (ext == ".obj" || ext == ".off") ? ShapeFormat::Mesh : ShapeFormat::OrientedPoints;
}

PointCloud load_shape(const std::filesystem::path& path, ShapeFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return format == ShapeFormat::Mesh ? read_mesh(in) : read_points(in);
}

void write_points(std::ostream& out, const PointCloud& cloud) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
  }
}

void save_points(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_points(out, cloud);
}

std::vector<Vec3> estimate_normals(std::span<const Vec3> points, std::size_t k) {
  const std::size_t n = points.size();
  if (n < 4) throw Error(ErrorCode::DegenerateInput, "need at least 4 points to estimate normals");
  k = std::min(std::max<std::size_t>(k, 3), n);

  const KdTree tree(points);
  std::vector<std::vector<std::size_t>> neighbours(n);
  std::vector<Vec3> normals(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbours[i] = tree.knn(points[i], k);
    normals[i] = pca_normal(points, neighbours[i]);
  }
  propagate_orientation(points, normals, neighbours);
  orient_outward(points, normals);
  return normals;
}

std::vector<SurfaceSamplePoint> estimate_curvatures(const PointCloud& cloud, std::size_t k,
                                                    std::span<const std::size_t> subset) {
  if (k < 6) throw Error(ErrorCode::BadParams, "curvature estimation needs k >= 6");
  const KdTree tree(cloud.points);
  std::vector<SurfaceSamplePoint> out(subset.size());

  for (std::size_t s = 0; s < subset.size(); ++s) {
    const std::size_t i = subset[s];
    SurfaceSamplePoint& sample = out[s];
    sample.position = cloud.points[i];
    sample.normal = cloud.normals[i];

    const Vec3& p = cloud.points[i];
    const Vec3& n = cloud.normals[i];
    const Vec3 t1 = orthogonal_unit(n);
    const Vec3 t2 = n.cross(t1);
    const auto ids = tree.knn(p, k + 1);

    double scale = 0.0;
    for (std::size_t id : ids) scale = std::max(scale, (cloud.points[id] - p).norm());
    if (ids.size() < 7 || scale <= 0.0) {
      sample.degenerate = true;
      continue;
    }

    // Height field w(u, v) = a u^2 + b uv + c v^2 + d u + e v + f in the
    // tangent frame, in coordinates scaled by the neighbourhood radius.
    Eigen::MatrixXd design(ids.size(), 6);
    Eigen::VectorXd rhs(ids.size());
    for (std::size_t row = 0; row < ids.size(); ++row) {
      const Vec3 d = (cloud.points[ids[row]] - p) / scale;
      const double u = d.dot(t1);
      const double v = d.dot(t2);
      design.row(row) << u * u, u * v, v * v, u, v, 1.0;
      rhs[row] = d.dot(n);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] < 1e-6 * sv[0]) {
      sample.degenerate = true;
      continue;
    }
    const Eigen::VectorXd coef = svd.solve(rhs);
    const double a = coef[0], b = coef[1], c = coef[2], du = coef[3], dv = coef[4];

    Eigen::Matrix2d first;
    first << 1 + du * du, du * dv, du * dv, 1 + dv * dv;
    Eigen::Matrix2d second;
    second << 2 * a, b, b, 2 * c;
    second /= std::sqrt(1 + du * du + dv * dv);
    const Eigen::Matrix2d shape = first.inverse() * second;
    // The shape operator is self-adjoint w.r.t. the first fundamental form,
    // so its eigenvalues are real.
    Eigen::EigenSolver<Eigen::Matrix2d> eig(shape);
    double e0 = eig.eigenvalues()[0].real() / scale;
    double e1 = eig.eigenvalues()[1].real() / scale;
    sample.k1 = std::max(e0, e1);
    sample.k2 = std::min(e0, e1);
  }
  return out;
}

std::vector<SurfaceSamplePoint> estimate_curvatures(const PointCloud& cloud, std::size_t k) {
  std::vector<std::size_t> all(cloud.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return estimate_curvatures(cloud, k, all);
}

PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0 && sigma <= 0.1)) throw Error(ErrorCode::BadParams, "noise sigma must lie in [0, 0.1]");
  if (sigma == 0.0) return cloud;
  const double stddev = sigma * bounding_box(cloud.points).diagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, stddev);
  PointCloud noisy;
  noisy.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) {
    const double dx = gauss(rng);
    const double dy = gauss(rng);
    const double dz = gauss(rng);
    noisy.points.emplace_back(p.x() + dx, p.y() + dy, p.z() + dz);
  }
  noisy.normals = estimate_normals(noisy.points);
  return noisy;
}

}  // namespace cageloop
