#include "cageloop/result_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cageloop {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string vec(const Vec3& v) { return num(v.x()) + ' ' + num(v.y()) + ' ' + num(v.z()); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

Vec3 read_vec(std::istream& in) {
  Vec3 v;
  in >> v.x() >> v.y() >> v.z();
  return v;
}

}  // namespace

void write_loops(std::ostream& out, const RunReport& report) {
  out << "cageloop-loops 1\n";
  out << "h " << num(report.h) << " tau " << num(report.tau) << " residual_max " << num(report.residual_max)
      << " count " << report.results.size() << '\n';
  for (std::size_t rank = 0; rank < report.results.size(); ++rank) {
    const auto& r = report.results[rank];
    const auto& s = r.loop.scores;
    out << "loop " << rank << " score " << num(s.total) << " length " << num(r.loop.length) << '\n';
    out << "scores " << num(s.centroid) << ' ' << num(s.horizontality) << ' ' << num(s.length_fit) << ' '
        << num(s.residual) << '\n';
    out << "base " << vec(r.loop.base) << " voxel " << r.base_voxel << '\n';
    out << "source " << to_string(r.loop.source.kind) << " voxel " << r.critical_voxel << " axis " << r.loop.axis
        << '\n';
    out << "vertices " << r.loop.vertices.size() << '\n';
    for (const Vec3& v : r.loop.vertices) out << vec(v) << '\n';
    out << "end\n";
  }
}

void write_poses(std::ostream& out, const RunReport& report) {
  out << "# loop ox oy oz dir1x dir1y dir1z dir2x dir2y dir2z nx ny nz opening_angle valid\n";
  for (std::size_t rank = 0; rank < report.results.size(); ++rank) {
    const auto& r = report.results[rank];
    if (!r.has_pose) {
      out << rank << " none\n";
      continue;
    }
    const auto& p = r.pose;
    out << rank << ' ' << vec(p.origin) << ' ' << vec(p.dir1) << ' ' << vec(p.dir2) << ' ' << vec(p.plane_normal)
        << ' ' << num(p.opening_angle) << ' ' << (p.valid ? 1 : 0) << '\n';
  }
}

void write_report(std::ostream& out, const RunReport& report) {
  const auto& c = report.counts;
  out << "status " << report.status << '\n';
  if (!report.empty_reason.empty()) out << "empty_reason " << report.empty_reason << '\n';
  out << "grid_dims " << report.dims[0] << ' ' << report.dims[1] << ' ' << report.dims[2] << '\n';
  out << "grid_spacing " << num(report.spacing) << '\n';
  out << "labels OBJECT " << report.label_counts[0] << " BAND " << report.label_counts[1] << " GRASPING "
      << report.label_counts[2] << " OUTSIDE_HULL " << report.label_counts[3] << '\n';
  out << "grasping_components " << report.grasping_components << '\n';
  out << "offset_radius " << num(report.offset_radius) << '\n';
  out << "rbf_max_residual " << num(report.rbf_residual) << '\n';
  out << "h " << num(report.h) << '\n';
  out << "tau " << num(report.tau) << '\n';
  out << "count input_points " << c.input_points << '\n';
  out << "count fitted_points " << c.fitted_points << '\n';
  out << "count base_sampled " << c.base_sampled << '\n';
  out << "count base_after_curvature " << c.base_after_curvature << '\n';
  out << "count base_points " << c.base_points << '\n';
  out << "count fields " << c.fields << '\n';
  out << "count saddles " << c.saddles << '\n';
  out << "count maxima " << c.maxima << '\n';
  out << "count trace_attempts " << c.trace_attempts << '\n';
  out << "count traced " << c.traced << '\n';
  out << "count relaxed " << c.relaxed << '\n';
  out << "count after_length " << c.after_length << '\n';
  out << "count after_residual " << c.after_residual << '\n';
  out << "count retained " << c.retained << '\n';
  out << "count poses " << c.poses << '\n';
  out << "count valid_poses " << c.valid_poses << '\n';
  for (const auto& [bucket, count] : report.rejections) out << "rejected " << bucket << ' ' << count << '\n';
  for (std::size_t rank = 0; rank < report.results.size(); ++rank) {
    const auto& r = report.results[rank];
    out << "ranked " << rank << " score " << num(r.loop.scores.total) << " length " << num(r.loop.length)
        << " base " << r.base_voxel << " source " << r.critical_voxel << " pose "
        << (!r.has_pose ? "none" : (r.pose.valid ? "valid" : "interferes")) << '\n';
  }
  for (const auto& w : report.warnings) out << "warning " << w << '\n';
  out << "config_begin\n" << report.config_echo << "\nconfig_end\n";
}

void write_timings(std::ostream& out, const RunReport& report) {
  for (const auto& [stage, seconds] : report.timings) out << stage << ' ' << num(seconds) << '\n';
}

void write_outputs(const std::filesystem::path& dir, const RunReport& report, const VoxelGrid* grid) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  {
    auto out = open_out(dir / "loops.txt");
    write_loops(out, report);
  }
  {
    auto out = open_out(dir / "poses.txt");
    write_poses(out, report);
  }
  {
    auto out = open_out(dir / "report.txt");
    write_report(out, report);
  }
  {
    auto out = open_out(dir / "timings.txt");
    write_timings(out, report);
  }
  if (grid) {
    auto out = open_out(dir / "grid.txt");
    write_grid(out, *grid);
  }
}

std::string extract_config_echo(const std::string& report_text) {
  const std::string begin = "config_begin\n";
  const std::string end = "\nconfig_end\n";
  const auto b = report_text.find(begin);
  const auto e = report_text.rfind(end);
  if (b == std::string::npos || e == std::string::npos || e < b + begin.size()) {
    throw Error(ErrorCode::ParseError, "report has no config block");
  }
  return report_text.substr(b + begin.size(), e - b - begin.size());
}

StoredResults read_results(const std::filesystem::path& dir) {
  StoredResults results;
  auto fail = [&](const std::string& what) { return Error(ErrorCode::ParseError, "loops.txt: " + what); };
  std::ifstream loops(dir / "loops.txt");
  if (!loops) throw Error(ErrorCode::IoError, "cannot open " + (dir / "loops.txt").string());
  std::string tag;
  int version = 0;
  if (!(loops >> tag >> version) || tag != "cageloop-loops" || version != 1) throw fail("bad header");
  std::size_t count = 0;
  std::string t1, t2, t3, t4;
  if (!(loops >> t1 >> results.h >> t2 >> results.tau >> t3 >> results.residual_max >> t4 >> count)) {
    throw fail("bad parameter line");
  }
  for (std::size_t i = 0; i < count; ++i) {
    StoredLoop loop;
    double centroid, horizontality, length_fit;
    std::string line;
    if (!(loops >> tag >> loop.rank >> t1 >> loop.score >> t2 >> loop.length) || tag != "loop") throw fail("bad loop");
    if (!(loops >> tag >> centroid >> horizontality >> length_fit >> loop.residual) || tag != "scores") {
      throw fail("bad scores");
    }
    std::getline(loops, line);
    std::getline(loops, line);  // base
    std::getline(loops, line);  // source
    std::size_t n = 0;
    if (!(loops >> tag >> n) || tag != "vertices") throw fail("bad vertex count");
    for (std::size_t k = 0; k < n; ++k) loop.vertices.push_back(read_vec(loops));
    if (!(loops >> tag) || tag != "end") throw fail("missing end");
    results.loops.push_back(std::move(loop));
  }

  std::ifstream poses(dir / "poses.txt");
  if (!poses) throw Error(ErrorCode::IoError, "cannot open " + (dir / "poses.txt").string());
  std::string line;
  while (std::getline(poses, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    StoredPose p;
    ls >> p.loop;
    if (line.find("none") != std::string::npos) {
      results.poses.push_back(p);
      continue;
    }
    p.present = true;
    p.pose.origin = read_vec(ls);
    p.pose.dir1 = read_vec(ls);
    p.pose.dir2 = read_vec(ls);
    p.pose.plane_normal = read_vec(ls);
    int valid = 0;
    ls >> p.pose.opening_angle >> valid;
    if (!ls) throw Error(ErrorCode::ParseError, "poses.txt: bad line: " + line);
    p.pose.valid = valid != 0;
    results.poses.push_back(p);
  }

  if (std::filesystem::exists(dir / "grid.txt")) {
    std::ifstream grid(dir / "grid.txt", std::ios::binary);
    results.grid = read_grid(grid);
  }
  return results;
}

ValidationReport validate_results(const StoredResults& results) {
  ValidationReport report;
  auto check = [&](bool ok, const std::string& what) {
    ++report.checks;
    if (!ok) report.failures.push_back(what);
  };
  std::vector<CagingLoop> loops;
  for (const auto& stored : results.loops) {
    const std::string name = "loop " + std::to_string(stored.rank);
    const double length = polyline_length(stored.vertices);
    check(std::abs(length - stored.length) <= 1e-9, name + ": stored length differs from its vertices");
    check(stored.length < 4.0 * results.h, name + ": length is not below 4h");
    check(stored.residual < results.residual_max, name + ": base residual exceeds the threshold");
    if (results.grid) {
      bool inside = true;
      for (const Vec3& v : stored.vertices) {
        const VoxelIndex idx = results.grid->locate(v);
        inside = inside && idx != kNoVoxel && results.grid->grasping(idx);
      }
      check(inside, name + ": vertex outside the grasping space");
    }
    CagingLoop loop;
    loop.vertices = stored.vertices;
    loops.push_back(std::move(loop));
  }
  for (std::size_t i = 0; i < loops.size(); ++i) {
    for (std::size_t j = i + 1; j < loops.size(); ++j) {
      check(!hausdorff_below(loops[i], loops[j], results.tau),
            "loops " + std::to_string(i) + " and " + std::to_string(j) + " are closer than tau");
    }
  }
  for (const auto& stored : results.poses) {
    if (!stored.present) continue;
    const auto& p = stored.pose;
    const std::string name = "pose " + std::to_string(stored.loop);
    const bool unit = std::abs(p.dir1.norm() - 1) < 1e-6 && std::abs(p.dir2.norm() - 1) < 1e-6 &&
                      std::abs(p.plane_normal.norm() - 1) < 1e-6;
    const bool orthogonal = std::abs(p.dir1.dot(p.dir2)) < 1e-6 && std::abs(p.dir1.dot(p.plane_normal)) < 1e-6 &&
                            std::abs(p.dir2.dot(p.plane_normal)) < 1e-6;
    check(unit && orthogonal, name + ": frame is not orthonormal");
    bool on_loop = false;
    if (stored.loop < results.loops.size()) {
      for (const Vec3& v : results.loops[stored.loop].vertices) on_loop = on_loop || (v - p.origin).norm() <= 1e-12;
    }
    check(on_loop, name + ": origin is not a vertex of its loop");
  }
  return report;
}

}  // namespace cageloop
