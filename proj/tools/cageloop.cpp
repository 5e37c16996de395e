#include "cageloop/config.hpp"
#include "cageloop/pipeline.hpp"
#include "cageloop/result_io.hpp"
#include "cageloop/shapes.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace cageloop;

void print_error(const Error& e) {
  std::cerr << "error";
  if (!e.stage().empty()) std::cerr << " [" << e.stage() << ']';
  std::cerr << ' ' << to_string(e.code()) << ": " << e.what() << '\n';
}

struct SynthesizeArgs {
  std::string input, config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> resolution;
  std::optional<double> offset_radius, margin;
  bool dump_grid = false;
};

int synthesize(const SynthesizeArgs& args) {
  PipelineConfig config = args.config.empty() ? parse_config("{}") : load_config(args.config);
  if (!args.input.empty()) config.input = args.input;
  if (!args.out.empty()) config.output = args.out;
  if (args.seed) config.seed = *args.seed;
  if (args.resolution) config.resolution = *args.resolution;
  if (args.offset_radius) config.offset_radius = *args.offset_radius;
  if (args.margin) config.margin = *args.margin;
  if (args.dump_grid) config.dump_grid = true;
  if (config.input.empty()) throw Error(ErrorCode::ConfigError, "no input file given");

  PipelineArtifacts artifacts;
  const RunReport report = run(config, &artifacts);
  write_outputs(config.output, report, config.dump_grid ? &artifacts.grid : nullptr);

  std::cout << "status " << report.status;
  if (!report.empty_reason.empty()) std::cout << " (" << report.empty_reason << ')';
  std::cout << "\nloops " << report.results.size() << ", valid poses " << report.counts.valid_poses << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "results written to " << config.output.string() << '\n';
  return exit_code(report);
}

struct ShapeArgs {
  std::string kind, out;
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::optional<double> radius, height, major, minor, separation, waist, arm, thickness, depth;
};

int gen_shape(const ShapeArgs& args) {
  const ShapeKind kind = parse_shape_kind(args.kind);
  ShapeParams p = ShapeParams::defaults(kind);
  auto set = [](double& field, const std::optional<double>& value) {
    if (value) field = *value;
  };
  set(p.radius, args.radius);
  set(p.height, args.height);
  set(p.major, args.major);
  set(p.minor, args.minor);
  set(p.separation, args.separation);
  set(p.waist, args.waist);
  set(p.arm, args.arm);
  set(p.thickness, args.thickness);
  set(p.depth, args.depth);
  PointCloud cloud = generate_shape(kind, p, args.n, args.seed);
  if (args.noise > 0.0) cloud = add_noise(cloud, args.noise, args.seed);
  save_points(args.out, cloud);
  std::cout << "wrote " << cloud.size() << " oriented points to " << args.out << '\n';
  return 0;
}

int validate(const std::string& dir) {
  const StoredResults results = read_results(dir);
  const ValidationReport report = validate_results(results);
  for (const auto& f : report.failures) std::cout << "FAIL " << f << '\n';
  std::cout << report.checks << " checks, " << report.failures.size() << " failures";
  if (!results.grid) std::cout << " (no grid.txt, containment not checked)";
  std::cout << '\n';
  return report.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caging-loop grasp synthesis"};
  app.require_subcommand(1);

  SynthesizeArgs syn;
  auto* s = app.add_subcommand("synthesize", "Compute caging loops and grasp poses for a shape");
  s->add_option("--input", syn.input, "OBJ/OFF mesh or oriented point file (x y z nx ny nz)");
  s->add_option("--config", syn.config, "JSON configuration file");
  s->add_option("--seed", syn.seed, "Random seed");
  s->add_option("--out", syn.out, "Output directory");
  s->add_option("--resolution", syn.resolution, "Voxels along the longest axis");
  s->add_option("--offset-radius", syn.offset_radius, "Offset surface radius");
  s->add_option("--margin", syn.margin, "Grid margin as a fraction of the bounding box diagonal");
  s->add_flag("--dump-grid", syn.dump_grid, "Also write grid.txt");

  ShapeArgs shape;
  auto* g = app.add_subcommand("gen-shape", "Sample an analytic test shape");
  g->add_option("kind", shape.kind, "sphere, cylinder, torus, genus2 or blocky-L")->required();
  g->add_option("--out", shape.out, "Output point file")->required();
  g->add_option("--n", shape.n, "Number of points")->capture_default_str();
  g->add_option("--seed", shape.seed, "Sequence shift seed")->capture_default_str();
  g->add_option("--noise", shape.noise, "Gaussian noise sigma relative to the bounding box diagonal");
  g->add_option("--radius", shape.radius);
  g->add_option("--height", shape.height);
  g->add_option("--major", shape.major);
  g->add_option("--minor", shape.minor);
  g->add_option("--separation", shape.separation);
  g->add_option("--waist", shape.waist);
  g->add_option("--arm", shape.arm);
  g->add_option("--thickness", shape.thickness);
  g->add_option("--depth", shape.depth);

  std::string result_dir;
  auto* v = app.add_subcommand("validate", "Check the invariants of a result directory");
  v->add_option("--input", result_dir, "Result directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) return synthesize(syn);
    if (*g) return gen_shape(shape);
    if (*v) return validate(result_dir);
  } catch (const Error& e) {
    print_error(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
