#include "cageloop/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cageloop {

namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : object.items()) {
    if (!known.count(item.key())) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + where + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& object, const char* key, T& out) {
  if (object.contains(key)) out = object.at(key).get<T>();
}

const json& section(const json& root, const char* key, const std::set<std::string>& known) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const json& s = root.at(key);
  if (!s.is_object()) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be an object");
  reject_unknown(s, known, std::string(key) + ".");
  return s;
}

Vec3 read_vec3(const json& value, const char* key) {
  if (!value.is_array() || value.size() != 3) {
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be an array of 3 numbers");
  }
  return Vec3(value[0].get<double>(), value[1].get<double>(), value[2].get<double>());
}

}  // namespace

void PipelineConfig::validate() const {
  gripper.validate();
  if (resolution < 16) throw Error(ErrorCode::BadParams, "resolution must be at least 16");
  if (samples < 1) throw Error(ErrorCode::BadParams, "samples must be at least 1");
  if (!(offset() > 0.0)) throw Error(ErrorCode::BadParams, "offset radius must be positive");
  if (!(margin >= 0.0)) throw Error(ErrorCode::BadParams, "margin must be non-negative");
  if (curvature_k < 6) throw Error(ErrorCode::BadParams, "curvature.k must be at least 6");
  if (max_points < 4) throw Error(ErrorCode::BadParams, "max_points must be at least 4");
  if (relax.iters < 1) throw Error(ErrorCode::BadParams, "relax.iters must be at least 1");
  if (!(relax.step > 0.0 && relax.step <= 1.0)) throw Error(ErrorCode::BadParams, "relax.step must lie in (0, 1]");
  if (!(dedup_tau_voxels > 0.0)) throw Error(ErrorCode::BadParams, "dedup.tau_voxels must be positive");
  if (!(pose.gravity.norm() > 0.0)) throw Error(ErrorCode::BadParams, "gravity must be non-zero");
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  cfg.source_text = text;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, "configuration must be a JSON object");
  reject_unknown(root,
                 {"input", "format", "output", "resolution", "samples", "offset_radius", "margin", "seed",
                  "curvature_filter", "curvature", "grid", "connectivity", "max_points", "gripper", "relax", "filter",
                  "dedup", "rank", "gravity", "pose", "dump_grid"},
                 "");
  try {
    if (root.contains("input")) cfg.input = root.at("input").get<std::string>();
    if (root.contains("output")) cfg.output = root.at("output").get<std::string>();
    if (root.contains("format")) {
      const auto f = root.at("format").get<std::string>();
      if (f == "mesh") {
        cfg.format = ShapeFormat::Mesh;
      } else if (f == "oriented-points" || f == "points") {
        cfg.format = ShapeFormat::OrientedPoints;
      } else if (f != "auto") {
        throw Error(ErrorCode::ConfigError, "format must be mesh, oriented-points or auto");
      }
    }
    read(root, "resolution", cfg.resolution);
    read(root, "samples", cfg.samples);
    if (root.contains("offset_radius")) cfg.offset_radius = root.at("offset_radius").get<double>();
    read(root, "margin", cfg.margin);
    read(root, "seed", cfg.seed);
    read(root, "curvature_filter", cfg.curvature_filter);
    read(root, "max_points", cfg.max_points);
    read(root, "dump_grid", cfg.dump_grid);
    if (root.contains("connectivity")) {
      const int c = root.at("connectivity").get<int>();
      if (c != 6 && c != 26) throw Error(ErrorCode::ConfigError, "connectivity must be 6 or 26");
      cfg.connectivity = c == 6 ? Connectivity::Six : Connectivity::TwentySix;
    }
    if (root.contains("gravity")) cfg.pose.gravity = read_vec3(root.at("gravity"), "gravity").normalized();

    const json& curvature = section(root, "curvature", {"k"});
    read(curvature, "k", cfg.curvature_k);

    const json& grid = section(root, "grid", {"hull_slack"});
    read(grid, "hull_slack", cfg.hull_slack);

    const json& gripper = section(root, "gripper", {"h", "r", "spread_deg", "palm_offset", "approach_depth"});
    read(gripper, "h", cfg.gripper.h);
    read(gripper, "r", cfg.gripper.r);
    read(gripper, "spread_deg", cfg.gripper.spread_deg);
    read(gripper, "palm_offset", cfg.gripper.palm_offset);
    read(gripper, "approach_depth", cfg.gripper.approach_depth);

    const json& relax = section(root, "relax", {"iters", "step", "resample_every"});
    read(relax, "iters", cfg.relax.iters);
    read(relax, "step", cfg.relax.step);
    read(relax, "resample_every", cfg.relax.resample_every);

    const json& filter = section(root, "filter", {"residual_max", "window", "iters"});
    read(filter, "residual_max", cfg.shortness.residual_max);
    read(filter, "window", cfg.shortness.window);
    read(filter, "iters", cfg.shortness.iters);

    const json& dedup = section(root, "dedup", {"tau_voxels"});
    read(dedup, "tau_voxels", cfg.dedup_tau_voxels);

    const json& rank = section(root, "rank", {"weights"});
    if (rank.contains("weights")) {
      const json& w = rank.at("weights");
      if (!w.is_array() || w.size() != 4) throw Error(ErrorCode::ConfigError, "rank.weights must hold 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) cfg.weights[i] = w[i].get<double>();
    }

    const json& pose = section(root, "pose", {"min_angle", "azimuths", "rings", "tolerance"});
    read(pose, "min_angle", cfg.pose.min_angle);
    read(pose, "azimuths", cfg.pose.cone.azimuths);
    read(pose, "rings", cfg.pose.cone.rings);
    read(pose, "tolerance", cfg.pose.cone.tolerance);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("bad value: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace cageloop
