#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "activemap/camera.hpp"
#include "activemap/fisher.hpp"
#include "activemap/lie2.hpp"
#include "activemap/llm.hpp"
#include "activemap/mapping.hpp"
#include "activemap/occupancy.hpp"
#include "activemap/planner.hpp"
#include "activemap/tracking.hpp"

namespace activemap {

namespace detail {

// Strict JSON section reader: every key must be known and well-typed, and
// unknown keys are reported with their full dotted path. Owns its section
// so it can be fed from a temporary.
class StrictObject {
 public:
  StrictObject(nlohmann::json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw std::runtime_error("config: '" + path_ + "' must be an object");
    }
  }

  bool has(const std::string& key) {
    return j_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const nlohmann::json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "a string");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() && !v.is_number_unsigned()) fail(key, "an integer");
    } else {
      if (!v.is_number()) fail(key, "a number");
    }
    out = v.get<T>();
  }

  nlohmann::json take_object(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? j_.at(key) : nlohmann::json::object();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw std::runtime_error("config: unknown key '" + dotted(it.key()) + "'");
      }
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const char* expect) const {
    throw std::runtime_error("config: key '" + dotted(key) + "' expects " + expect);
  }
  std::string dotted(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  nlohmann::json j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace detail

// Every hyperparameter of the system, keyed and defaulted. Values mirror
// the module-level parameter structs; the adapters below translate.
struct EpisodeConfig {
  std::uint64_t seed = 0;
  std::string world = "data/worlds/apartment.json";
  int total_steps = 500;

  struct CameraCfg {
    int width = 64;
    double fov_deg = 90.0;
    double max_depth = 8.0;
    bool operator==(const CameraCfg&) const = default;
  } camera;

  struct ActionsCfg {
    double forward_m = 0.05;
    double turn_deg = 5.0;
    bool operator==(const ActionsCfg&) const = default;
  } actions;

  struct SensorCfg {
    double noise_sigma = 0.01;
    bool operator==(const SensorCfg&) const = default;
  } sensor;

  struct OccupancyCfg {
    double resolution = 0.05;
    double miss_truncation = 0.95;
    int frontier_min_size = 5;
    bool operator==(const OccupancyCfg&) const = default;
  } occupancy;

  struct MappingCfg {
    int seed_per_cell = 20;
    int surface_per_cell = 2;
    int max_splats = 8000;
    double scale_seed_min_m = 0.01;
    double scale_seed_max_m = 0.20;
    int optimize_iterations = 60;
    int optimize_every = 1;
    int keyframe_every = 5;
    double keyframe_depth_change = 0.2;
    double lr_mean = 2e-4;
    double lr_color = 5e-2;
    double lr_theta = 2e-3;
    double lr_log_scales = 2e-3;
    double lr_opacity = 1e-1;
    bool operator==(const MappingCfg&) const = default;
  } mapping;

  struct FisherCfg {
    double lambda = 1e-6;
    int mc_poses = 32;
    bool operator==(const FisherCfg&) const = default;
  } fisher;

  struct TrackingCfg {
    int max_iters = 30;
    bool operator==(const TrackingCfg&) const = default;
  } tracking;

  struct PlannerCfg {
    int jump_cells = 3;
    double robot_radius_cells = 1.5;
    double replan_inflate_cells = 2.0;
    int candidate_count = 12;
    int candidate_keep = 5;
    double annulus_min_m = 0.3;
    double annulus_max_m = 1.0;
    double eta = 5.0;
    double scoring_stride_m = 0.25;
    double turn_threshold_deg = 5.0;
    bool operator==(const PlannerCfg&) const = default;
  } planner;

  struct LlmCfg {
    std::string endpoint;
    std::string model = "gpt-4o";
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_s = 30.0;
    std::string fixture_path;
    int max_retries = 2;
    int period_steps = 100;
    bool operator==(const LlmCfg&) const = default;
  } llm;

  struct RenderCfg {
    double depth_weight = 0.5;
    bool operator==(const RenderCfg&) const = default;
  } render;

  struct EvalCfg {
    int positions = 200;
    int metrics_every = 50;
    bool operator==(const EvalCfg&) const = default;
  } eval;

  struct AblationCfg {
    bool use_localization_cost = true;
    bool use_llm = true;
    bool fbe = false;
    bool operator==(const AblationCfg&) const = default;
  } ablation;

  struct BirdseyeCfg {
    double px_per_m = 50.0;
    double margin_m = 0.5;
    bool operator==(const BirdseyeCfg&) const = default;
  } birdseye;

  bool operator==(const EpisodeConfig&) const = default;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0)) throw std::runtime_error(std::string("config: '") + name + "' must be positive");
    };
    positive(total_steps + 1, "total_steps");  // zero steps is a legal smoke case
    if (total_steps < 0) throw std::runtime_error("config: 'total_steps' must be >= 0");
    positive(camera.width, "camera.width");
    positive(camera.fov_deg, "camera.fov_deg");
    positive(camera.max_depth, "camera.max_depth");
    positive(actions.forward_m, "actions.forward_m");
    positive(actions.turn_deg, "actions.turn_deg");
    if (sensor.noise_sigma < 0) throw std::runtime_error("config: 'sensor.noise_sigma' must be >= 0");
    positive(occupancy.resolution, "occupancy.resolution");
    positive(mapping.max_splats, "mapping.max_splats");
    if (mapping.surface_per_cell < 0) {
      throw std::runtime_error("config: 'mapping.surface_per_cell' must be >= 0");
    }
    positive(fisher.lambda, "fisher.lambda");
    if (fisher.mc_poses < 0) throw std::runtime_error("config: 'fisher.mc_poses' must be >= 0");
    positive(planner.jump_cells, "planner.jump_cells");
    positive(planner.annulus_max_m - planner.annulus_min_m, "planner.annulus_max_m - annulus_min_m");
    positive(eval.positions, "eval.positions");
    positive(eval.metrics_every, "eval.metrics_every");
    positive(birdseye.px_per_m, "birdseye.px_per_m");
  }

  // Adapters into the module parameter structs.
  Camera1D make_camera() const {
    Camera1D cam;
    cam.width = camera.width;
    cam.fov_rad = camera.fov_deg * kPi / 180.0;
    cam.max_depth = camera.max_depth;
    return cam;
  }
  RenderParams render_params() const {
    RenderParams rp;
    rp.depth_weight = render.depth_weight;
    return rp;
  }
  SeedParams seed_params() const {
    SeedParams sp;
    sp.per_cell = mapping.seed_per_cell;
    sp.surface_per_cell = mapping.surface_per_cell;
    sp.max_splats = mapping.max_splats;
    sp.scale_seed_min_m = mapping.scale_seed_min_m;
    sp.scale_seed_max_m = mapping.scale_seed_max_m;
    return sp;
  }
  MapOptimOptions optim_options() const {
    MapOptimOptions o;
    o.iterations = mapping.optimize_iterations;
    o.lr_mean = mapping.lr_mean;
    o.lr_color = mapping.lr_color;
    o.lr_theta = mapping.lr_theta;
    o.lr_log_scales = mapping.lr_log_scales;
    o.lr_opacity = mapping.lr_opacity;
    return o;
  }
  TrackOptions track_options() const {
    TrackOptions t;
    t.max_iters = tracking.max_iters;
    return t;
  }
  IntegrateParams integrate_params() const {
    IntegrateParams ip;
    ip.miss_truncation = occupancy.miss_truncation;
    return ip;
  }
  PlannerGridParams planner_grid_params() const {
    PlannerGridParams pp;
    pp.jump = planner.jump_cells;
    pp.robot_radius_cells = planner.robot_radius_cells;
    return pp;
  }
  CandidateParams candidate_params() const {
    CandidateParams cp;
    cp.count = planner.candidate_count;
    cp.keep_top = planner.candidate_keep;
    cp.annulus_min_m = planner.annulus_min_m;
    cp.annulus_max_m = planner.annulus_max_m;
    cp.robot_radius_cells = planner.robot_radius_cells;
    return cp;
  }
  SelectParams select_params() const {
    SelectParams sp;
    sp.eta = planner.eta;
    sp.stride_m = planner.scoring_stride_m;
    sp.use_localization_cost = ablation.use_localization_cost;
    return sp;
  }
  FollowParams follow_params() const {
    FollowParams fp;
    fp.waypoint_tol_m = 0.5 * occupancy.resolution;
    fp.turn_threshold_rad = planner.turn_threshold_deg * kPi / 180.0;
    return fp;
  }
  ReplanParams replan_params() const {
    ReplanParams rp;
    rp.inflate_cells = planner.replan_inflate_cells;
    rp.robot_radius_cells = planner.robot_radius_cells;
    return rp;
  }
  LlmClientConfig llm_client_config() const {
    LlmClientConfig c;
    c.endpoint = llm.endpoint;
    c.model = llm.model;
    c.api_key_env = llm.api_key_env;
    c.timeout_s = llm.timeout_s;
    c.fixture_path = llm.fixture_path;
    c.max_retries = llm.max_retries;
    return c;
  }
  double turn_rad() const { return actions.turn_deg * kPi / 180.0; }
};

inline nlohmann::json config_to_json(const EpisodeConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["world"] = c.world;
  j["total_steps"] = c.total_steps;
  j["camera"] = {{"width", c.camera.width},
                 {"fov_deg", c.camera.fov_deg},
                 {"max_depth", c.camera.max_depth}};
  j["actions"] = {{"forward_m", c.actions.forward_m}, {"turn_deg", c.actions.turn_deg}};
  j["sensor"] = {{"noise_sigma", c.sensor.noise_sigma}};
  j["occupancy"] = {{"resolution", c.occupancy.resolution},
                    {"miss_truncation", c.occupancy.miss_truncation},
                    {"frontier_min_size", c.occupancy.frontier_min_size}};
  j["mapping"] = {{"seed_per_cell", c.mapping.seed_per_cell},
                  {"surface_per_cell", c.mapping.surface_per_cell},
                  {"max_splats", c.mapping.max_splats},
                  {"scale_seed_min_m", c.mapping.scale_seed_min_m},
                  {"scale_seed_max_m", c.mapping.scale_seed_max_m},
                  {"optimize_iterations", c.mapping.optimize_iterations},
                  {"optimize_every", c.mapping.optimize_every},
                  {"keyframe_every", c.mapping.keyframe_every},
                  {"keyframe_depth_change", c.mapping.keyframe_depth_change},
                  {"lr_mean", c.mapping.lr_mean},
                  {"lr_color", c.mapping.lr_color},
                  {"lr_theta", c.mapping.lr_theta},
                  {"lr_log_scales", c.mapping.lr_log_scales},
                  {"lr_opacity", c.mapping.lr_opacity}};
  j["fisher"] = {{"lambda", c.fisher.lambda}, {"mc_poses", c.fisher.mc_poses}};
  j["tracking"] = {{"max_iters", c.tracking.max_iters}};
  j["planner"] = {{"jump_cells", c.planner.jump_cells},
                  {"robot_radius_cells", c.planner.robot_radius_cells},
                  {"replan_inflate_cells", c.planner.replan_inflate_cells},
                  {"candidate_count", c.planner.candidate_count},
                  {"candidate_keep", c.planner.candidate_keep},
                  {"annulus_min_m", c.planner.annulus_min_m},
                  {"annulus_max_m", c.planner.annulus_max_m},
                  {"eta", c.planner.eta},
                  {"scoring_stride_m", c.planner.scoring_stride_m},
                  {"turn_threshold_deg", c.planner.turn_threshold_deg}};
  j["llm"] = {{"endpoint", c.llm.endpoint},
              {"model", c.llm.model},
              {"api_key_env", c.llm.api_key_env},
              {"timeout_s", c.llm.timeout_s},
              {"fixture_path", c.llm.fixture_path},
              {"max_retries", c.llm.max_retries},
              {"period_steps", c.llm.period_steps}};
  j["render"] = {{"depth_weight", c.render.depth_weight}};
  j["eval"] = {{"positions", c.eval.positions}, {"metrics_every", c.eval.metrics_every}};
  j["ablation"] = {{"use_localization_cost", c.ablation.use_localization_cost},
                   {"use_llm", c.ablation.use_llm},
                   {"fbe", c.ablation.fbe}};
  j["birdseye"] = {{"px_per_m", c.birdseye.px_per_m}, {"margin_m", c.birdseye.margin_m}};
  return j;
}

inline EpisodeConfig config_from_json(const nlohmann::json& j) {
  EpisodeConfig c;
  detail::StrictObject root(j, "");
  if (!root.has("seed")) throw std::runtime_error("config: 'seed' is mandatory");
  root.get("seed", c.seed);
  root.get("world", c.world);
  root.get("total_steps", c.total_steps);
  {
    detail::StrictObject s(root.take_object("camera"), "camera");
    s.get("width", c.camera.width);
    s.get("fov_deg", c.camera.fov_deg);
    s.get("max_depth", c.camera.max_depth);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("actions"), "actions");
    s.get("forward_m", c.actions.forward_m);
    s.get("turn_deg", c.actions.turn_deg);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("sensor"), "sensor");
    s.get("noise_sigma", c.sensor.noise_sigma);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("occupancy"), "occupancy");
    s.get("resolution", c.occupancy.resolution);
    s.get("miss_truncation", c.occupancy.miss_truncation);
    s.get("frontier_min_size", c.occupancy.frontier_min_size);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("mapping"), "mapping");
    s.get("seed_per_cell", c.mapping.seed_per_cell);
    s.get("surface_per_cell", c.mapping.surface_per_cell);
    s.get("max_splats", c.mapping.max_splats);
    s.get("scale_seed_min_m", c.mapping.scale_seed_min_m);
    s.get("scale_seed_max_m", c.mapping.scale_seed_max_m);
    s.get("optimize_iterations", c.mapping.optimize_iterations);
    s.get("optimize_every", c.mapping.optimize_every);
    s.get("keyframe_every", c.mapping.keyframe_every);
    s.get("keyframe_depth_change", c.mapping.keyframe_depth_change);
    s.get("lr_mean", c.mapping.lr_mean);
    s.get("lr_color", c.mapping.lr_color);
    s.get("lr_theta", c.mapping.lr_theta);
    s.get("lr_log_scales", c.mapping.lr_log_scales);
    s.get("lr_opacity", c.mapping.lr_opacity);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("fisher"), "fisher");
    s.get("lambda", c.fisher.lambda);
    s.get("mc_poses", c.fisher.mc_poses);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("tracking"), "tracking");
    s.get("max_iters", c.tracking.max_iters);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("planner"), "planner");
    s.get("jump_cells", c.planner.jump_cells);
    s.get("robot_radius_cells", c.planner.robot_radius_cells);
    s.get("replan_inflate_cells", c.planner.replan_inflate_cells);
    s.get("candidate_count", c.planner.candidate_count);
    s.get("candidate_keep", c.planner.candidate_keep);
    s.get("annulus_min_m", c.planner.annulus_min_m);
    s.get("annulus_max_m", c.planner.annulus_max_m);
    s.get("eta", c.planner.eta);
    s.get("scoring_stride_m", c.planner.scoring_stride_m);
    s.get("turn_threshold_deg", c.planner.turn_threshold_deg);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("llm"), "llm");
    s.get("endpoint", c.llm.endpoint);
    s.get("model", c.llm.model);
    s.get("api_key_env", c.llm.api_key_env);
    s.get("timeout_s", c.llm.timeout_s);
    s.get("fixture_path", c.llm.fixture_path);
    s.get("max_retries", c.llm.max_retries);
    s.get("period_steps", c.llm.period_steps);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("render"), "render");
    s.get("depth_weight", c.render.depth_weight);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("eval"), "eval");
    s.get("positions", c.eval.positions);
    s.get("metrics_every", c.eval.metrics_every);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("ablation"), "ablation");
    s.get("use_localization_cost", c.ablation.use_localization_cost);
    s.get("use_llm", c.ablation.use_llm);
    s.get("fbe", c.ablation.fbe);
    s.finish();
  }
  {
    detail::StrictObject s(root.take_object("birdseye"), "birdseye");
    s.get("px_per_m", c.birdseye.px_per_m);
    s.get("margin_m", c.birdseye.margin_m);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

inline EpisodeConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const std::string& path, const EpisodeConfig& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << config_to_json(c).dump(2) << '\n';
}

}  // namespace activemap
