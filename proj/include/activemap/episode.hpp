#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "activemap/config.hpp"
#include "activemap/llm.hpp"
#include "activemap/mapping.hpp"
#include "activemap/metrics.hpp"
#include "activemap/occupancy.hpp"
#include "activemap/planner.hpp"
#include "activemap/tracking.hpp"
#include "activemap/world.hpp"

namespace activemap {

// State at perception time of one step plus the action taken at its end.
struct StepRecord {
  int step = 0;
  Action action = Action::TurnLeft;
  bool acted = false;  // false only for the bare initial-state record
  bool blocked = false;
  bool diverged = false;
  double residual = 0.0;
  Pose2 gt;
  Pose2 est;
};

struct PlannerRoundRecord {
  int step = 0;
  int round = 0;
  int path_index = 0;
  int candidate_index = -1;
  double eig_total = 0.0;
  double localization_total = 0.0;
  double objective = 0.0;
  int poses_scored = 0;
  bool degenerate = false;
  bool chosen = false;
};

struct LlmRoundRecord {
  int round = 0;
  int step = 0;
  int frontier_count = 0;
  int target = -1;
  std::string source;
  std::string reason;
  std::string response;
  std::string prompt_system;
  std::string prompt_user;
};

struct EpisodeReport {
  EpisodeConfig config;
  std::string world_name;
  std::vector<StepRecord> steps;
  std::vector<MetricsRow> metrics;
  std::vector<PlannerRoundRecord> planner_rounds;
  std::vector<LlmRoundRecord> llm_rounds;
  std::vector<std::string> errors;  // module failures survived mid-episode
  SplatMap map;
  OccupancyGrid grid{0.05};
  Image birdseye;
  int collisions = 0;

  std::vector<Pose2> gt_trajectory() const {
    std::vector<Pose2> out;
    out.reserve(steps.size());
    for (const StepRecord& r : steps) out.push_back(r.gt);
    return out;
  }
  std::vector<Pose2> est_trajectory() const {
    std::vector<Pose2> out;
    out.reserve(steps.size());
    for (const StepRecord& r : steps) out.push_back(r.est);
    return out;
  }
};

namespace detail {

// Poses for the Monte-Carlo model information: uniform over the Free cells
// discovered so far, uniform headings.
inline std::vector<Pose2> mc_sample_poses(const OccupancyGrid& grid, int n, Rng& rng) {
  std::vector<Pose2> out;
  const std::vector<CellIndex> free_cells = grid.cells_in_state(CellState::Free);
  if (free_cells.empty() || n <= 0) return out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const CellIndex c =
        free_cells[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(free_cells.size()) - 1))];
    out.emplace_back(grid.cell_center(c), uniform(rng, -kPi, kPi));
  }
  return out;
}

// Top-down frame covering the explored window; before anything is mapped it
// falls back to a square around the robot.
inline BirdseyeFrame birdseye_frame(const OccupancyGrid& grid, const Pose2& robot,
                                    double px_per_m, double margin_m) {
  BirdseyeFrame frame;
  frame.px_per_m = px_per_m;
  if (grid.width() == 0) {
    frame.world_min = robot.translation() - Eigen::Vector2d(1.0, 1.0);
    frame.world_max = robot.translation() + Eigen::Vector2d(1.0, 1.0);
    return frame;
  }
  const CellIndex o = grid.window_origin();
  const double res = grid.resolution();
  frame.world_min = Eigen::Vector2d(o.x * res, o.y * res) - Eigen::Vector2d(margin_m, margin_m);
  frame.world_max = Eigen::Vector2d((o.x + grid.width()) * res, (o.y + grid.height()) * res) +
                    Eigen::Vector2d(margin_m, margin_m);
  return frame;
}

inline Pose2 action_delta(Action a, double forward_m, double turn_rad) {
  switch (a) {
    case Action::Forward:
      return Pose2(forward_m, 0.0, 0.0);
    case Action::TurnLeft:
      return Pose2(0.0, 0.0, turn_rad);
    case Action::TurnRight:
      return Pose2(0.0, 0.0, -turn_rad);
  }
  return Pose2();
}

// Deletes hypotheses whose cells the grid has classified. A randomly
// initialized splat is a stand-in for whatever might be there; once the
// sensor has looked, the measurement-driven surface seeding represents what
// actually is. Folding the random splats into the reconstruction instead
// reassembles an opaque screen of mutually occluding noise whose members
// give each other near-zero gradients, which gradient descent can repaint
// but never disperse.
inline void prune_observed(SplatMap& speculative, const OccupancyGrid& grid) {
  const auto it = std::remove_if(
      speculative.splats.begin(), speculative.splats.end(), [&](const Splat2D& s) {
        return grid.at(grid.world_to_cell(s.mean)) != CellState::Unknown;
      });
  speculative.splats.erase(it, speculative.splats.end());
}

inline SplatMap concat_maps(const SplatMap& a, const SplatMap& b) {
  SplatMap out = a;
  out.splats.insert(out.splats.end(), b.splats.begin(), b.splats.end());
  return out;
}

// Rays that crossed a cell are direct evidence it is empty, so splats
// stranded in interior Free cells are deleted outright instead of waiting
// for the photometric optimizer to starve them (mutually occluding floaters
// at a common depth give each other near-zero gradients and can settle into
// a stable screen painted with the observation). The 8-neighbor test spares
// splats straddling a wall surface. Returns the number removed.
inline int carve_free_splats(SplatMap& map, const OccupancyGrid& grid) {
  const auto interior_free = [&](const CellIndex& c) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (grid.at({c.x + dx, c.y + dy}) != CellState::Free) return false;
      }
    }
    return true;
  };
  const auto it = std::remove_if(
      map.splats.begin(), map.splats.end(),
      [&](const Splat2D& s) { return interior_free(grid.world_to_cell(s.mean)); });
  const int removed = static_cast<int>(map.splats.end() - it);
  map.splats.erase(it, map.splats.end());
  return removed;
}

// Fraction of the image the map explains at a pose: mean blend-weight mass
// (1 - transmittance averaged over pixels).
inline double render_coverage(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                              const RenderParams& rp) {
  const BlendAudit audit = blend_audit(map, pose, cam, rp);
  if (audit.weight_sum.empty()) return 0.0;
  double sum = 0.0;
  for (const double w : audit.weight_sum) sum += w;
  return sum / static_cast<double>(audit.weight_sum.size());
}

}  // namespace detail

// Below this coverage the photometric landscape is mostly background-vs-wall
// mismatch with almost no usable gradient; the dead-reckoned prediction is
// more trustworthy than a fit against it.
inline constexpr double kMinTrackCoverage = 0.25;

// Innovation gate on the tracked correction. Actuation is exact, so the
// prediction can only be off by a blocked forward step (one step length)
// plus noise-scale alignment error; corrections beyond a few step lengths
// are always a fit against unconverged map regions, never real motion.
inline constexpr double kMaxCorrectionSteps = 3.0;

// Runs the full explore-track-map-plan loop: sense, track against the
// learned map, integrate the scan, refine the map, replan when the current
// plan is exhausted, unsafe, or lost, and step. Ground truth is read only
// by the simulator and the metrics rows; every other consumer sees the
// estimated pose. Module failures are recorded and answered with a replan;
// the episode itself never aborts.
inline EpisodeReport run_episode(const World& world, const EpisodeConfig& cfg) {
  cfg.validate();
  EpisodeReport report;
  report.config = cfg;
  report.world_name = world.name;
  report.grid = OccupancyGrid(cfg.occupancy.resolution);

  const Camera1D cam = cfg.make_camera();
  const RenderParams rp = cfg.render_params();
  const SeedParams seed_params = cfg.seed_params();
  const MapOptimOptions optim = cfg.optim_options();
  const TrackOptions track_opt = cfg.track_options();
  const IntegrateParams integ = cfg.integrate_params();
  const PlannerGridParams grid_params = cfg.planner_grid_params();
  const CandidateParams cand_params = cfg.candidate_params();
  const SelectParams select_opts = cfg.select_params();
  const FollowParams follow = cfg.follow_params();
  const ReplanParams replan_opts = cfg.replan_params();
  const LlmClientConfig llm_cfg = cfg.llm_client_config();
  const double forward_m = cfg.actions.forward_m;
  const double turn_rad = cfg.turn_rad();

  Rng sense_rng = make_rng(cfg.seed, 0x5E52Eull);
  Rng seed_rng = make_rng(cfg.seed, 0x5EEDull);
  Rng cand_rng = make_rng(cfg.seed, 0xCA2Dull);
  Rng mc_rng = make_rng(cfg.seed, 0xF15Eull);
  Rng optim_rng = make_rng(cfg.seed, 0x09717ull);
  Rng eval_rng = make_rng(cfg.seed, 0xEA1ull);

  // Ground-truth evaluation set, fixed for the whole episode.
  const std::vector<Eigen::Vector2d> gt_free =
      reachable_free_centers(world, cfg.occupancy.resolution);
  const std::vector<Pose2> eval_poses =
      sample_eval_poses(world, cfg.occupancy.resolution, cfg.eval.positions, eval_rng);

  // Two splat populations: the reconstruction carries everything the sensor
  // has confirmed and is what tracking, refinement, and quality metrics see;
  // the speculative set carries frontier hypotheses in Unknown space and
  // exists purely for expected-information estimates. integrate_scan
  // promotes hypotheses as their cells become observed.
  SplatMap recon;
  SplatMap speculative;
  OccupancyGrid& grid = report.grid;
  std::vector<Keyframe> keyframes;
  std::set<CellIndex> seeded;
  std::set<CellIndex> surface_populated;
  const auto remaining_budget = [&](const SplatMap& other) {
    SeedParams sp = seed_params;
    sp.max_splats = std::max(0, cfg.mapping.max_splats - static_cast<int>(other.size()));
    return sp;
  };

  Pose2 gt = world.start;
  Pose2 est = world.start;  // map frame anchored at the start pose
  Action prev_action = Action::Forward;
  bool have_prev_action = false;
  bool prev_blocked = false;

  std::optional<PlannedPath> plan;
  size_t next_wp = 0;
  std::optional<Eigen::Vector2d> target;
  std::vector<Eigen::Vector2d> visited{est.translation()};
  int plan_round = 0;
  int llm_round = 0;
  int last_longterm_step = -cfg.llm.period_steps;

  const auto emit_metrics = [&](int step, const std::vector<Pose2>& est_traj,
                                const std::vector<Pose2>& gt_traj) {
    MetricsRow row;
    row.step = step;
    const EvalResult ev = evaluate_render_quality(recon, world, eval_poses, cam, rp);
    row.psnr_mean = ev.psnr_mean;
    row.depth_mae = ev.depth_mae_mean;
    row.ate = est_traj.empty() ? 0.0 : rmse_ate(est_traj, gt_traj);
    row.completeness = grid.width() == 0 ? 0.0 : completeness(grid, gt_free);
    report.metrics.push_back(row);
  };

  const auto planning_round = [&](int step, bool want_longterm) {
    plan.reset();
    next_wp = 0;

    const std::vector<Frontier> frontiers =
        extract_frontiers(grid, cfg.occupancy.frontier_min_size);
    std::vector<CellIndex> fresh_cells;
    for (const Frontier& f : frontiers) {
      for (const CellIndex& c : f.cells) {
        if (seeded.insert(c).second) fresh_cells.push_back(c);
      }
    }
    seed_frontier_splats(speculative, fresh_cells, grid, remaining_budget(recon), seed_rng);

    // Model information after seeding, so fresh splats register as unknown.
    const SplatMap full = detail::concat_maps(recon, speculative);
    FisherDiag model;
    SplatMap no_map;
    const bool fbe = cfg.ablation.fbe;
    const SplatMap& score_map = fbe ? no_map : full;
    if (!fbe) {
      const std::vector<Pose2> mc = detail::mc_sample_poses(grid, cfg.fisher.mc_poses, mc_rng);
      model = mc_model_fisher(full, mc, cam, cfg.fisher.lambda, rp);
    }

    if (fbe) {
      // Pure frontier exploration: nearest frontier, no information terms.
      target.reset();
      double best = std::numeric_limits<double>::infinity();
      for (const Frontier& f : frontiers) {
        const double d = (f.centroid - est.translation()).norm();
        if (d < best) {
          best = d;
          target = f.centroid;
        }
      }
    } else if (want_longterm) {
      last_longterm_step = step;
      const std::optional<Eigen::Vector2d> previous_goal = target;
      LlmDecision decision;
      if (frontiers.empty()) {
        decision.target = -1;  // no prompt to build; refine what exists
      } else if (!cfg.ablation.use_llm) {
        decision.target = 0;  // frontiers are size-sorted: 0 is the largest
      } else {
        std::vector<Eigen::Vector2d> centroids;
        for (const Frontier& f : frontiers) centroids.push_back(f.centroid);
        const BirdseyeFrame frame =
            detail::birdseye_frame(grid, est, cfg.birdseye.px_per_m, cfg.birdseye.margin_m);
        Image annotated =
            annotate_birdseye(render_birdseye(full, frame, Eigen::Vector3d(1, 1, 1), rp), frame,
                              est, visited, previous_goal, centroids);
        PlanningContext ctx;
        ctx.birdseye = std::move(annotated);
        ctx.total_steps = cfg.total_steps;
        ctx.current_step = step;
        ctx.frontier_count = static_cast<int>(frontiers.size());
        const BuiltPrompt prompt = build_prompt(ctx);
        const QueryResult qr = query_llm(prompt, llm_cfg, llm_round);
        decision = parse_decision(qr.ok ? qr.text : "", ctx.frontier_count, qr.source);
        if (!qr.ok) decision.reason = qr.error;

        LlmRoundRecord log;
        log.round = llm_round;
        log.step = step;
        log.frontier_count = ctx.frontier_count;
        log.target = decision.target;
        log.source = decision_source_name(decision.source);
        log.reason = decision.reason;
        log.response = qr.text;
        log.prompt_system = prompt.system_text;
        log.prompt_user = prompt.user_text;
        report.llm_rounds.push_back(std::move(log));
        ++llm_round;
      }
      if (decision.target >= 0 && decision.target < static_cast<int>(frontiers.size())) {
        target = frontiers[static_cast<size_t>(decision.target)].centroid;
      } else {
        target = refinement_target(full, model);
      }
    }

    std::vector<PoseCandidate> cands =
        sample_candidates(target, grid, score_map, cam, model, cand_params, cand_rng, rp);

    std::vector<PlannedPath> paths;
    const CellIndex start_cell = grid.world_to_cell(est.translation());
    for (size_t i = 0; i < cands.size(); ++i) {
      const CellIndex goal_cell = grid.world_to_cell(cands[i].pose.translation());
      if (auto cp = astar(grid, start_cell, goal_cell, grid_params)) {
        PlannedPath p = build_path(grid, *cp, cands[i].pose, grid_params.robot_radius_cells);
        p.candidate_index = static_cast<int>(i);
        paths.push_back(std::move(p));
      }
    }

    int chosen = -1;
    std::vector<PathScore> scores(paths.size());
    if (!paths.empty()) {
      if (fbe) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t p = 0; p < paths.size(); ++p) {
          scores[p].objective = paths[p].cell_cost;
          if (paths[p].cell_cost < best) {
            best = paths[p].cell_cost;
            chosen = static_cast<int>(p);
          }
        }
      } else {
        chosen = select_path(paths, full, cam, model, select_opts, &scores, rp, &recon);
      }
    }
    for (size_t p = 0; p < paths.size(); ++p) {
      PlannerRoundRecord row;
      row.step = step;
      row.round = plan_round;
      row.path_index = static_cast<int>(p);
      row.candidate_index = paths[p].candidate_index;
      row.eig_total = scores[p].eig_total;
      row.localization_total = scores[p].localization_total;
      row.objective = scores[p].objective;
      row.poses_scored = scores[p].poses_scored;
      row.degenerate = scores[p].degenerate;
      row.chosen = static_cast<int>(p) == chosen;
      report.planner_rounds.push_back(row);
    }
    ++plan_round;
    if (chosen >= 0) plan = std::move(paths[static_cast<size_t>(chosen)]);
  };

  for (int s = 0; s < cfg.total_steps; ++s) {
    const Observation obs =
        sense(world, gt, cam, cfg.sensor.noise_sigma, cfg.sensor.noise_sigma > 0 ? &sense_rng : nullptr);

    // Track from the dead-reckoned prediction. A blocked step leaves the
    // robot in place (bump feedback), so the prediction skips composing the
    // commanded motion.
    Pose2 warm = est;
    if (have_prev_action && !prev_blocked) {
      warm = est * detail::action_delta(prev_action, forward_m, turn_rad);
    }
    TrackResult tracked;
    tracked.pose = warm;
    try {
      if (recon.size() > 0 && detail::render_coverage(recon, warm, cam, rp) >= kMinTrackCoverage) {
        const TrackResult fit = track(recon, warm, obs, cam, track_opt, rp);
        const Pose2 correction = warm.inverse() * fit.pose;
        if (correction.translation().norm() <= kMaxCorrectionSteps * forward_m &&
            std::abs(correction.theta()) <= kMaxCorrectionSteps * turn_rad) {
          tracked = fit;
        } else {
          tracked.final_cost = fit.initial_cost;  // correction rejected, prediction kept
        }
      }
      integrate_scan(grid, tracked.pose, obs, cam, integ);
      detail::prune_observed(speculative, grid);
      detail::carve_free_splats(recon, grid);
      // Seed every scan so a wall sliver first swept mid-interval constrains
      // the very next fit instead of waiting for a keyframe. During the one
      // step it stays bare the tracker's robust kernel caps its pull. The
      // per-cell ledger bounds total growth by observed surface area.
      seed_surface_splats(recon, tracked.pose, cam, obs, grid, surface_populated,
                          remaining_budget(speculative), seed_rng);
      const double md = mean_depth(obs);
      const bool depth_jump = !keyframes.empty() &&
                              std::abs(md - keyframes.back().mean_depth) >
                                  cfg.mapping.keyframe_depth_change * keyframes.back().mean_depth;
      if (s % cfg.mapping.keyframe_every == 0 || depth_jump) {
        keyframes.push_back(Keyframe{tracked.pose, obs, s, md});
      }
      if (s % cfg.mapping.optimize_every == 0) {
        optimize_map(recon, keyframes, cam, optim, optim_rng, rp);
      }
    } catch (const std::exception& e) {
      report.errors.push_back("step " + std::to_string(s) + " perception: " + e.what());
      tracked.pose = warm;
      tracked.diverged = true;
    }
    est = tracked.pose;
    visited.push_back(est.translation());

    if (s % cfg.eval.metrics_every == 0) {
      std::vector<Pose2> est_traj = report.est_trajectory();
      std::vector<Pose2> gt_traj = report.gt_trajectory();
      est_traj.push_back(est);
      gt_traj.push_back(gt);
      emit_metrics(s, est_traj, gt_traj);
    }

    std::optional<Action> next_action;
    if (plan) {
      size_t peek = next_wp;
      next_action = greedy_follow(plan->waypoints, peek, est, follow);
    }
    const bool exhausted = plan && !next_action;
    const bool periodic = s - last_longterm_step >= cfg.llm.period_steps;
    if (should_replan(grid, est, next_action, forward_m, tracked.diverged, replan_opts) ||
        periodic) {
      try {
        planning_round(s, exhausted || periodic);
      } catch (const std::exception& e) {
        report.errors.push_back("step " + std::to_string(s) + " planning: " + e.what());
        plan.reset();
      }
    }

    std::optional<Action> act;
    if (plan) act = greedy_follow(plan->waypoints, next_wp, est, follow);
    const Action action = act.value_or(Action::TurnLeft);

    StepRecord rec;
    rec.step = s;
    rec.action = action;
    rec.acted = true;
    rec.diverged = tracked.diverged;
    rec.residual = tracked.final_cost;
    rec.gt = gt;
    rec.est = est;

    const StepResult sr = step_action(world, gt, action, forward_m, turn_rad);
    rec.blocked = sr.blocked;
    report.collisions += sr.blocked;
    gt = sr.pose;
    prev_action = action;
    have_prev_action = true;
    prev_blocked = sr.blocked;
    report.steps.push_back(rec);
  }

  if (cfg.total_steps == 0) {
    StepRecord rec;
    rec.step = 0;
    rec.gt = gt;
    rec.est = est;
    report.steps.push_back(rec);
  }
  emit_metrics(cfg.total_steps, report.est_trajectory(), report.gt_trajectory());

  report.map = detail::concat_maps(recon, speculative);
  const BirdseyeFrame frame =
      detail::birdseye_frame(grid, est, cfg.birdseye.px_per_m, cfg.birdseye.margin_m);
  std::vector<Eigen::Vector2d> centroids;
  for (const Frontier& f : extract_frontiers(grid, cfg.occupancy.frontier_min_size)) {
    centroids.push_back(f.centroid);
  }
  report.birdseye =
      annotate_birdseye(render_birdseye(report.map, frame, Eigen::Vector3d(1, 1, 1), rp), frame,
                        est, visited, target, centroids);
  return report;
}

// Serialized trajectory log; replay compares these bytes for exactness.
inline std::string trajectory_json_string(const EpisodeReport& report) {
  nlohmann::json j;
  j["world"] = report.world_name;
  j["seed"] = report.config.seed;
  j["collisions"] = report.collisions;
  nlohmann::json rows = nlohmann::json::array();
  for (const StepRecord& r : report.steps) {
    nlohmann::json row;
    row["step"] = r.step;
    row["action"] = r.acted ? action_name(r.action) : "none";
    row["blocked"] = r.blocked;
    row["diverged"] = r.diverged;
    row["residual"] = r.residual;
    row["gt"] = {r.gt.x(), r.gt.y(), r.gt.theta()};
    row["est"] = {r.est.x(), r.est.y(), r.est.theta()};
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

inline void write_planner_rounds_csv(const std::string& path,
                                     const std::vector<PlannerRoundRecord>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_planner_rounds_csv: cannot open " + path);
  out << "step,round,path_index,candidate_index,eig_total,localization_total,objective,"
         "poses_scored,degenerate,chosen\n";
  for (const PlannerRoundRecord& r : rows) {
    out << r.step << ',' << r.round << ',' << r.path_index << ',' << r.candidate_index << ','
        << detail::csv_num(r.eig_total) << ',' << detail::csv_num(r.localization_total) << ','
        << detail::csv_num(r.objective) << ',' << r.poses_scored << ',' << int(r.degenerate)
        << ',' << int(r.chosen) << '\n';
  }
}

inline void write_llm_log(const std::string& path, const std::vector<LlmRoundRecord>& rounds) {
  nlohmann::json j = nlohmann::json::array();
  for (const LlmRoundRecord& r : rounds) {
    nlohmann::json row;
    row["round"] = r.round;
    row["step"] = r.step;
    row["frontier_count"] = r.frontier_count;
    row["target"] = r.target;
    row["source"] = r.source;
    row["reason"] = r.reason;
    row["response"] = r.response;
    row["prompt_system"] = r.prompt_system;
    row["prompt_user"] = r.prompt_user;
    j.push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_llm_log: cannot open " + path);
  out << j.dump(2) << "\n";
}

// Report directory layout: trajectory.json, metrics.csv, planner_rounds.csv,
// llm_log.json, final_map.splat, occupancy.pgm (+ .json georeference),
// birdseye.png, and the resolved config.json used by replay.
inline void write_report(const EpisodeReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto at = [&](const char* name) { return (fs::path(dir) / name).string(); };
  {
    std::ofstream out(at("trajectory.json"));
    if (!out) throw std::runtime_error("write_report: cannot open trajectory.json");
    out << trajectory_json_string(report);
  }
  write_metrics_csv(at("metrics.csv"), report.metrics);
  write_planner_rounds_csv(at("planner_rounds.csv"), report.planner_rounds);
  write_llm_log(at("llm_log.json"), report.llm_rounds);
  save_splat_map(at("final_map.splat"), report.map);
  save_occupancy(at("occupancy.pgm"), at("occupancy.json"), report.grid);
  write_png(at("birdseye.png"), report.birdseye);
  save_config(at("config.json"), report.config);
}

}  // namespace activemap
