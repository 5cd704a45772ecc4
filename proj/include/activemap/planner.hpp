#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "activemap/fisher.hpp"
#include "activemap/occupancy.hpp"
#include "activemap/rng.hpp"
#include "activemap/world.hpp"

namespace activemap {

struct PlannerGridParams {
  int jump = 3;                     // lattice stride in cells
  double robot_radius_cells = 1.5;  // swept-disk half-width
};

namespace detail {

inline std::uint64_t cell_key(const CellIndex& c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
         static_cast<std::uint32_t>(c.y);
}

// Occupied cells within `radius` (cell units) of continuous cell-space
// point q block the robot; Free and Unknown are both traversable.
inline bool disk_free(const OccupancyGrid& grid, const Eigen::Vector2d& q, double radius) {
  const int x0 = static_cast<int>(std::floor(q.x() - radius));
  const int x1 = static_cast<int>(std::ceil(q.x() + radius));
  const int y0 = static_cast<int>(std::floor(q.y() - radius));
  const int y1 = static_cast<int>(std::ceil(q.y() + radius));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Eigen::Vector2d center(x + 0.5, y + 0.5);
      if ((center - q).norm() > radius) continue;
      if (grid.at({x, y}) == CellState::Occupied) return false;
    }
  }
  return true;
}

inline Eigen::Vector2d cell_point(const CellIndex& c) {
  return {c.x + 0.5, c.y + 0.5};
}

}  // namespace detail

// Swept-disk collision test for the straight segment between two cell
// centers, sampled at quarter-cell resolution (endpoints included).
inline bool segment_collision_free(const OccupancyGrid& grid, const CellIndex& a,
                                   const CellIndex& b, double robot_radius_cells) {
  const Eigen::Vector2d pa = detail::cell_point(a), pb = detail::cell_point(b);
  const double len = (pb - pa).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
  for (int i = 0; i <= steps; ++i) {
    const Eigen::Vector2d q = pa + (pb - pa) * (static_cast<double>(i) / steps);
    if (!detail::disk_free(grid, q, robot_radius_cells)) return false;
  }
  return true;
}

struct CellPath {
  std::vector<CellIndex> cells;
  double cost = 0.0;  // summed Euclidean edge lengths, cell units
};

// A* over a coarse jump lattice anchored at the start: moves go jump cells
// in the 8 directions, plus a direct connection to the goal from any node
// within Chebyshev distance jump (every cell is within one connection of
// the lattice, so off-lattice goals stay reachable). Unknown space is
// traversable; only Occupied cells collide. The search is confined to the
// grid window (plus margin) so an unreachable goal terminates.
inline std::optional<CellPath> astar(const OccupancyGrid& grid, const CellIndex& start,
                                     const CellIndex& goal, const PlannerGridParams& pp = {}) {
  if (start == goal) return CellPath{{start}, 0.0};
  if (!detail::disk_free(grid, detail::cell_point(goal), pp.robot_radius_cells)) return std::nullopt;
  if (!detail::disk_free(grid, detail::cell_point(start), pp.robot_radius_cells)) return std::nullopt;

  const CellIndex wo = grid.window_origin();
  const int margin = 2 * pp.jump + 2;
  const int min_x = std::min({wo.x, start.x, goal.x}) - margin;
  const int min_y = std::min({wo.y, start.y, goal.y}) - margin;
  const int max_x = std::max({wo.x + grid.width(), start.x, goal.x}) + margin;
  const int max_y = std::max({wo.y + grid.height(), start.y, goal.y}) + margin;
  auto in_bounds = [&](const CellIndex& c) {
    return c.x >= min_x && c.x <= max_x && c.y >= min_y && c.y <= max_y;
  };

  auto heuristic = [&](const CellIndex& c) {
    return (detail::cell_point(goal) - detail::cell_point(c)).norm();
  };

  struct Node {
    double f, g;
    std::uint64_t key;
    bool operator>(const Node& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g > o.g;
      return key > o.key;
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  std::unordered_map<std::uint64_t, double> g_score;
  std::unordered_map<std::uint64_t, std::uint64_t> parent;

  const std::uint64_t start_key = detail::cell_key(start);
  const std::uint64_t goal_key = detail::cell_key(goal);
  g_score[start_key] = 0.0;
  open.push({heuristic(start), 0.0, start_key});

  auto unpack = [](std::uint64_t k) {
    return CellIndex{static_cast<int>(static_cast<std::int32_t>(k >> 32)),
                     static_cast<int>(static_cast<std::int32_t>(k & 0xffffffffu))};
  };

  while (!open.empty()) {
    const Node top = open.top();
    open.pop();
    const CellIndex cur = unpack(top.key);
    const auto it = g_score.find(top.key);
    if (it == g_score.end() || top.g > it->second) continue;  // stale entry
    if (top.key == goal_key) {
      CellPath path;
      path.cost = top.g;
      std::uint64_t k = goal_key;
      while (true) {
        path.cells.push_back(unpack(k));
        if (k == start_key) break;
        k = parent.at(k);
      }
      std::reverse(path.cells.begin(), path.cells.end());
      return path;
    }

    auto relax = [&](const CellIndex& next) {
      const double step = (detail::cell_point(next) - detail::cell_point(cur)).norm();
      const double ng = top.g + step;
      const std::uint64_t nk = detail::cell_key(next);
      const auto git = g_score.find(nk);
      if (git != g_score.end() && git->second <= ng) return;
      if (!segment_collision_free(grid, cur, next, pp.robot_radius_cells)) return;
      g_score[nk] = ng;
      parent[nk] = top.key;
      open.push({ng + heuristic(next), ng, nk});
    };

    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex next{cur.x + dx * pp.jump, cur.y + dy * pp.jump};
        if (in_bounds(next)) relax(next);
      }
    }
    if (std::max(std::abs(cur.x - goal.x), std::abs(cur.y - goal.y)) <= pp.jump &&
        !(cur == goal)) {
      relax(goal);
    }
  }
  return std::nullopt;
}

// Shortcut smoothing: repeatedly drops the middle waypoint wherever the
// segment two hops ahead is collision free, in one forward chaining pass.
inline std::vector<CellIndex> smooth_path(const OccupancyGrid& grid,
                                          std::vector<CellIndex> cells,
                                          double robot_radius_cells) {
  size_t i = 0;
  while (i + 2 < cells.size()) {
    if (segment_collision_free(grid, cells[i], cells[i + 2], robot_radius_cells)) {
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(i + 1));
    } else {
      ++i;
    }
  }
  return cells;
}

// A planned route: smoothed grid cells plus world-frame waypoints. Each
// waypoint faces its successor; the final waypoint carries the candidate
// observation heading.
struct PlannedPath {
  std::vector<CellIndex> cells;
  std::vector<Pose2> waypoints;
  double cell_cost = 0.0;
  int candidate_index = -1;
};

inline PlannedPath build_path(const OccupancyGrid& grid, const CellPath& cp,
                              const Pose2& goal_pose, double robot_radius_cells) {
  PlannedPath out;
  out.cells = smooth_path(grid, cp.cells, robot_radius_cells);
  out.cell_cost = cp.cost;
  std::vector<Eigen::Vector2d> pts;
  for (const CellIndex& c : out.cells) pts.push_back(grid.cell_center(c));
  if (!pts.empty()) pts.back() = goal_pose.translation();
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i + 1 < pts.size()) {
      const Eigen::Vector2d d = pts[i + 1] - pts[i];
      const double heading = (d.norm() > 1e-12) ? std::atan2(d.y(), d.x()) : goal_pose.theta();
      out.waypoints.emplace_back(pts[i], heading);
    } else {
      out.waypoints.emplace_back(pts[i], goal_pose.theta());
    }
  }
  return out;
}

struct FollowParams {
  double waypoint_tol_m = 0.025;  // half a cell at 5cm resolution
  double turn_threshold_rad = 5.0 * kPi / 180.0;
};

// One greedy control decision. `next` advances past reached waypoints;
// returns nothing when the plan is exhausted. Heading errors strictly
// above the threshold turn toward the target (left for positive bearing),
// otherwise the robot drives forward. At the final waypoint the planned
// observation heading is acquired the same way before the plan ends.
inline std::optional<Action> greedy_follow(const std::vector<Pose2>& waypoints, size_t& next,
                                           const Pose2& current, const FollowParams& fp = {}) {
  while (next < waypoints.size() &&
         (waypoints[next].translation() - current.translation()).norm() < fp.waypoint_tol_m) {
    if (next + 1 == waypoints.size()) {
      // Final waypoint: align to the planned heading before finishing.
      const double err = normalize_angle(waypoints[next].theta() - current.theta());
      if (std::abs(err) > fp.turn_threshold_rad) {
        return err > 0.0 ? Action::TurnLeft : Action::TurnRight;
      }
    }
    ++next;
  }
  if (next >= waypoints.size()) return std::nullopt;
  const Eigen::Vector2d d = waypoints[next].translation() - current.translation();
  const double bearing = normalize_angle(std::atan2(d.y(), d.x()) - current.theta());
  if (bearing > fp.turn_threshold_rad) return Action::TurnLeft;
  if (bearing < -fp.turn_threshold_rad) return Action::TurnRight;
  return Action::Forward;
}

struct PoseCandidate {
  Pose2 pose;
  double eig = 0.0;
};

struct CandidateParams {
  int count = 12;
  int keep_top = 5;  // kept after sorting by gain; 0 keeps all
  double annulus_min_m = 0.3;
  double annulus_max_m = 1.0;
  double robot_radius_cells = 1.5;
  int attempts_per_candidate = 40;
};

namespace detail {

inline std::optional<PoseCandidate> score_if_feasible(const Pose2& pose,
                                                      const OccupancyGrid& grid,
                                                      const SplatMap& map, const Camera1D& cam,
                                                      const FisherDiag& model, double radius_cells,
                                                      const RenderParams& rp) {
  if (grid.state_at(pose.translation()) != CellState::Free) return std::nullopt;
  const Eigen::Vector2d q = pose.translation() / grid.resolution();
  if (!disk_free(grid, q, radius_cells)) return std::nullopt;
  PoseCandidate pc;
  pc.pose = pose;
  pc.eig = expected_information_gain(hessian_diag(map, pose, cam, 0.0, rp), model);
  return pc;
}

}  // namespace detail

// Samples observation candidates. With a target the poses lie in an
// annulus around it, heading at it; if the annulus yields nothing it is
// relaxed once (half the inner, double the outer radius) and finally the
// sampler falls back to target-free mode. Without a target the poses
// spread over the known Free space with random headings. Every pose sits
// on a Free cell with a collision-free footprint and carries its
// single-view gain against `model`; the best `keep_top` by gain are
// returned (ties keep sampling order).
inline std::vector<PoseCandidate> sample_candidates(
    const std::optional<Eigen::Vector2d>& target, const OccupancyGrid& grid, const SplatMap& map,
    const Camera1D& cam, const FisherDiag& model, const CandidateParams& cp, Rng& rng,
    const RenderParams& rp = {}) {
  std::vector<PoseCandidate> out;
  const int max_attempts = cp.count * cp.attempts_per_candidate;

  auto annulus_pass = [&](double rmin, double rmax) {
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < cp.count;
         ++attempt) {
      const double r = uniform(rng, rmin, rmax);
      const double ang = uniform(rng, -kPi, kPi);
      const Eigen::Vector2d pos = *target + r * Eigen::Vector2d(std::cos(ang), std::sin(ang));
      const Eigen::Vector2d to_target = *target - pos;
      const Pose2 pose(pos, std::atan2(to_target.y(), to_target.x()));
      if (auto pc = detail::score_if_feasible(pose, grid, map, cam, model,
                                              cp.robot_radius_cells, rp)) {
        out.push_back(*pc);
      }
    }
  };

  if (target) {
    annulus_pass(cp.annulus_min_m, cp.annulus_max_m);
    if (out.empty()) annulus_pass(0.5 * cp.annulus_min_m, 2.0 * cp.annulus_max_m);
  }
  if (out.empty()) {
    const std::vector<CellIndex> free_cells = grid.cells_in_state(CellState::Free);
    if (!free_cells.empty()) {
      for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < cp.count;
           ++attempt) {
        const CellIndex c = free_cells[static_cast<size_t>(
            uniform_int(rng, 0, static_cast<int>(free_cells.size()) - 1))];
        const Pose2 pose(grid.cell_center(c), uniform(rng, -kPi, kPi));
        if (auto pc = detail::score_if_feasible(pose, grid, map, cam, model,
                                                cp.robot_radius_cells, rp)) {
          out.push_back(*pc);
        }
      }
    }
  }

  if (cp.keep_top > 0 && static_cast<int>(out.size()) > cp.keep_top) {
    std::stable_sort(out.begin(), out.end(),
                     [](const PoseCandidate& a, const PoseCandidate& b) { return a.eig > b.eig; });
    out.resize(static_cast<size_t>(cp.keep_top));
  }
  return out;
}

struct SelectParams {
  double eta = 5.0;
  double stride_m = 0.25;
  double eps_reg = 1e-8;
  double eig_floor = 1e-12;
  bool use_localization_cost = true;
};

struct PathScore {
  double objective = 0.0;
  double eig_total = 0.0;
  double localization_total = 0.0;
  int poses_scored = 0;
  bool degenerate = false;  // some pose had singular information
};

// Waypoints subsampled at arc-length stride for scoring; the final
// waypoint is always kept.
inline std::vector<Pose2> scoring_poses(const std::vector<Pose2>& waypoints, double stride_m) {
  std::vector<Pose2> out;
  double since = 0.0;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if (i > 0) since += (waypoints[i].translation() - waypoints[i - 1].translation()).norm();
    if (since >= stride_m) {
      out.push_back(waypoints[i]);
      since = 0.0;
    }
  }
  if (!waypoints.empty()) out.push_back(waypoints.back());
  return out;
}

// Scores every path with accumulated-information gain along its scoring
// poses, minus eta * log(EIG), plus the per-pose localization cost; the
// winner is the argmin, ties to the lower index. Returns -1 on empty input.
// The gain term reads `map` in full; the localization term reads
// `localization_map` when given, so callers can restrict it to the splats a
// tracker would actually see (speculative frontier splats otherwise make
// unexplored space look perfectly localizable).
inline int select_path(const std::vector<PlannedPath>& paths, const SplatMap& map,
                       const Camera1D& cam, const FisherDiag& model, const SelectParams& sp,
                       std::vector<PathScore>* scores_out = nullptr,
                       const RenderParams& rp = {},
                       const SplatMap* localization_map = nullptr) {
  const SplatMap& loc_map = localization_map ? *localization_map : map;
  int best = -1;
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<PathScore> scores;
  for (size_t p = 0; p < paths.size(); ++p) {
    const std::vector<Pose2> poses = scoring_poses(paths[p].waypoints, sp.stride_m);
    PathScore ps;
    ps.poses_scored = static_cast<int>(poses.size());
    const PathEig pe = path_eig(poses, map, cam, model, rp);
    for (size_t i = 0; i < poses.size(); ++i) {
      ps.eig_total += pe.per_pose[i];
      ps.objective += -sp.eta * std::log(std::max(pe.per_pose[i], sp.eig_floor));
      if (sp.use_localization_cost) {
        const LocalizationCost lc =
            localization_cost(pose_fisher(loc_map, poses[i], cam, rp), sp.eps_reg);
        ps.degenerate = ps.degenerate || lc.degenerate;
        ps.localization_total += lc.value;
        ps.objective += lc.value;
      }
    }
    if (ps.objective < best_obj) {
      best_obj = ps.objective;
      best = static_cast<int>(p);
    }
    scores.push_back(ps);
  }
  if (scores_out) *scores_out = std::move(scores);
  return best;
}

struct ReplanParams {
  double inflate_cells = 2.0;
  double robot_radius_cells = 1.5;
};

// True when the current plan is no longer safe or useful: an Occupied cell
// intrudes into the inflated footprint at the position the next action
// leads to, the plan ran out of waypoints, or tracking lost the pose.
inline bool should_replan(const OccupancyGrid& grid, const Pose2& estimate,
                          const std::optional<Action>& next_action, double forward_step_m,
                          bool tracking_diverged, const ReplanParams& pp = {}) {
  if (tracking_diverged) return true;
  if (!next_action) return true;  // plan exhausted
  Eigen::Vector2d pos = estimate.translation();
  if (*next_action == Action::Forward) pos += forward_step_m * estimate.heading();
  const Eigen::Vector2d q = pos / grid.resolution();
  return !detail::disk_free(grid, q, pp.robot_radius_cells + pp.inflate_cells);
}

}  // namespace activemap
