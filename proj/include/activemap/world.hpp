#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "activemap/camera.hpp"
#include "activemap/lie2.hpp"
#include "activemap/rng.hpp"
#include "activemap/splat.hpp"

namespace activemap {

enum class Action : int { Forward = 0, TurnLeft = 1, TurnRight = 2 };

inline const char* action_name(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    default: return "turn_right";
  }
}

inline Action action_from_name(const std::string& s) {
  if (s == "forward") return Action::Forward;
  if (s == "turn_left") return Action::TurnLeft;
  if (s == "turn_right") return Action::TurnRight;
  throw std::invalid_argument("unknown action: " + s);
}

// Colored wall segment. A positive stripe_period with a non-empty palette
// tiles the wall with stripes along its length (the texture tracking and
// information measures feed on); otherwise the wall is a flat base_color.
struct WallSegment {
  Eigen::Vector2d a{0, 0};
  Eigen::Vector2d b{1, 0};
  Eigen::Vector3d base_color{0.7, 0.7, 0.7};
  double stripe_period = 0.0;
  std::vector<Eigen::Vector3d> palette;

  double length() const { return (b - a).norm(); }

  // Color at arc length s from endpoint a.
  Eigen::Vector3d color_at(double s) const {
    if (stripe_period <= 0.0 || palette.empty()) return base_color;
    const int stripe = static_cast<int>(std::floor(s / stripe_period));
    const int n = static_cast<int>(palette.size());
    return palette[((stripe % n) + n) % n];
  }
};

struct World {
  std::string name;
  std::vector<WallSegment> walls;
  Eigen::Vector2d bounds_min{0, 0};
  Eigen::Vector2d bounds_max{1, 1};
  Pose2 start;
  Eigen::Vector3d background{0, 0, 0};

  void validate() const {
    if (walls.empty()) throw std::invalid_argument("world has no walls");
    if (!(bounds_max.x() > bounds_min.x()) || !(bounds_max.y() > bounds_min.y())) {
      throw std::invalid_argument("world bounds are empty");
    }
  }
};

namespace detail {

inline Eigen::Vector3d json_color(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace detail

inline World world_from_json(const nlohmann::json& j) {
  World w;
  w.name = j.value("name", "unnamed");
  w.bounds_min = {j.at("bounds").at(0).get<double>(), j.at("bounds").at(1).get<double>()};
  w.bounds_max = {j.at("bounds").at(2).get<double>(), j.at("bounds").at(3).get<double>()};
  const auto& st = j.at("start");
  w.start = Pose2(st.at(0).get<double>(), st.at(1).get<double>(), st.at(2).get<double>());
  if (j.contains("background")) w.background = detail::json_color(j.at("background"));
  for (const auto& jw : j.at("walls")) {
    WallSegment seg;
    seg.a = {jw.at("a").at(0).get<double>(), jw.at("a").at(1).get<double>()};
    seg.b = {jw.at("b").at(0).get<double>(), jw.at("b").at(1).get<double>()};
    if (jw.contains("color")) seg.base_color = detail::json_color(jw.at("color"));
    seg.stripe_period = jw.value("stripe_period", 0.0);
    if (jw.contains("palette")) {
      for (const auto& jc : jw.at("palette")) seg.palette.push_back(detail::json_color(jc));
    }
    w.walls.push_back(std::move(seg));
  }
  w.validate();
  return w;
}

inline World load_world(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open world file: " + path);
  return world_from_json(nlohmann::json::parse(f));
}

namespace detail {

// Ray-segment intersection; returns ray parameter r (world units along the
// unit direction) or nothing.
inline std::optional<double> ray_segment(const Eigen::Vector2d& origin, const Eigen::Vector2d& dir,
                                         const WallSegment& seg, double* arc_out) {
  const Eigen::Vector2d e = seg.b - seg.a;
  const double denom = dir.x() * e.y() - dir.y() * e.x();
  if (std::abs(denom) < 1e-14) return std::nullopt;
  const Eigen::Vector2d ao = seg.a - origin;
  const double r = (ao.x() * e.y() - ao.y() * e.x()) / denom;
  const double u = (ao.x() * dir.y() - ao.y() * dir.x()) / denom;
  if (r <= 1e-9 || u < 0.0 || u > 1.0) return std::nullopt;
  if (arc_out) *arc_out = u * e.norm();
  return r;
}

inline double point_segment_distance(const Eigen::Vector2d& p, const WallSegment& seg) {
  const Eigen::Vector2d e = seg.b - seg.a;
  const double len2 = e.squaredNorm();
  if (len2 == 0.0) return (p - seg.a).norm();
  const double t = std::clamp((p - seg.a).dot(e) / len2, 0.0, 1.0);
  return (p - (seg.a + t * e)).norm();
}

}  // namespace detail

inline double distance_to_walls(const World& w, const Eigen::Vector2d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& seg : w.walls) best = std::min(best, detail::point_segment_distance(p, seg));
  return best;
}

// Exact range scan of the wall set. Depth is the forward (z) component of
// the hit, matching the renderer's depth channel; rays follow the
// Camera1D pixel convention exactly. Hits beyond max_depth read as misses
// (background color, depth = max_depth). Optional Gaussian noise perturbs
// color and depth, clamped back to their physical ranges.
inline Observation sense(const World& world, const Pose2& pose, const Camera1D& cam,
                         double noise_sigma = 0.0, Rng* rng = nullptr) {
  Observation obs;
  obs.color.resize(cam.width);
  obs.depth.resize(cam.width);
  const Eigen::Matrix2d R = pose.rotation();
  for (int i = 0; i < cam.width; ++i) {
    const Eigen::Vector2d db = cam.ray_dir_body(i);
    const Eigen::Vector2d dw = R * db;
    double best_r = std::numeric_limits<double>::infinity();
    Eigen::Vector3d color = world.background;
    for (const auto& seg : world.walls) {
      double arc = 0.0;
      if (auto r = detail::ray_segment(pose.translation(), dw, seg, &arc)) {
        if (*r < best_r) {
          best_r = *r;
          color = seg.color_at(arc);
        }
      }
    }
    double z = best_r * db.x();
    if (!(z < cam.max_depth)) {
      z = cam.max_depth;
      color = world.background;
    }
    if (noise_sigma > 0.0 && rng) {
      for (int c = 0; c < 3; ++c) color[c] = std::clamp(color[c] + gaussian(*rng, 0.0, noise_sigma), 0.0, 1.0);
      z = std::clamp(z + gaussian(*rng, 0.0, noise_sigma), 0.0, cam.max_depth);
    }
    obs.color[i] = color;
    obs.depth[i] = z;
  }
  return obs;
}

struct StepResult {
  Pose2 pose;
  bool blocked = false;
};

// Kinematic step. Forward moves are rejected (pose unchanged, blocked set)
// when the goal position would come closer than standoff_m to any wall;
// turns always succeed.
inline StepResult step_action(const World& world, const Pose2& pose, Action action,
                              double forward_m, double turn_rad, double standoff_m = 0.1) {
  StepResult out{pose, false};
  switch (action) {
    case Action::Forward: {
      const Eigen::Vector2d cand = pose.translation() + forward_m * pose.heading();
      if (distance_to_walls(world, cand) < standoff_m) {
        out.blocked = true;
      } else {
        out.pose = Pose2(cand, pose.theta());
      }
      break;
    }
    case Action::TurnLeft:
      out.pose = Pose2(pose.translation(), pose.theta() + turn_rad);
      break;
    case Action::TurnRight:
      out.pose = Pose2(pose.translation(), pose.theta() - turn_rad);
      break;
  }
  return out;
}

// Ground-truth navigable positions: centers of resolution-sized cells
// reachable from the start with at least `clearance` to every wall
// (8-connected flood fill, deterministic order).
inline std::vector<Eigen::Vector2d> reachable_free_centers(const World& world, double resolution,
                                                           double clearance = 0.1) {
  const auto cell_of = [&](const Eigen::Vector2d& p) {
    return std::pair<int, int>{static_cast<int>(std::floor(p.x() / resolution)),
                               static_cast<int>(std::floor(p.y() / resolution))};
  };
  const auto center_of = [&](int x, int y) {
    return Eigen::Vector2d((x + 0.5) * resolution, (y + 0.5) * resolution);
  };
  const auto in_bounds = [&](const Eigen::Vector2d& p) {
    return p.x() >= world.bounds_min.x() && p.x() <= world.bounds_max.x() &&
           p.y() >= world.bounds_min.y() && p.y() <= world.bounds_max.y();
  };
  const auto navigable = [&](int x, int y) {
    const Eigen::Vector2d c = center_of(x, y);
    return in_bounds(c) && distance_to_walls(world, c) > clearance;
  };

  const auto [sx, sy] = cell_of(world.start.translation());
  if (!navigable(sx, sy)) {
    throw std::invalid_argument("world start cell violates the clearance requirement");
  }
  std::vector<std::pair<int, int>> visited{{sx, sy}};
  auto seen = [&](int x, int y) {
    return std::binary_search(visited.begin(), visited.end(), std::pair<int, int>{x, y});
  };
  auto mark = [&](int x, int y) {
    visited.insert(std::lower_bound(visited.begin(), visited.end(), std::pair<int, int>{x, y}),
                   {x, y});
  };
  std::deque<std::pair<int, int>> queue{{sx, sy}};
  std::vector<Eigen::Vector2d> out;
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    out.push_back(center_of(x, y));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (seen(x + dx, y + dy) || !navigable(x + dx, y + dy)) continue;
        mark(x + dx, y + dy);
        queue.push_back({x + dx, y + dy});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  return out;
}

}  // namespace activemap
