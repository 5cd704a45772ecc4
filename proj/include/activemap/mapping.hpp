#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "activemap/dbscan.hpp"
#include "activemap/fisher.hpp"
#include "activemap/occupancy.hpp"
#include "activemap/render.hpp"
#include "activemap/rng.hpp"

namespace activemap {

struct SeedParams {
  int per_cell = 20;
  // Sampled u ~ U[0,1] maps to log-uniform standard deviations in
  // [scale_seed_min_m, scale_seed_max_m].
  double scale_seed_min_m = 0.01;
  double scale_seed_max_m = 0.20;
  int max_splats = 8000;
  int surface_per_cell = 2;  // observation-driven splats per newly hit cell
};

// Populates newly observed frontier cells with randomly initialized splats:
// means uniform inside the cell, colors and opacities uniform in [0, 1],
// orientations uniform over the circle. Returns how many splats were added
// (the map-size cap can cut a batch short).
inline int seed_frontier_splats(SplatMap& map, const std::vector<CellIndex>& cells,
                                const OccupancyGrid& grid, const SeedParams& sp, Rng& rng) {
  int added = 0;
  const double res = grid.resolution();
  for (const CellIndex& c : cells) {
    for (int k = 0; k < sp.per_cell; ++k) {
      if (map.size() >= sp.max_splats) return added;
      Splat2D s;
      s.mean = Eigen::Vector2d(c.x * res + uniform(rng, 0.0, res), c.y * res + uniform(rng, 0.0, res));
      // Rounding at a cell edge may re-bucket the sample into a neighbor;
      // containment in the seeded cell is part of the contract.
      const CellIndex back = grid.world_to_cell(s.mean);
      if (back.x != c.x || back.y != c.y) s.mean = grid.cell_center(c);
      for (int j = 0; j < 3; ++j) s.color[j] = uniform(rng, 0.0, 1.0);
      s.theta = uniform(rng, -kPi, kPi);
      for (int j = 0; j < 2; ++j) {
        const double u = uniform(rng, 0.0, 1.0);
        s.log_scales[j] = std::log(sp.scale_seed_min_m) +
                          u * (std::log(sp.scale_seed_max_m) - std::log(sp.scale_seed_min_m));
      }
      s.opacity_logit = logit(uniform(rng, 0.0, 1.0));
      map.splats.push_back(s);
      ++added;
    }
  }
  return added;
}

// Observation-driven densification: every pixel with a real return is
// back-projected at its measured depth and the hit cell, if not yet
// populated this way, receives per_cell splats carrying the observed
// color. Each splat is a thin strip aligned with the surface tangent
// estimated from neighboring returns (depth-gated so occlusion boundaries
// do not bridge), the 2D analogue of normal-aligned surfel initialization.
// Frontier seeding covers space ahead of the sensor for planning; this
// covers surfaces the sweep actually confirmed, so the tracker has
// correctly shaped and colored geometry to align against immediately
// instead of waiting for gradient descent to organize random splats.
// Returns the number added (bounded by max_splats).
inline int seed_surface_splats(SplatMap& map, const Pose2& pose, const Camera1D& cam,
                               const Observation& obs, const OccupancyGrid& grid,
                               std::set<CellIndex>& populated, const SeedParams& sp, Rng& rng) {
  int added = 0;
  const double res = grid.resolution();
  std::vector<bool> valid(static_cast<size_t>(cam.width), false);
  std::vector<Eigen::Vector2d> hits(static_cast<size_t>(cam.width));
  for (int i = 0; i < cam.width; ++i) {
    const double z = obs.depth[i];
    if (z >= 0.999 * cam.max_depth) continue;  // miss: nothing to place
    valid[static_cast<size_t>(i)] = true;
    hits[static_cast<size_t>(i)] = pose.act(Eigen::Vector2d(z, z * cam.pixel_tan(i)));
  }
  // Dominant direction of the nearby returns around pixel i, or nullopt if
  // the neighborhood is too sparse or too deep-stepped to trust.
  const auto tangent_theta = [&](int i) -> std::optional<double> {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    int n = 0;
    const auto usable = [&](int j) {
      return j >= 0 && j < cam.width && valid[static_cast<size_t>(j)] &&
             std::abs(obs.depth[j] - obs.depth[i]) < 4.0 * res;
    };
    for (int j = i - 2; j <= i + 2; ++j) {
      if (usable(j)) {
        mean += hits[static_cast<size_t>(j)];
        ++n;
      }
    }
    if (n < 2) return std::nullopt;
    mean /= n;
    double cxx = 0, cxy = 0, cyy = 0;
    for (int j = i - 2; j <= i + 2; ++j) {
      if (!usable(j)) continue;
      const Eigen::Vector2d d = hits[static_cast<size_t>(j)] - mean;
      cxx += d.x() * d.x();
      cxy += d.x() * d.y();
      cyy += d.y() * d.y();
    }
    return 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
  };
  for (int i = 0; i < cam.width; ++i) {
    if (!valid[static_cast<size_t>(i)]) continue;
    const Eigen::Vector2d hit = hits[static_cast<size_t>(i)];
    const CellIndex c = grid.world_to_cell(hit);
    if (!populated.insert(c).second) continue;
    const std::optional<double> tan_theta = tangent_theta(i);
    for (int k = 0; k < sp.surface_per_cell; ++k) {
      if (map.size() >= sp.max_splats) return added;
      Splat2D s;
      for (int j = 0; j < 3; ++j) s.color[j] = std::clamp(obs.color[i][j], 0.0, 1.0);
      if (tan_theta) {
        // Thin strip on the measured surface, jittered only along it. Wide
        // enough along the wall that neighboring strips overlap: gaps leak
        // transmittance, and the background term then biases blended depth
        // long, which reads as a forward pull on the pose.
        s.theta = *tan_theta;
        s.log_scales[0] = std::log(res);
        s.log_scales[1] = std::log(res / 6.0);
        const Eigen::Vector2d along(std::cos(s.theta), std::sin(s.theta));
        s.mean = hit + along * uniform(rng, -0.25 * res, 0.25 * res);
      } else {
        s.theta = uniform(rng, -kPi, kPi);
        for (int j = 0; j < 2; ++j) s.log_scales[j] = std::log(uniform(rng, 0.5 * res, 1.5 * res));
        s.mean = hit + Eigen::Vector2d(uniform(rng, -0.25 * res, 0.25 * res),
                                       uniform(rng, -0.25 * res, 0.25 * res));
      }
      // A depth return is direct evidence of a solid surface.
      s.opacity_logit = logit(0.95);
      map.splats.push_back(s);
      ++added;
    }
  }
  return added;
}

// One stored view used for map refinement.
struct Keyframe {
  Pose2 pose;
  Observation obs;
  int step = -1;
  double mean_depth = 0.0;
};

inline double mean_depth(const Observation& obs) {
  if (obs.depth.empty()) return 0.0;
  return std::accumulate(obs.depth.begin(), obs.depth.end(), 0.0) /
         static_cast<double>(obs.depth.size());
}

struct MapOptimOptions {
  int iterations = 25;
  // Step sizes applied to J^T r per parameter group.
  double lr_mean = 2e-4;
  double lr_color = 5e-2;
  double lr_theta = 2e-3;
  double lr_log_scales = 2e-3;
  double lr_opacity = 1e-1;
  // Projection after each step keeps color in [0, 1] and log-scales within
  // the renderer clamp (gradients vanish outside, so points would stall).
  bool project = true;
};

struct MapOptimStats {
  std::vector<double> losses;       // |r|^2 at the sampled keyframe, pre-step
  std::vector<int> keyframes_used;  // index of the keyframe drawn each iteration
};

// Stochastic gradient refinement of all splat parameters against randomly
// drawn keyframes. The loss comes out of the same pass as the gradient, so
// recording it costs no extra renders.
inline MapOptimStats optimize_map(SplatMap& map, const std::vector<Keyframe>& keyframes,
                                  const Camera1D& cam, const MapOptimOptions& opt, Rng& rng,
                                  const RenderParams& rp = {}) {
  MapOptimStats stats;
  if (keyframes.empty() || map.size() == 0) return stats;
  Eigen::Matrix<double, 9, 1> lr;
  lr << opt.lr_mean, opt.lr_mean, opt.lr_color, opt.lr_color, opt.lr_color, opt.lr_theta,
      opt.lr_log_scales, opt.lr_log_scales, opt.lr_opacity;
  for (int it = 0; it < opt.iterations; ++it) {
    const int k = uniform_int(rng, 0, static_cast<int>(keyframes.size()) - 1);
    double cost = 0.0;
    const Eigen::VectorXd grad = map_gradient(map, keyframes[k].pose, cam, keyframes[k].obs, rp, &cost);
    stats.losses.push_back(cost);
    stats.keyframes_used.push_back(k);
    for (int s = 0; s < map.size(); ++s) {
      Splat2D& sp = map.splats[s];
      const auto g = grad.segment<9>(9 * s);
      for (int j = 0; j < 9; ++j) sp.set_param(j, sp.param(j) - lr[j] * g[j]);
      if (opt.project) {
        for (int j = 0; j < 3; ++j) sp.color[j] = std::clamp(sp.color[j], 0.0, 1.0);
        for (int j = 0; j < 2; ++j) {
          sp.log_scales[j] = std::clamp(sp.log_scales[j], std::log(rp.scale_min_m) + 1e-9,
                                        std::log(rp.scale_max_m) - 1e-9);
        }
      }
    }
  }
  return stats;
}

// Per-splat information score: the sum of the splat's parameter block of a
// Hessian diagonal. A uniform prior shifts every score equally, so the
// ranking is unaffected by it.
inline Eigen::VectorXd splat_information_scores(const FisherDiag& fisher, int n_splats) {
  if (fisher.diag.size() != static_cast<Eigen::Index>(n_splats) * Splat2D::kParams) {
    throw std::invalid_argument("splat_information_scores: diagonal size mismatch");
  }
  Eigen::VectorXd scores(n_splats);
  for (int s = 0; s < n_splats; ++s) {
    scores[s] = fisher.diag.segment<Splat2D::kParams>(Splat2D::kParams * s).sum();
  }
  return scores;
}

// Revisit target for refinement rounds (no frontier chosen): the means of
// the top fraction of splats by information score are clustered and the
// largest cluster's centroid becomes the goal. Returns nothing when the
// map is empty or every point lands in noise; the caller then samples
// candidates over free space instead.
inline std::optional<Eigen::Vector2d> refinement_target(const SplatMap& map,
                                                        const FisherDiag& fisher,
                                                        double top_fraction = 0.2,
                                                        double eps = 0.3, int min_pts = 4) {
  if (map.size() == 0) return std::nullopt;
  const Eigen::VectorXd scores = splat_information_scores(fisher, map.size());
  std::vector<int> order(static_cast<size_t>(map.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  const int keep = std::max(1, static_cast<int>(std::ceil(top_fraction * map.size())));
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<size_t>(keep));
  for (int i = 0; i < keep; ++i) pts.push_back(map.splats[static_cast<size_t>(order[i])].mean);
  const DbscanResult clusters = dbscan(pts, eps, min_pts);
  const int best = clusters.largest_cluster();
  if (best < 0) return std::nullopt;
  const std::vector<int> largest = clusters.cluster(best);
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (int idx : largest) centroid += pts[static_cast<size_t>(idx)];
  return centroid / static_cast<double>(largest.size());
}

}  // namespace activemap
