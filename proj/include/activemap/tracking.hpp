#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "activemap/render.hpp"

namespace activemap {

struct TrackOptions {
  int max_iters = 30;
  // Levenberg damping schedule: accepted steps relax mu, rejected steps
  // stiffen it; a sweep of max_retries rejections ends the iteration.
  double init_mu = 1e-4;
  double mu_up = 10.0;
  double mu_down = 0.5;
  int max_retries = 8;
  double min_mu = 1e-12;
  double step_tol = 1e-10;  // |delta| below this counts as converged
  double grad_tol = 1e-12;  // |g|_inf below this counts as converged
  // Trust region: steps longer than this are stiffened instead of
  // evaluated, so a near-singular system cannot fling the pose. Generous
  // next to the per-frame motion but far below map scale.
  double max_step_trans_m = 0.25;
  double max_step_rot_rad = 0.5;
  // Huber kernel width on the per-pixel residual 4-vector. Pixels the map
  // cannot yet explain (fresh slivers, background behind sparse coverage)
  // produce depth residuals an order of magnitude above fit noise; capping
  // them to linear influence keeps such pixels from outvoting the aligned
  // majority. 0 disables.
  double huber_delta = 0.5;
};

struct TrackResult {
  Pose2 pose;
  bool diverged = false;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
};

// Damped Gauss-Newton alignment of the rendered scan against an observed
// scan. Updates compose on the left: pose <- Exp(delta) * pose. If no
// damped step ever improves on the warm start, the warm start is returned
// unchanged with the divergence flag set; once any step has been accepted,
// failure to improve further just means convergence.
inline TrackResult track(const SplatMap& map, const Pose2& prev_pose, const Observation& observed,
                         const Camera1D& cam, const TrackOptions& opt = {},
                         const RenderParams& rp = {}) {
  TrackResult result;
  result.pose = prev_pose;

  PoseSystem sys = accumulate_pose_system(map, prev_pose, cam, observed, rp, opt.huber_delta);
  result.initial_cost = sys.cost;
  result.final_cost = sys.cost;
  if (!std::isfinite(sys.cost)) {
    result.diverged = true;
    return result;
  }

  double mu = opt.init_mu;
  bool any_accepted = false;
  Pose2 cur = prev_pose;
  double cost = sys.cost;

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    if (sys.g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      any_accepted = true;  // already stationary, not a failure
      break;
    }
    bool accepted = false;
    for (int retry = 0; retry <= opt.max_retries; ++retry) {
      const Eigen::Matrix3d H = sys.H + mu * Eigen::Matrix3d::Identity();
      const Eigen::Vector3d delta = H.ldlt().solve(-sys.g);
      if (!delta.allFinite() || delta.head<2>().norm() > opt.max_step_trans_m ||
          std::abs(delta[2]) > opt.max_step_rot_rad) {
        mu *= opt.mu_up;
        continue;
      }
      const Pose2 cand = exp(Tangent2::from_vec(delta)) * cur;
      const PoseSystem cand_sys =
          accumulate_pose_system(map, cand, cam, observed, rp, opt.huber_delta);
      if (std::isfinite(cand_sys.cost) && cand_sys.cost < cost) {
        cur = cand;
        sys = cand_sys;
        cost = cand_sys.cost;
        mu = std::max(mu * opt.mu_down, opt.min_mu);
        accepted = true;
        any_accepted = true;
        result.iterations = iter + 1;
        if (delta.norm() < opt.step_tol) iter = opt.max_iters;  // converged
        break;
      }
      mu *= opt.mu_up;
    }
    if (!accepted) break;
  }

  if (!any_accepted) {
    // Residual increased for every damping level: the warm start is not in
    // the attraction basin (or is already a stationary point).
    result.diverged = true;
    result.pose = prev_pose;
    result.final_cost = result.initial_cost;
    return result;
  }
  result.pose = cur;
  result.final_cost = cost;
  return result;
}

}  // namespace activemap
