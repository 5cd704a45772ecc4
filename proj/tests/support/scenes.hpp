#pragma once

// Shared scene builders and independent derivative oracles for the test
// suites. The finite-difference scenes are constructed to stay clear of
// every nondifferentiable boundary (alpha saturation, color/scale clamps,
// the near plane), so central differences are valid probes of the analytic
// Jacobians.

#include <cstdint>

#include <Eigen/Dense>

#include "activemap/camera.hpp"
#include "activemap/lie2.hpp"
#include "activemap/render.hpp"
#include "activemap/rng.hpp"
#include "activemap/splat.hpp"

namespace amtest {

using namespace activemap;

struct FdScene {
  SplatMap map;
  Pose2 pose;
  Camera1D cam;
  RenderParams rp;
};

inline FdScene make_fd_scene(std::uint64_t seed, int n_splats, int width = 64) {
  Rng rng = make_rng(seed, 100);
  FdScene sc;
  sc.cam.width = width;
  sc.cam.fov_rad = kPi / 2.0;
  sc.cam.max_depth = 8.0;
  sc.pose = Pose2(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -kPi, kPi));
  const double th = sc.cam.tan_half();
  for (int i = 0; i < n_splats; ++i) {
    // Body-frame placement, mostly inside the frustum with some spill
    // beyond its edges; comfortably in front of the near plane.
    const double x = uniform(rng, 0.4, 5.0);
    const double y = uniform(rng, -1.2 * x * th, 1.2 * x * th);
    Splat2D s;
    s.mean = sc.pose.act(Eigen::Vector2d(x, y));
    for (int c = 0; c < 3; ++c) s.color[c] = uniform(rng, 0.1, 0.9);
    s.theta = uniform(rng, -kPi, kPi);
    for (int j = 0; j < 2; ++j) s.log_scales[j] = std::log(uniform(rng, 0.02, 0.4));
    s.opacity_logit = uniform(rng, -2.5, 2.0);
    sc.map.splats.push_back(s);
  }
  return sc;
}

// Stacks an observation into the residual row layout (colors pixel-major,
// then weighted depths) by differencing against a zero observation.
inline Eigen::VectorXd stack_observation(const Observation& obs, double depth_weight) {
  Observation zero;
  zero.color.assign(obs.color.size(), Eigen::Vector3d::Zero());
  zero.depth.assign(obs.depth.size(), 0.0);
  return residual_vector(obs, zero, depth_weight);
}

// Central-difference Jacobian over the flat map parameters.
inline Eigen::MatrixXd fd_jacobian_params(const FdScene& sc, double h = 1e-5) {
  SplatMap m = sc.map;
  Eigen::MatrixXd J(4 * sc.cam.width, m.param_count());
  for (int j = 0; j < m.param_count(); ++j) {
    const double v = m.param(j);
    m.set_param(j, v + h);
    const Eigen::VectorXd fp = stack_observation(render(m, sc.pose, sc.cam, sc.rp), sc.rp.depth_weight);
    m.set_param(j, v - h);
    const Eigen::VectorXd fm = stack_observation(render(m, sc.pose, sc.cam, sc.rp), sc.rp.depth_weight);
    m.set_param(j, v);
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  return J;
}

// Central-difference Jacobian over the left pose perturbation
// Exp(eps e_i) * pose.
inline Eigen::MatrixXd fd_jacobian_pose(const FdScene& sc, double h = 1e-6) {
  Eigen::MatrixXd J(4 * sc.cam.width, 3);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[axis] = 1.0;
    const Pose2 pp = exp(Tangent2::from_vec(h * e)) * sc.pose;
    const Pose2 pm = exp(Tangent2::from_vec(-h * e)) * sc.pose;
    const Eigen::VectorXd fp = stack_observation(render(sc.map, pp, sc.cam, sc.rp), sc.rp.depth_weight);
    const Eigen::VectorXd fm = stack_observation(render(sc.map, pm, sc.cam, sc.rp), sc.rp.depth_weight);
    J.col(axis) = (fp - fm) / (2.0 * h);
  }
  return J;
}

// Worst mismatch under |a - b| <= max(abs_floor, rel * max(|a|, |b|)).
struct JacobianMismatch {
  double worst_ratio = 0.0;  // |a-b| / max(abs_floor, rel * max|.|), > 1 fails
  int row = -1, col = -1;
  double analytic = 0.0, numeric = 0.0;
};

inline JacobianMismatch compare_jacobians(const Eigen::MatrixXd& analytic,
                                          const Eigen::MatrixXd& numeric, double rel = 1e-3,
                                          double abs_floor = 1e-6) {
  JacobianMismatch out;
  for (int r = 0; r < analytic.rows(); ++r) {
    for (int c = 0; c < analytic.cols(); ++c) {
      const double a = analytic(r, c), b = numeric(r, c);
      const double tol = std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
      const double ratio = std::abs(a - b) / tol;
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.row = r;
        out.col = c;
        out.analytic = a;
        out.numeric = b;
      }
    }
  }
  return out;
}

}  // namespace amtest
