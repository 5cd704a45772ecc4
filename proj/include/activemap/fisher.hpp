#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "activemap/render.hpp"
#include "activemap/rng.hpp"
#include "activemap/tracking.hpp"

namespace activemap {

// Diagonal information over the flat map parameters. `lambda` records the
// prior that is already included in `diag`.
struct FisherDiag {
  Eigen::VectorXd diag;
  double lambda = 0.0;
};

// Diagonal of J^T J + lambda I for the scan rendered at `pose`. Depends
// only on the model, never on an observation (the Gauss-Newton Hessian of
// a quadratic likelihood is label-free).
inline FisherDiag hessian_diag(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                               double lambda, const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  Eigen::VectorXd acc_color = Eigen::VectorXd::Zero(map.param_count());
  Eigen::VectorXd acc_depth = Eigen::VectorXd::Zero(map.param_count());
  detail::render_core(
      proj, cam, rp,
      [&](int, const std::vector<detail::PairTerm>& terms, const Eigen::Vector3d& C, double D,
          double) {
        detail::for_each_alpha_grad(terms, C, D,
                                    [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                                      const detail::PairTerm& t = terms[k];
                                      const auto B = detail::param_block(t, dCda, dDda, rp.depth_weight);
                                      const int base = 9 * t.ps->idx;
                                      for (int c = 0; c < 9; ++c) {
                                        acc_color[base + c] += B(0, c) * B(0, c);
                                        acc_color[base + c] += B(1, c) * B(1, c);
                                        acc_color[base + c] += B(2, c) * B(2, c);
                                        acc_depth[base + c] += B(3, c) * B(3, c);
                                      }
                                    });
      });
  FisherDiag out;
  out.diag = acc_color + acc_depth;
  out.diag.array() += lambda;
  out.lambda = lambda;
  return out;
}

// Monte-Carlo model information: sum of per-pose diagonal Hessians over a
// set of free-space poses, plus the prior added once. With no poses the
// result is the bare prior.
inline FisherDiag mc_model_fisher(const SplatMap& map, std::span<const Pose2> poses,
                                  const Camera1D& cam, double lambda,
                                  const RenderParams& rp = {}) {
  FisherDiag out;
  out.diag = Eigen::VectorXd::Zero(map.param_count());
  for (const Pose2& p : poses) out.diag += hessian_diag(map, p, cam, 0.0, rp).diag;
  out.diag.array() += lambda;
  out.lambda = lambda;
  return out;
}

// Expected information gain of a candidate view against accumulated model
// information: sum over parameters of candidate / model. The model diagonal
// must be strictly positive (any positive prior guarantees that).
inline double expected_information_gain(const FisherDiag& candidate, const FisherDiag& model) {
  if (candidate.diag.size() != model.diag.size()) {
    throw std::invalid_argument("expected_information_gain: dimension mismatch");
  }
  if ((model.diag.array() <= 0.0).any()) {
    throw std::invalid_argument("expected_information_gain: model diagonal must be positive");
  }
  return (candidate.diag.array() / model.diag.array()).sum();
}

// Information gain of an ordered pose sequence. Each pose is scored against
// the model information accumulated so far, then its own information is
// added before moving on, so later poses are not credited for overlap with
// earlier ones.
struct PathEig {
  std::vector<double> per_pose;
  double total = 0.0;
};

inline PathEig path_eig(std::span<const Pose2> poses, const SplatMap& map, const Camera1D& cam,
                        const FisherDiag& model, const RenderParams& rp = {}) {
  if ((model.diag.array() <= 0.0).any()) {
    throw std::invalid_argument("path_eig: model diagonal must be positive");
  }
  Eigen::VectorXd info = model.diag;
  PathEig out;
  out.per_pose.reserve(poses.size());
  for (const Pose2& p : poses) {
    const Eigen::VectorXd h = hessian_diag(map, p, cam, 0.0, rp).diag;
    const double e = (h.array() / info.array()).sum();
    out.per_pose.push_back(e);
    out.total += e;
    info += h;
  }
  return out;
}

// Dense pose-tangent information J^T J (left-perturbation convention,
// same Jacobian as tracking uses).
inline Eigen::Matrix3d pose_fisher(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                   const RenderParams& rp = {}) {
  return pose_jtj(map, pose, cam, rp);
}

struct LocalizationCost {
  double value = 0.0;
  bool degenerate = false;  // unregularized determinant was not positive
};

// -log det(F + eps_reg I). The regularizer keeps the value finite at rank
// deficiency; the flag reports that the bare information was singular.
inline LocalizationCost localization_cost(const Eigen::Matrix3d& fisher, double eps_reg = 1e-8) {
  LocalizationCost out;
  out.degenerate = !(fisher.determinant() > 0.0);
  const double d = (fisher + eps_reg * Eigen::Matrix3d::Identity()).determinant();
  out.value = d > 0.0 ? -std::log(d) : std::numeric_limits<double>::infinity();
  return out;
}

// Empirical check of the pose estimator against the information bound:
// re-estimates the pose from noise-perturbed self-renders and compares the
// scatter of Log(est * truth^-1) with sigma^2 * F^-1.
struct CrbResult {
  Eigen::Matrix3d empirical = Eigen::Matrix3d::Zero();  // second moment about the truth
  Eigen::Matrix3d bound = Eigen::Matrix3d::Zero();      // sigma^2 * F^-1
  int trials = 0;
  int diverged = 0;
  bool inconclusive = false;  // >10% divergence or singular information
};

inline CrbResult crb_check(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                           double noise_sigma, int trials, std::uint64_t seed,
                           const TrackOptions& topt = {}, const RenderParams& rp = {}) {
  if (trials < 1) throw std::invalid_argument("crb_check: trials must be >= 1");
  CrbResult out;
  out.trials = trials;

  const Eigen::Matrix3d F = pose_fisher(map, pose, cam, rp);
  if (!(F.determinant() > 0.0)) {
    out.inconclusive = true;
    return out;
  }
  out.bound = noise_sigma * noise_sigma * F.inverse();

  const Observation clean = render(map, pose, cam, rp);
  Rng rng = make_rng(seed, 0x4352u);
  int used = 0;
  for (int t = 0; t < trials; ++t) {
    Observation noisy = clean;
    // Color rows carry sigma directly; raw depth gets sigma / depth_weight
    // so the weighted residual rows all share one noise scale.
    for (auto& c : noisy.color) {
      for (int j = 0; j < 3; ++j) c[j] += gaussian(rng, 0.0, noise_sigma);
    }
    for (auto& d : noisy.depth) d += gaussian(rng, 0.0, noise_sigma / rp.depth_weight);

    const TrackResult tr = track(map, pose, noisy, cam, topt, rp);
    if (tr.diverged) {
      ++out.diverged;
      continue;
    }
    const Tangent2 err = log(tr.pose * pose.inverse());
    const Eigen::Vector3d e = err.vec();
    out.empirical += e * e.transpose();
    ++used;
  }
  if (used > 0) out.empirical /= static_cast<double>(used);
  if (out.diverged * 10 > trials) out.inconclusive = true;
  return out;
}

}  // namespace activemap
