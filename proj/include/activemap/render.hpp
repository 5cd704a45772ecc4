#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "activemap/camera.hpp"
#include "activemap/image.hpp"
#include "activemap/lie2.hpp"
#include "activemap/splat.hpp"

namespace activemap {

struct RenderParams {
  // Weight applied to the depth rows of the stacked residual (color rows
  // are unweighted). Jacobians carry the same weight so residual and
  // derivative conventions always agree.
  double depth_weight = 0.5;
  Eigen::Vector3d background{0.0, 0.0, 0.0};
  // Splats at forward depth <= near_clip are culled.
  double near_clip = 1e-3;
  // Splats whose center angle falls outside the field of view by more than
  // this factor are culled. The pixel-space linearization of the projection
  // degenerates for grazing splats (forward depth near zero, large lateral
  // offset): the projected variance grows like 1/x^4 until the footprint
  // spans the whole image at a bogus near depth. The margin leaves room for
  // tails of splats just past the image border, whose footprints are small.
  double frustum_margin = 2.0;
  // A splat contributes to pixel i iff (i - i*)^2 / (2 var) <= cutoff.
  // exp(-40) ~ 4e-18, far below every tolerance used downstream, so the
  // truncation is invisible to finite-difference checks.
  double exponent_cutoff = 40.0;
  // Dilation added to the projected pixel variance; keeps footprints at
  // least ~half a pixel wide and the Gaussian well conditioned.
  double var_floor_px2 = 0.3;
  double alpha_max = 0.999;
  // World-frame standard deviations are clamped to this range (meters)
  // before building the covariance; the clamp zeroes the scale gradient.
  double scale_min_m = 1e-4;
  double scale_max_m = 10.0;
};

namespace detail {

// Per-splat camera-frame quantities plus cached derivative vectors.
// Parameter columns follow the Splat2D flat layout; pose columns are the
// left-perturbation tangent (v_x, v_y, omega) of the camera-to-world pose.
struct ProjSplat {
  int idx = -1;
  double z = 0.0;       // forward depth
  double istar = 0.0;   // projected pixel center
  double var = 0.0;     // projected variance, px^2
  double opacity = 0.0;
  Eigen::Vector3d color{0, 0, 0};
  bool color_clamped[3] = {false, false, false};

  Eigen::Matrix<double, 9, 1> distar_dp;
  Eigen::Matrix<double, 9, 1> dvar_dp;
  Eigen::Matrix<double, 9, 1> dz_dp;
  Eigen::Vector3d distar_de;
  Eigen::Vector3d dvar_de;
  Eigen::Vector3d dz_de;
};

// One (pixel, splat) contribution in front-to-back order.
struct PairTerm {
  const ProjSplat* ps = nullptr;
  double delta = 0.0;  // i - i*
  double gauss = 0.0;
  double alpha = 0.0;
  double T = 0.0;  // transmittance before this splat
  double w = 0.0;  // T * alpha
  bool saturated = false;
};

struct Projection {
  std::vector<ProjSplat> splats;              // depth-ascending
  std::vector<std::vector<const ProjSplat*>> bins;  // per pixel, depth-ascending
};

inline Projection project_splats(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                 const RenderParams& rp, bool with_derivs) {
  Projection out;
  out.splats.reserve(map.splats.size());
  const Eigen::Matrix2d R = pose.rotation();
  const Eigen::Matrix2d Rt = R.transpose();
  const Eigen::Vector2d h = pose.heading();
  const Eigen::Vector2d l = pose.left();
  const Eigen::Matrix2d J = so2_generator();
  const double f = cam.focal_px();

  for (int k = 0; k < map.size(); ++k) {
    const Splat2D& s = map.splats[k];
    const Eigen::Vector2d d = s.mean - pose.translation();
    const Eigen::Vector2d mu_c(h.dot(d), l.dot(d));
    if (!(mu_c.x() > rp.near_clip)) continue;
    if (std::abs(mu_c.y()) > rp.frustum_margin * std::tan(0.5 * cam.fov_rad) * mu_c.x()) continue;

    ProjSplat ps;
    ps.idx = k;
    ps.z = mu_c.x();

    // World covariance from clamped scales.
    const double c0 = std::cos(s.theta), s0 = std::sin(s.theta);
    Eigen::Matrix2d Rs;
    Rs << c0, -s0, s0, c0;
    double sc[2];
    bool clamped[2];
    for (int j = 0; j < 2; ++j) {
      const double raw = std::exp(s.log_scales[j]);
      sc[j] = std::clamp(raw, rp.scale_min_m, rp.scale_max_m);
      clamped[j] = (raw <= rp.scale_min_m || raw >= rp.scale_max_m);
    }
    const Eigen::Matrix2d S2 = Eigen::Vector2d(sc[0] * sc[0], sc[1] * sc[1]).asDiagonal();
    const Eigen::Matrix2d sigma_w = Rs * S2 * Rs.transpose();
    const Eigen::Matrix2d sigma_c = Rt * sigma_w * R;

    const double x = mu_c.x(), y = mu_c.y();
    const Eigen::Vector2d A = cam.project_grad(mu_c);
    ps.istar = cam.project(mu_c);
    ps.var = A.dot(sigma_c * A) + rp.var_floor_px2;
    ps.opacity = sigmoid(s.opacity_logit);
    for (int c = 0; c < 3; ++c) {
      ps.color[c] = std::clamp(s.color[c], 0.0, 1.0);
      ps.color_clamped[c] = (s.color[c] <= 0.0 || s.color[c] >= 1.0);
    }

    if (with_derivs) {
      ps.distar_dp.setZero();
      ps.dvar_dp.setZero();
      ps.dz_dp.setZero();

      // Projection gradient partials w.r.t. the body-frame point.
      const Eigen::Vector2d dA_dx(-2.0 * f * y / (x * x * x), f / (x * x));
      const Eigen::Vector2d dA_dy(f / (x * x), 0.0);
      const Eigen::Vector2d sca = sigma_c * A;
      const double dvar_dx = 2.0 * dA_dx.dot(sca);
      const double dvar_dy = 2.0 * dA_dy.dot(sca);

      // Mean: body-frame point moves by (h, l) per world axis.
      const Eigen::Vector2d distar_dmean = A.x() * h + A.y() * l;
      ps.distar_dp[0] = distar_dmean.x();
      ps.distar_dp[1] = distar_dmean.y();
      const Eigen::Vector2d dvar_dmean = dvar_dx * h + dvar_dy * l;
      ps.dvar_dp[0] = dvar_dmean.x();
      ps.dvar_dp[1] = dvar_dmean.y();
      ps.dz_dp[0] = h.x();
      ps.dz_dp[1] = h.y();

      // Splat orientation: d(sigma_w)/dtheta = J sigma_w - sigma_w J.
      const Eigen::Matrix2d dsw_dth = J * sigma_w - sigma_w * J;
      ps.dvar_dp[5] = A.dot(Rt * dsw_dth * R * A);

      // Log-scales (zero once the clamp is active).
      for (int j = 0; j < 2; ++j) {
        if (clamped[j]) continue;
        Eigen::Matrix2d dS2 = Eigen::Matrix2d::Zero();
        dS2(j, j) = 2.0 * sc[j] * sc[j];
        const Eigen::Matrix2d dsw = Rs * dS2 * Rs.transpose();
        ps.dvar_dp[6 + j] = A.dot(Rt * dsw * R * A);
      }

      // Pose tangent: mu_c(eps) = (R_eps R)^T (mu_w - t - eps_v + ...),
      // linearized: d(mu_c)/dv = -R^T, d(mu_c)/domega = -R^T J mu_w.
      Eigen::Matrix<double, 2, 3> dmu;
      dmu.leftCols<2>() = -Rt;
      dmu.col(2) = -Rt * (J * s.mean);
      ps.dz_de = dmu.row(0).transpose();
      ps.distar_de = dmu.transpose() * A;
      const Eigen::Matrix2d dsc_dw = Rt * (sigma_w * J - J * sigma_w) * R;
      ps.dvar_de = dmu.transpose() * Eigen::Vector2d(dvar_dx, dvar_dy);
      ps.dvar_de[2] += A.dot(dsc_dw * A);
    }

    out.splats.push_back(ps);
  }

  std::sort(out.splats.begin(), out.splats.end(), [](const ProjSplat& a, const ProjSplat& b) {
    return a.z != b.z ? a.z < b.z : a.idx < b.idx;
  });

  // One contiguous pixel interval per splat; appending in depth order keeps
  // every per-pixel list depth-sorted without further sorting.
  out.bins.resize(cam.width);
  for (const ProjSplat& ps : out.splats) {
    const double r = std::sqrt(2.0 * rp.exponent_cutoff * ps.var);
    const int lo = std::max(0, static_cast<int>(std::ceil(ps.istar - r)));
    const int hi = std::min(cam.width - 1, static_cast<int>(std::floor(ps.istar + r)));
    for (int i = lo; i <= hi; ++i) out.bins[i].push_back(&ps);
  }
  return out;
}

// Blends every pixel front-to-back and hands the contribution list plus
// totals to `emit(pixel, terms, color, depth, t_final)`.
template <class EmitPixel>
inline Observation render_core(const Projection& proj, const Camera1D& cam,
                               const RenderParams& rp, EmitPixel&& emit) {
  Observation obs;
  obs.color.resize(cam.width);
  obs.depth.resize(cam.width);
  std::vector<PairTerm> terms;
  for (int i = 0; i < cam.width; ++i) {
    terms.clear();
    double T = 1.0;
    Eigen::Vector3d C = Eigen::Vector3d::Zero();
    double D = 0.0;
    for (const ProjSplat* ps : proj.bins[i]) {
      PairTerm t;
      t.ps = ps;
      t.delta = i - ps->istar;
      t.gauss = std::exp(-0.5 * t.delta * t.delta / ps->var);
      const double raw_alpha = ps->opacity * t.gauss;
      t.saturated = raw_alpha > rp.alpha_max;
      t.alpha = t.saturated ? rp.alpha_max : raw_alpha;
      if (t.alpha < 1e-30) continue;
      t.T = T;
      t.w = T * t.alpha;
      C += t.w * ps->color;
      D += t.w * ps->z;
      T *= 1.0 - t.alpha;
      terms.push_back(t);
    }
    C += T * rp.background;
    D += T * cam.max_depth;
    obs.color[i] = C;
    obs.depth[i] = D;
    emit(i, terms, C, D, T);
  }
  return obs;
}

// Calls visit(k, dC/dalpha_k, dD/dalpha_k) for every contribution of one
// pixel. Uses the telescoped form: d/dalpha_k = T_k * value_k - suffix_k /
// (1 - alpha_k), where the suffix includes the background term.
template <class Visit>
inline void for_each_alpha_grad(const std::vector<PairTerm>& terms, const Eigen::Vector3d& C,
                                double D, Visit&& visit) {
  Eigen::Vector3d prefix_c = Eigen::Vector3d::Zero();
  double prefix_d = 0.0;
  for (size_t k = 0; k < terms.size(); ++k) {
    const PairTerm& t = terms[k];
    prefix_c += t.w * t.ps->color;
    prefix_d += t.w * t.ps->z;
    const double inv = 1.0 / (1.0 - t.alpha);
    const Eigen::Vector3d dCda = t.T * t.ps->color - (C - prefix_c) * inv;
    const double dDda = t.T * t.ps->z - (D - prefix_d) * inv;
    visit(k, dCda, dDda);
  }
}

// d(alpha)/d(params) for one contribution, zero when the alpha clamp is
// active (the clamp freezes alpha, not the downstream blend).
inline Eigen::Matrix<double, 9, 1> alpha_grad_params(const PairTerm& t) {
  Eigen::Matrix<double, 9, 1> dadp = Eigen::Matrix<double, 9, 1>::Zero();
  if (t.saturated) return dadp;
  const ProjSplat& ps = *t.ps;
  const double dG_ddelta = -t.gauss * t.delta / ps.var;
  const double dG_dvar = 0.5 * t.gauss * t.delta * t.delta / (ps.var * ps.var);
  dadp = ps.opacity * (dG_dvar * ps.dvar_dp - dG_ddelta * ps.distar_dp);
  dadp[8] = t.gauss * ps.opacity * (1.0 - ps.opacity);
  return dadp;
}

inline Eigen::Vector3d alpha_grad_pose(const PairTerm& t) {
  if (t.saturated) return Eigen::Vector3d::Zero();
  const ProjSplat& ps = *t.ps;
  const double dG_ddelta = -t.gauss * t.delta / ps.var;
  const double dG_dvar = 0.5 * t.gauss * t.delta * t.delta / (ps.var * ps.var);
  return ps.opacity * (dG_dvar * ps.dvar_de - dG_ddelta * ps.distar_de);
}

// Rows are (r, g, b, depth_weight * depth); columns the splat's 9 params.
inline Eigen::Matrix<double, 4, 9> param_block(const PairTerm& t, const Eigen::Vector3d& dCda,
                                               double dDda, double depth_weight) {
  const ProjSplat& ps = *t.ps;
  const Eigen::Matrix<double, 9, 1> dadp = alpha_grad_params(t);
  Eigen::Matrix<double, 4, 9> B;
  for (int c = 0; c < 3; ++c) {
    B.row(c) = dCda[c] * dadp.transpose();
    if (!ps.color_clamped[c]) B(c, 2 + c) += t.w;
  }
  B.row(3) = depth_weight * (dDda * dadp.transpose() + t.w * ps.dz_dp.transpose());
  return B;
}

inline Eigen::Matrix<double, 4, 3> pose_block(const PairTerm& t, const Eigen::Vector3d& dCda,
                                              double dDda, double depth_weight) {
  const ProjSplat& ps = *t.ps;
  const Eigen::Vector3d dade = alpha_grad_pose(t);
  Eigen::Matrix<double, 4, 3> B;
  for (int c = 0; c < 3; ++c) B.row(c) = dCda[c] * dade.transpose();
  B.row(3) = depth_weight * (dDda * dade.transpose() + t.w * ps.dz_de.transpose());
  return B;
}

}  // namespace detail

inline Observation render(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                          const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, false);
  return detail::render_core(proj, cam, rp, [](int, const auto&, const auto&, double, double) {});
}

// Stacked residual rendered - observed. Row layout (fixed contract): rows
// [0, 3W) are color, pixel-major (row = 3*pixel + channel); rows [3W, 4W)
// are depth_weight * (depth difference).
inline Eigen::VectorXd residual_vector(const Observation& rendered, const Observation& observed,
                                       double depth_weight) {
  const int w = rendered.width();
  if (observed.width() != w) throw std::invalid_argument("residual_vector: width mismatch");
  Eigen::VectorXd r(4 * w);
  for (int i = 0; i < w; ++i) {
    for (int c = 0; c < 3; ++c) r[3 * i + c] = rendered.color[i][c] - observed.color[i][c];
    r[3 * w + i] = depth_weight * (rendered.depth[i] - observed.depth[i]);
  }
  return r;
}

// Sparse Jacobian of the stacked scan w.r.t. the flat map parameters. Each
// splat touches one contiguous pixel interval; blocks[i - pixel_begin] is
// the 4x9 block of pixel i in the residual row layout of residual_vector.
struct ParamJacobianEntry {
  int splat = -1;
  int pixel_begin = 0;
  int pixel_end = 0;  // half-open
  std::vector<Eigen::Matrix<double, 4, 9>> blocks;
};

struct ParamJacobian {
  int width = 0;
  int n_params = 0;
  double depth_weight = 0.0;
  std::vector<ParamJacobianEntry> entries;  // ascending splat index

  // Dense 4W x n_params assembly (test and small-problem helper).
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * width, n_params);
    for (const auto& e : entries) {
      for (int i = e.pixel_begin; i < e.pixel_end; ++i) {
        const auto& B = e.blocks[i - e.pixel_begin];
        for (int c = 0; c < 3; ++c) J.row(3 * i + c).segment<9>(9 * e.splat) = B.row(c);
        J.row(3 * width + i).segment<9>(9 * e.splat) = B.row(3);
      }
    }
    return J;
  }
};

inline ParamJacobian jacobian_params(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                     const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  ParamJacobian out;
  out.width = cam.width;
  out.n_params = map.param_count();
  out.depth_weight = rp.depth_weight;

  // Pre-size one entry per projected splat covering its pixel interval.
  std::vector<int> entry_of(map.size(), -1);
  for (const auto& ps : proj.splats) {
    const double r = std::sqrt(2.0 * rp.exponent_cutoff * ps.var);
    const int lo = std::max(0, static_cast<int>(std::ceil(ps.istar - r)));
    const int hi = std::min(cam.width - 1, static_cast<int>(std::floor(ps.istar + r)));
    if (lo > hi) continue;
    ParamJacobianEntry e;
    e.splat = ps.idx;
    e.pixel_begin = lo;
    e.pixel_end = hi + 1;
    e.blocks.assign(hi - lo + 1, Eigen::Matrix<double, 4, 9>::Zero());
    entry_of[ps.idx] = static_cast<int>(out.entries.size());
    out.entries.push_back(std::move(e));
  }

  detail::render_core(proj, cam, rp,
                      [&](int pixel, const std::vector<detail::PairTerm>& terms,
                          const Eigen::Vector3d& C, double D, double) {
                        detail::for_each_alpha_grad(
                            terms, C, D, [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                              const detail::PairTerm& t = terms[k];
                              auto& e = out.entries[entry_of[t.ps->idx]];
                              e.blocks[pixel - e.pixel_begin] =
                                  detail::param_block(t, dCda, dDda, rp.depth_weight);
                            });
                      });

  std::sort(out.entries.begin(), out.entries.end(),
            [](const ParamJacobianEntry& a, const ParamJacobianEntry& b) { return a.splat < b.splat; });
  return out;
}

// Dense 4W x 3 Jacobian of the stacked scan w.r.t. the left-perturbation
// tangent of the camera-to-world pose: column j is the directional
// derivative along Exp(eps * e_j) * pose at eps = 0.
inline Eigen::MatrixXd jacobian_pose(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                     const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * cam.width, 3);
  detail::render_core(proj, cam, rp,
                      [&](int pixel, const std::vector<detail::PairTerm>& terms,
                          const Eigen::Vector3d& C, double D, double) {
                        detail::for_each_alpha_grad(
                            terms, C, D, [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                              const auto B = detail::pose_block(terms[k], dCda, dDda, rp.depth_weight);
                              for (int c = 0; c < 3; ++c) J.row(3 * pixel + c) += B.row(c);
                              J.row(3 * cam.width + pixel) += B.row(3);
                            });
                      });
  return J;
}

// Per-pixel compositing audit: sum of blend weights and final transmittance.
// Front-to-back compositing telescopes, so weight_sum + t_final == 1.
struct BlendAudit {
  std::vector<double> weight_sum;
  std::vector<double> t_final;
};

inline BlendAudit blend_audit(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                              const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, false);
  BlendAudit audit;
  audit.weight_sum.resize(cam.width, 0.0);
  audit.t_final.resize(cam.width, 1.0);
  detail::render_core(proj, cam, rp,
                      [&](int pixel, const std::vector<detail::PairTerm>& terms,
                          const Eigen::Vector3d&, double, double t_final) {
                        double sum = 0.0;
                        for (const auto& t : terms) sum += t.w;
                        audit.weight_sum[pixel] = sum;
                        audit.t_final[pixel] = t_final;
                      });
  return audit;
}

// Gauss-Newton normal equations of the pose residual at the given pose:
// H = J^T J, g = J^T r, cost = |r|^2, with r = rendered - observed.
struct PoseSystem {
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  double cost = 0.0;
};

// huber_delta > 0 applies a Huber kernel per pixel (IRLS weight on the
// 4-vector residual), capping the influence of pixels the map cannot yet
// explain; 0 keeps the plain squared norm. cost is the kernel objective, so
// damping comparisons stay monotone in the same quantity being descended.
inline PoseSystem accumulate_pose_system(const SplatMap& map, const Pose2& pose,
                                         const Camera1D& cam, const Observation& observed,
                                         const RenderParams& rp = {}, double huber_delta = 0.0) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  PoseSystem sys;
  detail::render_core(
      proj, cam, rp,
      [&](int pixel, const std::vector<detail::PairTerm>& terms, const Eigen::Vector3d& C,
          double D, double) {
        Eigen::Matrix<double, 4, 3> M = Eigen::Matrix<double, 4, 3>::Zero();
        detail::for_each_alpha_grad(terms, C, D,
                                    [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                                      M += detail::pose_block(terms[k], dCda, dDda, rp.depth_weight);
                                    });
        Eigen::Vector4d r;
        r.head<3>() = C - observed.color[pixel];
        r[3] = rp.depth_weight * (D - observed.depth[pixel]);
        double w = 1.0;
        double rho = r.squaredNorm();
        if (huber_delta > 0.0) {
          const double n = r.norm();
          if (n > huber_delta) {
            w = huber_delta / n;
            rho = huber_delta * (2.0 * n - huber_delta);
          }
        }
        sys.H += w * M.transpose() * M;
        sys.g += w * M.transpose() * r;
        sys.cost += rho;
      });
  return sys;
}

// J^T J for the pose tangent alone (no residual needed).
inline Eigen::Matrix3d pose_jtj(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                const RenderParams& rp = {}) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  detail::render_core(proj, cam, rp,
                      [&](int, const std::vector<detail::PairTerm>& terms, const Eigen::Vector3d& C,
                          double D, double) {
                        Eigen::Matrix<double, 4, 3> M = Eigen::Matrix<double, 4, 3>::Zero();
                        detail::for_each_alpha_grad(
                            terms, C, D, [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                              M += detail::pose_block(terms[k], dCda, dDda, rp.depth_weight);
                            });
                        H += M.transpose() * M;
                      });
  return H;
}

// J^T r over the flat map parameters (the descent direction for map
// refinement is its negation; the caller applies step sizes). Also reports
// |r|^2 so refinement loops get the loss for free.
inline Eigen::VectorXd map_gradient(const SplatMap& map, const Pose2& pose, const Camera1D& cam,
                                    const Observation& observed, const RenderParams& rp,
                                    double* cost_out = nullptr) {
  const auto proj = detail::project_splats(map, pose, cam, rp, true);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(map.param_count());
  double cost = 0.0;
  detail::render_core(
      proj, cam, rp,
      [&](int pixel, const std::vector<detail::PairTerm>& terms, const Eigen::Vector3d& C,
          double D, double) {
        Eigen::Vector4d r;
        r.head<3>() = C - observed.color[pixel];
        r[3] = rp.depth_weight * (D - observed.depth[pixel]);
        detail::for_each_alpha_grad(terms, C, D,
                                    [&](size_t k, const Eigen::Vector3d& dCda, double dDda) {
                                      const detail::PairTerm& t = terms[k];
                                      const auto B = detail::param_block(t, dCda, dDda, rp.depth_weight);
                                      grad.segment<9>(9 * t.ps->idx) += B.transpose() * r;
                                    });
        cost += r.squaredNorm();
      });
  if (cost_out) *cost_out = cost;
  return grad;
}

// Top-down orthographic view frame. Image x grows with world x, image y
// grows downward (world y decreases).
struct BirdseyeFrame {
  Eigen::Vector2d world_min{0, 0};
  Eigen::Vector2d world_max{1, 1};
  double px_per_m = 50.0;

  int width() const {
    return std::max(1, static_cast<int>(std::ceil((world_max.x() - world_min.x()) * px_per_m)));
  }
  int height() const {
    return std::max(1, static_cast<int>(std::ceil((world_max.y() - world_min.y()) * px_per_m)));
  }
  // Continuous pixel coordinates of a world point.
  Eigen::Vector2d to_px(const Eigen::Vector2d& w) const {
    return {(w.x() - world_min.x()) * px_per_m, (world_max.y() - w.y()) * px_per_m};
  }
  Eigen::Vector2d px_center_world(int ix, int iy) const {
    return {world_min.x() + (ix + 0.5) / px_per_m, world_max.y() - (iy + 0.5) / px_per_m};
  }
};

// Alpha-composites splats onto a top-down canvas. Draw order is opacity
// ascending (ties by index), so the most opaque splats land on top; each
// splat paints its 5-sigma ellipse.
inline Image render_birdseye(const SplatMap& map, const BirdseyeFrame& frame,
                             const Eigen::Vector3d& background = {1, 1, 1},
                             const RenderParams& rp = {}) {
  Image img(frame.width(), frame.height(), background);
  std::vector<int> order(map.splats.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double oa = map.splats[a].opacity(), ob = map.splats[b].opacity();
    return oa != ob ? oa < ob : a < b;
  });
  for (int k : order) {
    const Splat2D& s = map.splats[k];
    const double c0 = std::cos(s.theta), s0 = std::sin(s.theta);
    Eigen::Matrix2d Rs;
    Rs << c0, -s0, s0, c0;
    Eigen::Vector2d sc;
    for (int j = 0; j < 2; ++j) {
      sc[j] = std::clamp(std::exp(s.log_scales[j]), rp.scale_min_m, rp.scale_max_m);
    }
    const Eigen::Matrix2d sigma = Rs * Eigen::Vector2d(sc[0] * sc[0], sc[1] * sc[1]).asDiagonal() *
                                  Rs.transpose();
    const Eigen::Matrix2d sigma_inv = sigma.inverse();
    const double rx = 5.0 * std::sqrt(sigma(0, 0)), ry = 5.0 * std::sqrt(sigma(1, 1));
    const Eigen::Vector2d lo_px = frame.to_px({s.mean.x() - rx, s.mean.y() + ry});
    const Eigen::Vector2d hi_px = frame.to_px({s.mean.x() + rx, s.mean.y() - ry});
    const int x0 = std::max(0, static_cast<int>(std::floor(lo_px.x())));
    const int y0 = std::max(0, static_cast<int>(std::floor(lo_px.y())));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(hi_px.x())));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(hi_px.y())));
    const double o = s.opacity();
    const Eigen::Vector3d col(std::clamp(s.color.x(), 0.0, 1.0), std::clamp(s.color.y(), 0.0, 1.0),
                              std::clamp(s.color.z(), 0.0, 1.0));
    for (int iy = y0; iy <= y1; ++iy) {
      for (int ix = x0; ix <= x1; ++ix) {
        const Eigen::Vector2d d = frame.px_center_world(ix, iy) - s.mean;
        const double e = d.dot(sigma_inv * d);
        if (e > 25.0) continue;
        const double a = std::min(o * std::exp(-0.5 * e), rp.alpha_max);
        img.at(ix, iy) = a * col + (1.0 - a) * img.at(ix, iy);
      }
    }
  }
  return img;
}

}  // namespace activemap
