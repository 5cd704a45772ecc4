#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "activemap/fisher.hpp"
#include "activemap/render.hpp"
#include "activemap/rng.hpp"
#include "activemap/world.hpp"

namespace activemap {

inline constexpr double kPsnrCapDb = 100.0;

// Color PSNR for [0,1] data, 10*log10(1/MSE), capped for identical inputs.
inline double psnr(const Observation& rendered, const Observation& reference) {
  if (rendered.width() != reference.width()) {
    throw std::invalid_argument("psnr: width mismatch");
  }
  double se = 0.0;
  for (int i = 0; i < rendered.width(); ++i) {
    se += (rendered.color[static_cast<size_t>(i)] - reference.color[static_cast<size_t>(i)])
              .squaredNorm();
  }
  const double mse = se / (3.0 * rendered.width());
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

inline double depth_mae(const Observation& rendered, const Observation& reference) {
  if (rendered.width() != reference.width()) {
    throw std::invalid_argument("depth_mae: width mismatch");
  }
  double ae = 0.0;
  for (int i = 0; i < rendered.width(); ++i) {
    ae += std::abs(rendered.depth[static_cast<size_t>(i)] -
                   reference.depth[static_cast<size_t>(i)]);
  }
  return ae / rendered.width();
}

// RMS translational error after rigidly aligning the first estimated pose
// onto the first ground-truth pose (no global trajectory alignment; the
// convention is fixed so numbers compare across runs).
inline double rmse_ate(const std::vector<Pose2>& est, const std::vector<Pose2>& gt) {
  if (est.size() != gt.size()) throw std::invalid_argument("rmse_ate: length mismatch");
  if (est.empty()) throw std::invalid_argument("rmse_ate: empty trajectories");
  const Pose2 align = gt.front() * est.front().inverse();
  double se = 0.0;
  for (size_t i = 0; i < est.size(); ++i) {
    se += ((align * est[i]).translation() - gt[i].translation()).squaredNorm();
  }
  return std::sqrt(se / static_cast<double>(est.size()));
}

// Pearson correlation; throws when either series has no variance.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson: need two equal-length series");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw std::domain_error("pearson: degenerate variance, correlation undefined");
  }
  return sxy / std::sqrt(sxx * syy);
}

struct ScatterResult {
  std::vector<double> eig;
  std::vector<double> psnr;
  double pearson_r = 0.0;
};

// Per-pose information gain (computed without ground truth) against the
// per-pose render quality (computed with it). A healthy half-explored map
// shows anticorrelation: the gain is high exactly where rendering is poor.
inline ScatterResult eig_psnr_scatter(const SplatMap& map, const World& world,
                                      std::span<const Pose2> poses, const Camera1D& cam,
                                      const FisherDiag& model, const RenderParams& rp = {}) {
  if (poses.size() < 30) throw std::invalid_argument("eig_psnr_scatter: need at least 30 poses");
  ScatterResult out;
  out.eig.reserve(poses.size());
  out.psnr.reserve(poses.size());
  for (const Pose2& p : poses) {
    out.eig.push_back(expected_information_gain(hessian_diag(map, p, cam, 0.0, rp), model));
    out.psnr.push_back(psnr(render(map, p, cam, rp), sense(world, p, cam)));
  }
  out.pearson_r = pearson(out.eig, out.psnr);
  return out;
}

// Held-out poses for evaluation: positions drawn without replacement from
// the ground-truth navigable cell centers, each with four axis-aligned
// headings.
inline std::vector<Pose2> sample_eval_poses(const World& world, double resolution, int positions,
                                            Rng& rng, double clearance = 0.1) {
  std::vector<Eigen::Vector2d> centers = reachable_free_centers(world, resolution, clearance);
  if (centers.empty()) throw std::runtime_error("sample_eval_poses: no navigable space");
  std::vector<size_t> order(centers.size());
  std::iota(order.begin(), order.end(), size_t{0});
  // Partial Fisher-Yates keeps the draw count independent of list size.
  const size_t take = std::min(static_cast<size_t>(positions), centers.size());
  for (size_t i = 0; i < take; ++i) {
    const size_t j =
        i + static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(order.size() - i) - 1));
    std::swap(order[i], order[j]);
  }
  std::vector<Pose2> poses;
  poses.reserve(take * 4);
  for (size_t i = 0; i < take; ++i) {
    for (int h = 0; h < 4; ++h) {
      poses.emplace_back(centers[order[i]], h * kPi / 2.0);
    }
  }
  return poses;
}

struct EvalResult {
  double psnr_mean = 0.0;
  double depth_mae_mean = 0.0;
  int n_poses = 0;
};

inline EvalResult evaluate_render_quality(const SplatMap& map, const World& world,
                                          std::span<const Pose2> poses, const Camera1D& cam,
                                          const RenderParams& rp = {}) {
  EvalResult out;
  for (const Pose2& p : poses) {
    const Observation ref = sense(world, p, cam);
    const Observation got = render(map, p, cam, rp);
    out.psnr_mean += psnr(got, ref);
    out.depth_mae_mean += depth_mae(got, ref);
    ++out.n_poses;
  }
  if (out.n_poses > 0) {
    out.psnr_mean /= out.n_poses;
    out.depth_mae_mean /= out.n_poses;
  }
  return out;
}

namespace detail {

inline std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace detail

struct MetricsRow {
  int step = 0;
  double psnr_mean = 0.0;
  double depth_mae = 0.0;
  double ate = 0.0;
  double completeness = 0.0;
};

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << "step,psnr_mean,depth_mae,ate,completeness\n";
  for (const MetricsRow& r : rows) {
    out << r.step << ',' << detail::csv_num(r.psnr_mean) << ',' << detail::csv_num(r.depth_mae)
        << ',' << detail::csv_num(r.ate) << ',' << detail::csv_num(r.completeness) << '\n';
  }
}

inline void write_scatter_csv(const std::string& path, const ScatterResult& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_scatter_csv: cannot open " + path);
  out << "pose_id,eig,psnr\n";
  for (size_t i = 0; i < s.eig.size(); ++i) {
    out << i << ',' << detail::csv_num(s.eig[i]) << ',' << detail::csv_num(s.psnr[i]) << '\n';
  }
}

}  // namespace activemap
