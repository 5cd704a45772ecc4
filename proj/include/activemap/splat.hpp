#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace activemap {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Inverse of sigmoid on (0, 1); the argument is nudged inside the open
// interval so sampled endpoints stay finite.
inline double logit(double p) {
  const double q = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

// Anisotropic 2D Gaussian primitive. Scales are stored as log standard
// deviations (meters); opacity as a logit. The world-frame covariance is
// R(theta) * diag(exp(log_scales)^2) * R(theta)^T.
struct Splat2D {
  Eigen::Vector2d mean{0.0, 0.0};
  Eigen::Vector3d color{0.5, 0.5, 0.5};  // RGB in [0, 1]
  double theta = 0.0;
  Eigen::Vector2d log_scales{std::log(0.05), std::log(0.05)};
  double opacity_logit = 0.0;

  static constexpr int kParams = 9;

  // Flat parameter order (fixed contract used by every Jacobian and by the
  // map file format):
  //   0 mean.x, 1 mean.y, 2 color.r, 3 color.g, 4 color.b,
  //   5 theta, 6 log_scales.x, 7 log_scales.y, 8 opacity_logit
  double param(int i) const {
    switch (i) {
      case 0: return mean.x();
      case 1: return mean.y();
      case 2: return color.x();
      case 3: return color.y();
      case 4: return color.z();
      case 5: return theta;
      case 6: return log_scales.x();
      case 7: return log_scales.y();
      case 8: return opacity_logit;
      default: throw std::out_of_range("Splat2D::param index");
    }
  }

  void set_param(int i, double v) {
    switch (i) {
      case 0: mean.x() = v; break;
      case 1: mean.y() = v; break;
      case 2: color.x() = v; break;
      case 3: color.y() = v; break;
      case 4: color.z() = v; break;
      case 5: theta = v; break;
      case 6: log_scales.x() = v; break;
      case 7: log_scales.y() = v; break;
      case 8: opacity_logit = v; break;
      default: throw std::out_of_range("Splat2D::param index");
    }
  }

  double opacity() const { return sigmoid(opacity_logit); }
};

// Ordered splat collection; the flat parameter vector of the whole map is
// the per-splat layouts concatenated in splat order.
struct SplatMap {
  std::vector<Splat2D> splats;

  int size() const { return static_cast<int>(splats.size()); }
  int param_count() const { return size() * Splat2D::kParams; }

  double param(int flat) const {
    return splats[flat / Splat2D::kParams].param(flat % Splat2D::kParams);
  }
  void set_param(int flat, double v) {
    splats[flat / Splat2D::kParams].set_param(flat % Splat2D::kParams, v);
  }

  Eigen::VectorXd params() const {
    Eigen::VectorXd out(param_count());
    for (int i = 0; i < param_count(); ++i) out[i] = param(i);
    return out;
  }
  void set_params(const Eigen::VectorXd& p) {
    if (p.size() != param_count()) throw std::invalid_argument("SplatMap: parameter size mismatch");
    for (int i = 0; i < param_count(); ++i) set_param(i, p[i]);
  }
};

// One rendered or sensed scan: per-pixel RGB in [0, 1] plus z-depth in
// meters (forward distance, not ray range).
struct Observation {
  std::vector<Eigen::Vector3d> color;
  std::vector<double> depth;

  int width() const { return static_cast<int>(depth.size()); }

  void validate() const {
    if (color.size() != depth.size()) throw std::invalid_argument("Observation: channel size mismatch");
  }
};

namespace detail {

inline constexpr char kSplatMagic[8] = {'A', 'M', 'S', 'P', 'L', 'A', 'T', '1'};

}  // namespace detail

// Map file format: 8-byte magic/version tag "AMSPLAT1", then the splat
// count as u64, then count*9 doubles in the flat parameter order. All
// fields little-endian.
inline void save_splat_map(const std::string& path, const SplatMap& map) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(detail::kSplatMagic, 8);
  const std::uint64_t n = static_cast<std::uint64_t>(map.size());
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& s : map.splats) {
    for (int i = 0; i < Splat2D::kParams; ++i) {
      const double v = s.param(i);
      f.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline SplatMap load_splat_map(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, detail::kSplatMagic, 8) != 0) {
    throw std::runtime_error("not a splat map file (bad magic): " + path);
  }
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!f) throw std::runtime_error("truncated splat map file: " + path);
  SplatMap map;
  map.splats.resize(n);
  for (auto& s : map.splats) {
    for (int i = 0; i < Splat2D::kParams; ++i) {
      double v = 0;
      f.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!f) throw std::runtime_error("truncated splat map file: " + path);
      s.set_param(i, v);
    }
  }
  return map;
}

}  // namespace activemap
