#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "activemap/lie2.hpp"

namespace activemap {

// 1D pinhole scan camera. Rays live in the body frame with +x forward and
// +y left; pixel 0 looks left-most and pixel width-1 right-most. Pixels are
// spaced uniformly in tan space, so pixel i (center) has
//   tan(bearing_i) = (1 - 2*(i + 0.5)/width) * tan(fov/2).
// The same convention drives rendering, projection Jacobians and the range
// sensor, which keeps the three exactly aligned.
struct Camera1D {
  int width = 64;
  double fov_rad = kPi / 2.0;
  double max_depth = 8.0;

  double tan_half() const { return std::tan(0.5 * fov_rad); }

  // Focal length in pixels for the tan-space parameterization.
  double focal_px() const { return width / (2.0 * tan_half()); }

  // tan(bearing) of the center of pixel i.
  double pixel_tan(int i) const {
    return (1.0 - 2.0 * (i + 0.5) / width) * tan_half();
  }

  // Unit ray direction of pixel i in the body frame.
  Eigen::Vector2d ray_dir_body(int i) const {
    return Eigen::Vector2d(1.0, pixel_tan(i)).normalized();
  }

  // Continuous pixel coordinate of a body-frame point (x forward, y left).
  // Requires x > 0.
  double project(const Eigen::Vector2d& p_body) const {
    return 0.5 * (width - 1) - focal_px() * (p_body.y() / p_body.x());
  }

  // d(project)/d(p_body) at a body-frame point.
  Eigen::Vector2d project_grad(const Eigen::Vector2d& p_body) const {
    const double x = p_body.x(), y = p_body.y();
    const double f = focal_px();
    return {f * y / (x * x), -f / x};
  }

  void validate() const {
    if (width < 1) throw std::invalid_argument("Camera1D: width must be >= 1");
    if (!(fov_rad > 0.0) || fov_rad >= kPi) {
      throw std::invalid_argument("Camera1D: fov must be in (0, pi)");
    }
    if (!(max_depth > 0.0)) throw std::invalid_argument("Camera1D: max_depth must be > 0");
  }
};

}  // namespace activemap
