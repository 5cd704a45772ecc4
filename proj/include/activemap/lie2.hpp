#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace activemap {

inline constexpr double kPi = std::numbers::pi;

// Wraps an angle to (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// 90-degree rotation generator, d/dtheta R(theta) = J * R(theta).
inline Eigen::Matrix2d so2_generator() {
  Eigen::Matrix2d j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

// Tangent vector of SE(2): linear part (vx, vy) then angular rate.
struct Tangent2 {
  Eigen::Vector2d v{0.0, 0.0};
  double omega{0.0};

  Tangent2() = default;
  Tangent2(double vx, double vy, double w) : v(vx, vy), omega(w) {}

  Eigen::Vector3d vec() const { return {v.x(), v.y(), omega}; }
  static Tangent2 from_vec(const Eigen::Vector3d& t) { return {t.x(), t.y(), t.z()}; }
  double norm() const { return vec().norm(); }
};

// Rigid transform on the plane. Composition is map-frame on the left:
// (a * b).act(p) == a.act(b.act(p)). The angle is kept in (-pi, pi].
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double theta) : t_(x, y), theta_(normalize_angle(theta)) {}
  Pose2(const Eigen::Vector2d& t, double theta) : t_(t), theta_(normalize_angle(theta)) {}

  static Pose2 identity() { return {}; }

  const Eigen::Vector2d& translation() const { return t_; }
  double x() const { return t_.x(); }
  double y() const { return t_.y(); }
  double theta() const { return theta_; }

  Eigen::Matrix2d rotation() const {
    const double c = std::cos(theta_), s = std::sin(theta_);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
  }

  // Unit vectors of the body frame expressed in the world frame.
  Eigen::Vector2d heading() const { return {std::cos(theta_), std::sin(theta_)}; }
  Eigen::Vector2d left() const { return {-std::sin(theta_), std::cos(theta_)}; }

  Eigen::Vector2d act(const Eigen::Vector2d& p) const { return rotation() * p + t_; }

  Pose2 inverse() const {
    const Eigen::Matrix2d rt = rotation().transpose();
    return {Eigen::Vector2d(-(rt * t_)), -theta_};
  }

  friend Pose2 operator*(const Pose2& a, const Pose2& b) {
    return {a.rotation() * b.t_ + a.t_, a.theta_ + b.theta_};
  }

 private:
  Eigen::Vector2d t_{0.0, 0.0};
  double theta_{0.0};
};

namespace detail {

// V(omega) coefficients: V = [[A, -B], [B, A]], t = V * v in exp.
inline void se2_v_coeffs(double w, double& a, double& b) {
  if (std::abs(w) < 1e-8) {
    const double w2 = w * w;
    a = 1.0 - w2 / 6.0;
    b = 0.5 * w - w2 * w / 24.0;
  } else {
    a = std::sin(w) / w;
    b = (1.0 - std::cos(w)) / w;
  }
}

}  // namespace detail

inline Pose2 exp(const Tangent2& tau) {
  double a, b;
  detail::se2_v_coeffs(tau.omega, a, b);
  const Eigen::Vector2d t(a * tau.v.x() - b * tau.v.y(), b * tau.v.x() + a * tau.v.y());
  return {t, tau.omega};
}

// Inverse of exp on the normalized domain. The rotation-pi pose has no
// distinguished logarithm, so it is rejected.
inline Tangent2 log(const Pose2& p) {
  const double w = p.theta();
  if (std::abs(w) >= kPi - 1e-12) {
    throw std::domain_error("Pose2 log: rotation angle too close to pi");
  }
  double a, b;
  detail::se2_v_coeffs(w, a, b);
  const double det = a * a + b * b;
  const Eigen::Vector2d& t = p.translation();
  Tangent2 tau;
  tau.v = Eigen::Vector2d(a * t.x() + b * t.y(), -b * t.x() + a * t.y()) / det;
  tau.omega = w;
  return tau;
}

}  // namespace activemap
