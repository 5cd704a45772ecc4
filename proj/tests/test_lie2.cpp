#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "activemap/lie2.hpp"
#include "activemap/rng.hpp"

using namespace activemap;
using Catch::Matchers::WithinAbs;

TEST_CASE("normalize_angle wraps to the half-open interval") {
  CHECK_THAT(normalize_angle(0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(normalize_angle(kPi + 0.1), WithinAbs(-kPi + 0.1, 1e-12));
  CHECK_THAT(normalize_angle(-kPi - 0.1), WithinAbs(kPi - 0.1, 1e-12));
  CHECK_THAT(normalize_angle(kPi), WithinAbs(kPi, 0.0));
  CHECK_THAT(normalize_angle(-kPi), WithinAbs(kPi, 1e-12));
  CHECK_THAT(normalize_angle(7.0 * kPi + 0.25), WithinAbs(-kPi + 0.25, 1e-12));
}

TEST_CASE("exp of a pure translation is a translation") {
  const Pose2 p = exp(Tangent2{0.3, -0.7, 0.0});
  CHECK_THAT(p.x(), WithinAbs(0.3, 1e-15));
  CHECK_THAT(p.y(), WithinAbs(-0.7, 1e-15));
  CHECK_THAT(p.theta(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("exp of a quarter-turn twist lands on the analytic arc") {
  // Hand-computed closed form: V(pi/2) has A = B = 2/pi, so the unit-x
  // twist with omega = pi/2 translates to (2/pi, 2/pi).
  const Pose2 p = exp(Tangent2{1.0, 0.0, kPi / 2.0});
  CHECK_THAT(p.x(), WithinAbs(2.0 / kPi, 1e-14));
  CHECK_THAT(p.y(), WithinAbs(2.0 / kPi, 1e-14));
  CHECK_THAT(p.theta(), WithinAbs(kPi / 2.0, 1e-14));
}

TEST_CASE("log inverts exp across the domain") {
  Rng rng = make_rng(7, 0);
  for (int i = 0; i < 200; ++i) {
    const Tangent2 tau{uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0),
                       uniform(rng, -kPi + 1e-3, kPi - 1e-3)};
    const Tangent2 back = log(exp(tau));
    CHECK_THAT((back.vec() - tau.vec()).norm(), WithinAbs(0.0, 1e-10));
  }
}

TEST_CASE("log is stable through the small-angle branch") {
  for (const double w : {1e-12, 1e-9, 1e-7, -1e-9}) {
    const Tangent2 tau{0.5, -0.25, w};
    const Tangent2 back = log(exp(tau));
    CHECK_THAT((back.vec() - tau.vec()).norm(), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("log rejects the rotation-pi pose") {
  CHECK_THROWS_AS(log(Pose2(0.0, 0.0, kPi)), std::domain_error);
  CHECK_THROWS_AS(log(Pose2(1.0, 2.0, -kPi)), std::domain_error);
}

TEST_CASE("composition and inverse satisfy the group laws") {
  Rng rng = make_rng(11, 0);
  for (int i = 0; i < 100; ++i) {
    const Pose2 a(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -4, 4));
    const Pose2 b(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -4, 4));
    const Pose2 c(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -4, 4));
    const Eigen::Vector2d p(uniform(rng, -2, 2), uniform(rng, -2, 2));

    // Associativity through action on a point.
    const Eigen::Vector2d lhs = ((a * b) * c).act(p);
    const Eigen::Vector2d rhs = (a * (b * c)).act(p);
    CHECK_THAT((lhs - rhs).norm(), WithinAbs(0.0, 1e-12));

    // Inverse both ways.
    const Pose2 e1 = a * a.inverse();
    const Pose2 e2 = a.inverse() * a;
    CHECK_THAT(e1.translation().norm(), WithinAbs(0.0, 1e-12));
    CHECK_THAT(normalize_angle(e1.theta()), WithinAbs(0.0, 1e-12));
    CHECK_THAT(e2.translation().norm(), WithinAbs(0.0, 1e-12));

    // Action composes.
    CHECK_THAT(((a * b).act(p) - a.act(b.act(p))).norm(), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("rotation matrix is orthonormal") {
  Rng rng = make_rng(13, 0);
  for (int i = 0; i < 50; ++i) {
    const Pose2 a(0, 0, uniform(rng, -10, 10));
    const Eigen::Matrix2d R = a.rotation();
    CHECK_THAT((R * R.transpose() - Eigen::Matrix2d::Identity()).norm(), WithinAbs(0.0, 1e-14));
    CHECK_THAT(R.determinant(), WithinAbs(1.0, 1e-14));
  }
}

TEST_CASE("left perturbation matches the analytic directional derivative") {
  // Oracle: for the linear functional g(p) = c . (x, y, theta), the
  // directional derivative of g(Exp(eps e_i) * p) at eps = 0 is, by hand:
  //   e_1: c1,  e_2: c2,  e_3: c1 * (-y) + c2 * x + c3.
  Rng rng = make_rng(17, 0);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Pose2 p(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -2, 2));
    const Eigen::Vector3d c(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const auto g = [&](const Pose2& q) {
      return c.x() * q.x() + c.y() * q.y() + c.z() * q.theta();
    };
    const Eigen::Vector3d analytic(c.x(), c.y(), c.x() * -p.y() + c.y() * p.x() + c.z());
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[axis] = 1.0;
      const Pose2 plus = exp(Tangent2::from_vec(h * e)) * p;
      const Pose2 minus = exp(Tangent2::from_vec(-h * e)) * p;
      const double fd = (g(plus) - g(minus)) / (2.0 * h);
      CHECK_THAT(fd, WithinAbs(analytic[axis], 1e-7));
    }
  }
}
