#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "activemap/metrics.hpp"
#include "support/worlds.hpp"

using namespace activemap;

namespace {

Observation flat_obs(int w, const Eigen::Vector3d& color, double depth) {
  Observation o;
  o.color.assign(static_cast<size_t>(w), color);
  o.depth.assign(static_cast<size_t>(w), depth);
  return o;
}

}  // namespace

TEST_CASE("psnr closed-form anchors") {
  const Observation a = flat_obs(16, {0.5, 0.5, 0.5}, 1.0);
  CHECK(psnr(a, a) == 100.0);

  // Every channel off by 0.1: MSE = 0.01, PSNR = 20 dB.
  const Observation b = flat_obs(16, {0.6, 0.6, 0.6}, 1.0);
  CHECK_THAT(psnr(a, b), Catch::Matchers::WithinAbs(20.0, 1e-12));

  const Observation zero = flat_obs(16, {0.0, 0.0, 0.0}, 1.0);
  const Observation one = flat_obs(16, {1.0, 1.0, 1.0}, 1.0);
  CHECK_THAT(psnr(zero, one), Catch::Matchers::WithinAbs(0.0, 1e-12));

  CHECK_THROWS_AS(psnr(a, flat_obs(8, {0, 0, 0}, 1.0)), std::invalid_argument);
}

TEST_CASE("depth_mae arithmetic") {
  const Observation a = flat_obs(8, {0, 0, 0}, 2.0);
  CHECK(depth_mae(a, a) == 0.0);
  CHECK_THAT(depth_mae(flat_obs(8, {0, 0, 0}, 2.1), a),
             Catch::Matchers::WithinAbs(0.1, 1e-12));

  Observation mixed = a;
  mixed.depth = {2.0, 2.5, 1.0, 2.0, 3.0, 2.0, 1.5, 2.25};
  // Hand sum: 0 + .5 + 1 + 0 + 1 + 0 + .5 + .25 = 3.25 over 8 pixels.
  CHECK_THAT(depth_mae(mixed, a), Catch::Matchers::WithinAbs(3.25 / 8.0, 1e-12));
  CHECK_THROWS_AS(depth_mae(a, flat_obs(4, {0, 0, 0}, 1.0)), std::invalid_argument);
}

TEST_CASE("rmse_ate aligns the first pose then scores translations") {
  std::vector<Pose2> gt;
  for (int i = 0; i < 20; ++i) {
    gt.emplace_back(Eigen::Vector2d(0.1 * i, 0.05 * i), 0.1 * i);
  }
  CHECK(rmse_ate(gt, gt) == 0.0);

  // A constant left offset of the whole estimated trajectory is removed
  // exactly by the first-pose alignment.
  const Pose2 offset(Eigen::Vector2d(0.7, -0.3), 0.4);
  std::vector<Pose2> shifted;
  for (const Pose2& p : gt) shifted.push_back(offset * p);
  CHECK_THAT(rmse_ate(shifted, gt), Catch::Matchers::WithinAbs(0.0, 1e-12));

  // Per-pose drift: compare against the formula evaluated by hand.
  std::vector<Pose2> drift = gt;
  double se = 0.0;
  for (size_t i = 1; i < drift.size(); ++i) {
    const double d = 0.01 * static_cast<double>(i);
    drift[i] = Pose2(gt[i].translation() + Eigen::Vector2d(d, 0.0), gt[i].theta());
    se += d * d;
  }
  CHECK_THAT(rmse_ate(drift, gt),
             Catch::Matchers::WithinAbs(std::sqrt(se / drift.size()), 1e-12));

  // Constant 0.1 m offset on all but the pinned first pose.
  std::vector<Pose2> off = gt;
  for (size_t i = 1; i < off.size(); ++i) {
    off[i] = Pose2(gt[i].translation() + Eigen::Vector2d(0.0, 0.1), gt[i].theta());
  }
  CHECK_THAT(rmse_ate(off, gt),
             Catch::Matchers::WithinAbs(0.1 * std::sqrt(19.0 / 20.0), 1e-12));

  CHECK_THROWS_AS(rmse_ate(gt, std::vector<Pose2>(gt.begin(), gt.begin() + 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rmse_ate({}, {}), std::invalid_argument);
}

TEST_CASE("pearson matches a direct computation and rejects flat series") {
  CHECK_THAT(pearson({1, 2, 3}, {2, 4, 6}), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(pearson({1, 2, 3}, {6, 4, 2}), Catch::Matchers::WithinAbs(-1.0, 1e-12));

  Rng rng = make_rng(5, 0x7374);
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    x.push_back(uniform(rng, -1.0, 1.0));
    y.push_back(0.3 * x.back() + uniform(rng, -0.5, 0.5));
  }
  // Independent oracle: textbook two-pass formula on long doubles.
  long double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double want = static_cast<double>(sxy / std::sqrt(sxx * syy));
  CHECK_THAT(pearson(x, y), Catch::Matchers::WithinAbs(want, 1e-12));

  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), std::domain_error);
  CHECK_THROWS_AS(pearson({1}, {2}), std::invalid_argument);
}

namespace {

// Scatter scene: wall A's appearance is captured by well-observed splats,
// wall B is covered only by random seeded splats the model knows nothing
// about. Poses facing A render well and gain little; poses facing B render
// poorly and gain a lot.
struct ScatterScene {
  World world;
  SplatMap map;
  Camera1D cam;
  FisherDiag model;
  std::vector<Pose2> poses;
};

ScatterScene make_scatter_scene() {
  ScatterScene s;
  s.world = testsupport::make_box_world(2.0, 2.0, 0.0);  // solid gray walls
  Rng rng = make_rng(31, 0x7363);

  // Wall A at x = +2: splats that match its color exactly.
  for (int i = -38; i <= 38; ++i) {
    Splat2D sp;
    sp.mean = Eigen::Vector2d(2.0, 0.05 * i);
    sp.color = Eigen::Vector3d(0.5, 0.5, 0.5);
    sp.theta = 0.0;
    sp.log_scales = Eigen::Vector2d(std::log(0.04), std::log(0.04));
    sp.opacity_logit = 4.0;
    s.map.splats.push_back(sp);
  }
  // Wall B at x = -2: fresh random splats, never observed by the model.
  for (int i = 0; i < 60; ++i) {
    Splat2D sp;
    sp.mean = Eigen::Vector2d(-2.0 + uniform(rng, -0.03, 0.03), uniform(rng, -1.9, 1.9));
    sp.color = Eigen::Vector3d(uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0),
                               uniform(rng, 0.0, 1.0));
    sp.theta = uniform(rng, -kPi, kPi);
    sp.log_scales = Eigen::Vector2d(std::log(0.05), std::log(0.05));
    sp.opacity_logit = 1.0;
    s.map.splats.push_back(sp);
  }

  std::vector<Pose2> seen;
  for (int i = -2; i <= 2; ++i) {
    seen.emplace_back(Eigen::Vector2d(0.0, 0.4 * i), 0.0);  // facing wall A
  }
  s.model = mc_model_fisher(s.map, seen, s.cam, 1e-6);

  for (int i = 0; i < 15; ++i) {
    s.poses.emplace_back(Eigen::Vector2d(0.0, -1.4 + 0.2 * i), 0.0);   // toward A
    s.poses.emplace_back(Eigen::Vector2d(0.0, -1.4 + 0.2 * i), kPi);  // toward B
  }
  return s;
}

}  // namespace

TEST_CASE("eig_psnr_scatter anticorrelates on a half-explored scene") {
  ScatterScene s = make_scatter_scene();
  const ScatterResult r = eig_psnr_scatter(s.map, s.world, s.poses, s.cam, s.model);
  REQUIRE(r.eig.size() == s.poses.size());
  CHECK(r.pearson_r < -0.3);

  // Statistics oracle: the reported correlation is the correlation of the
  // reported series.
  CHECK_THAT(r.pearson_r, Catch::Matchers::WithinAbs(pearson(r.eig, r.psnr), 1e-12));

  // Pose-count gate.
  const std::vector<Pose2> few(s.poses.begin(), s.poses.begin() + 10);
  CHECK_THROWS_AS(eig_psnr_scatter(s.map, s.world, few, s.cam, s.model),
                  std::invalid_argument);
}

TEST_CASE("sample_eval_poses draws navigable positions with four headings") {
  const World world = testsupport::make_box_world(1.5, 1.0);
  const double res = 0.05;
  const auto centers = reachable_free_centers(world, res, 0.1);
  std::set<std::pair<long, long>> navigable;
  for (const auto& c : centers) {
    navigable.insert({std::lround(c.x() * 1000), std::lround(c.y() * 1000)});
  }

  Rng rng = make_rng(9, 0x6576);
  const auto poses = sample_eval_poses(world, res, 50, rng);
  REQUIRE(poses.size() == 200);
  std::set<std::pair<long, long>> positions;
  for (size_t i = 0; i < poses.size(); i += 4) {
    const auto& p = poses[i].translation();
    positions.insert({std::lround(p.x() * 1000), std::lround(p.y() * 1000)});
    CHECK(navigable.count({std::lround(p.x() * 1000), std::lround(p.y() * 1000)}) == 1);
    for (int h = 0; h < 4; ++h) {
      CHECK(poses[i + h].translation() == poses[i].translation());
      CHECK_THAT(normalize_angle(poses[i + h].theta() - h * kPi / 2.0),
                 Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
  }
  CHECK(positions.size() == 50);  // sampled without replacement

  Rng rng2 = make_rng(9, 0x6576);
  const auto again = sample_eval_poses(world, res, 50, rng2);
  REQUIRE(again.size() == poses.size());
  for (size_t i = 0; i < poses.size(); ++i) {
    CHECK(again[i].translation() == poses[i].translation());
  }

  // Asking for more positions than exist returns them all, once.
  Rng rng3 = make_rng(9, 0x6577);
  const auto all = sample_eval_poses(world, res, 1 << 20, rng3);
  CHECK(all.size() == centers.size() * 4);
}

TEST_CASE("csv writers emit the documented columns") {
  const std::string mpath = "metrics_test.csv", spath = "scatter_test.csv";
  write_metrics_csv(mpath, {{0, 21.5, 0.3, 0.01, 0.25}, {50, 24.0, 0.2, 0.02, 0.5}});
  {
    std::ifstream in(mpath);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "step,psnr_mean,depth_mae,ate,completeness");
    REQUIRE(std::getline(in, line));
    CHECK(line == "0,21.5,0.3,0.01,0.25");
    REQUIRE(std::getline(in, line));
    CHECK(line == "50,24,0.2,0.02,0.5");
    CHECK_FALSE(std::getline(in, line));
  }

  ScatterResult s;
  s.eig = {1.5, 2.5};
  s.psnr = {30.0, 28.0};
  write_scatter_csv(spath, s);
  {
    std::ifstream in(spath);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "pose_id,eig,psnr");
    REQUIRE(std::getline(in, line));
    CHECK(line == "0,1.5,30");
    REQUIRE(std::getline(in, line));
    CHECK(line == "1,2.5,28");
  }
  std::remove(mpath.c_str());
  std::remove(spath.c_str());
}

TEST_CASE("render-quality evaluation improves with a matching map") {
  const World world = testsupport::make_box_world(2.0, 2.0, 0.0);
  Camera1D cam;
  std::vector<Pose2> poses = {Pose2(Eigen::Vector2d(0, 0), 0.0),
                              Pose2(Eigen::Vector2d(0, 0.5), 0.0)};

  SplatMap empty;
  const EvalResult bare = evaluate_render_quality(empty, world, poses, cam);
  CHECK(bare.n_poses == 2);

  SplatMap wall;
  for (int i = -40; i <= 40; ++i) {
    Splat2D sp;
    sp.mean = Eigen::Vector2d(2.0, 0.05 * i);
    sp.color = Eigen::Vector3d(0.5, 0.5, 0.5);
    sp.log_scales = Eigen::Vector2d(std::log(0.04), std::log(0.04));
    sp.opacity_logit = 4.0;
    wall.splats.push_back(sp);
  }
  const EvalResult fit = evaluate_render_quality(wall, world, poses, cam);
  CHECK(fit.psnr_mean > bare.psnr_mean + 3.0);
  CHECK(fit.depth_mae_mean < bare.depth_mae_mean);
}
