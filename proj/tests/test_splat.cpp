#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "activemap/rng.hpp"
#include "activemap/splat.hpp"

using namespace activemap;
using Catch::Matchers::WithinAbs;

TEST_CASE("flat parameter indexing is a bijection") {
  Splat2D s;
  for (int i = 0; i < Splat2D::kParams; ++i) s.set_param(i, 10.0 + i);
  CHECK(s.mean.x() == 10.0);
  CHECK(s.mean.y() == 11.0);
  CHECK(s.color.x() == 12.0);
  CHECK(s.color.y() == 13.0);
  CHECK(s.color.z() == 14.0);
  CHECK(s.theta == 15.0);
  CHECK(s.log_scales.x() == 16.0);
  CHECK(s.log_scales.y() == 17.0);
  CHECK(s.opacity_logit == 18.0);
  for (int i = 0; i < Splat2D::kParams; ++i) CHECK(s.param(i) == 10.0 + i);
  CHECK_THROWS_AS(s.param(9), std::out_of_range);
}

TEST_CASE("map-level flat parameters round trip") {
  Rng rng = make_rng(3, 0);
  SplatMap map;
  map.splats.resize(4);
  for (auto& s : map.splats) {
    for (int i = 0; i < Splat2D::kParams; ++i) s.set_param(i, uniform(rng, -3, 3));
  }
  const Eigen::VectorXd p = map.params();
  REQUIRE(p.size() == 36);
  SplatMap other;
  other.splats.resize(4);
  other.set_params(p);
  CHECK((other.params() - p).norm() == 0.0);
  CHECK(map.param(13) == map.splats[1].param(4));
}

TEST_CASE("sigmoid and logit are inverse on the open interval") {
  for (const double p : {1e-6, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0 - 1e-6}) {
    CHECK_THAT(sigmoid(logit(p)), WithinAbs(p, 1e-12));
  }
  CHECK(std::isfinite(logit(0.0)));
  CHECK(std::isfinite(logit(1.0)));
}

TEST_CASE("splat map files round trip exactly") {
  Rng rng = make_rng(5, 0);
  SplatMap map;
  map.splats.resize(17);
  for (auto& s : map.splats) {
    for (int i = 0; i < Splat2D::kParams; ++i) s.set_param(i, uniform(rng, -5, 5));
  }
  const auto path = std::filesystem::temp_directory_path() / "am_test_roundtrip.splat";
  save_splat_map(path.string(), map);
  const SplatMap back = load_splat_map(path.string());
  REQUIRE(back.size() == map.size());
  CHECK((back.params() - map.params()).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("loading rejects non-map files") {
  const auto path = std::filesystem::temp_directory_path() / "am_test_bogus.splat";
  {
    std::ofstream f(path);
    f << "definitely not a splat map";
  }
  CHECK_THROWS(load_splat_map(path.string()));
  std::filesystem::remove(path);
  CHECK_THROWS(load_splat_map((path / "missing").string()));
}
