#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "activemap/episode.hpp"
#include "support/worlds.hpp"

using namespace activemap;
namespace fs = std::filesystem;

namespace {

EpisodeConfig fast_config(std::uint64_t seed) {
  EpisodeConfig cfg;
  cfg.seed = seed;
  cfg.total_steps = 80;
  cfg.camera.width = 32;
  cfg.mapping.seed_per_cell = 8;
  cfg.mapping.max_splats = 3000;
  cfg.mapping.optimize_iterations = 10;
  cfg.fisher.mc_poses = 12;
  cfg.planner.candidate_count = 8;
  cfg.planner.candidate_keep = 3;
  cfg.llm.period_steps = 40;
  cfg.eval.positions = 8;
  cfg.eval.metrics_every = 40;
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("config json round trip preserves every field") {
  EpisodeConfig cfg = fast_config(42);
  cfg.world = "somewhere/else.json";
  cfg.sensor.noise_sigma = 0.02;
  cfg.planner.eta = 7.5;
  cfg.ablation.fbe = true;
  cfg.llm.fixture_path = "fixtures/a.json";
  cfg.birdseye.px_per_m = 40.0;

  const EpisodeConfig back = config_from_json(config_to_json(cfg));
  CHECK(back == cfg);
}

TEST_CASE("config parsing is strict about keys, types, and the seed") {
  nlohmann::json ok = config_to_json(fast_config(1));
  CHECK_NOTHROW(config_from_json(ok));

  SECTION("seed is mandatory") {
    nlohmann::json j = ok;
    j.erase("seed");
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("seed"));
  }
  SECTION("unknown top-level key is reported by name") {
    nlohmann::json j = ok;
    j["plannre"] = nlohmann::json::object();
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("plannre"));
  }
  SECTION("unknown nested key carries its dotted path") {
    nlohmann::json j = ok;
    j["camera"]["widht"] = 64;
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("camera.widht"));
  }
  SECTION("type mismatches name the offending key") {
    nlohmann::json j = ok;
    j["camera"]["width"] = "wide";
    CHECK_THROWS_WITH(config_from_json(j), Catch::Matchers::ContainsSubstring("camera.width"));
  }
  SECTION("validation rejects nonsense values") {
    nlohmann::json j = ok;
    j["total_steps"] = -3;
    CHECK_THROWS_AS(config_from_json(j), std::runtime_error);
    j = ok;
    j["occupancy"]["resolution"] = 0.0;
    CHECK_THROWS_AS(config_from_json(j), std::runtime_error);
  }
  SECTION("file loader reports unreadable and unparsable input") {
    CHECK_THROWS_WITH(load_config("/nonexistent/cfg.json"),
                      Catch::Matchers::ContainsSubstring("cannot open"));
    TempDir tmp("am_cfg_bad");
    const std::string p = (tmp.path / "bad.json").string();
    std::ofstream(p) << "{ not json";
    CHECK_THROWS_WITH(load_config(p), Catch::Matchers::ContainsSubstring("not valid JSON"));
  }
}

TEST_CASE("config adapters translate into module parameters") {
  EpisodeConfig cfg = fast_config(0);
  cfg.camera.fov_deg = 90.0;
  cfg.occupancy.resolution = 0.05;
  cfg.planner.turn_threshold_deg = 5.0;

  CHECK(cfg.make_camera().fov_rad == Catch::Approx(kPi / 2.0));
  CHECK(cfg.make_camera().width == 32);
  CHECK(cfg.follow_params().waypoint_tol_m == Catch::Approx(0.025));
  CHECK(cfg.follow_params().turn_threshold_rad == Catch::Approx(5.0 * kPi / 180.0));
  CHECK(cfg.select_params().use_localization_cost);
  cfg.ablation.use_localization_cost = false;
  CHECK_FALSE(cfg.select_params().use_localization_cost);
  CHECK(cfg.seed_params().per_cell == 8);
  CHECK(cfg.optim_options().iterations == 10);
  CHECK(cfg.turn_rad() == Catch::Approx(5.0 * kPi / 180.0));
}

TEST_CASE("zero-step episode reports the initial state only") {
  const World world = testsupport::make_box_world(1.5, 1.5);
  EpisodeConfig cfg = fast_config(7);
  cfg.total_steps = 0;

  const EpisodeReport report = run_episode(world, cfg);
  REQUIRE(report.steps.size() == 1);
  CHECK(report.steps[0].step == 0);
  CHECK_FALSE(report.steps[0].acted);
  CHECK(report.steps[0].gt.translation() == world.start.translation());
  CHECK(report.steps[0].est.translation() == world.start.translation());
  REQUIRE(report.metrics.size() == 1);
  CHECK(report.metrics[0].step == 0);
  CHECK(report.metrics[0].ate == 0.0);
  CHECK(report.metrics[0].completeness == 0.0);
  CHECK(report.planner_rounds.empty());
  CHECK(report.llm_rounds.empty());
  CHECK(report.map.size() == 0);
  CHECK(report.collisions == 0);
  CHECK(trajectory_json_string(report).find("\"action\": \"none\"") != std::string::npos);

  TempDir tmp("am_episode_zero");
  write_report(report, tmp.str());
  for (const char* name : {"trajectory.json", "metrics.csv", "planner_rounds.csv", "llm_log.json",
                           "final_map.splat", "occupancy.pgm", "occupancy.json", "birdseye.png",
                           "config.json"}) {
    INFO(name);
    CHECK(fs::exists(tmp.path / name));
  }
  CHECK(load_splat_map((tmp.path / "final_map.splat").string()).size() == 0);
  CHECK(load_config((tmp.path / "config.json").string()) == cfg);
  CHECK_NOTHROW(nlohmann::json::parse(slurp(tmp.path / "trajectory.json")));
}

TEST_CASE("short episode explores, tracks, and logs consistently") {
  const World world = testsupport::make_box_world(1.5, 1.5);
  const EpisodeConfig cfg = fast_config(11);
  const EpisodeReport report = run_episode(world, cfg);

  CHECK(report.errors.empty());
  REQUIRE(report.steps.size() == 80);
  for (size_t i = 0; i < report.steps.size(); ++i) {
    CHECK(report.steps[i].step == static_cast<int>(i));
    CHECK(report.steps[i].acted);
  }

  // The map and grid actually grew.
  CHECK(report.map.size() > 0);
  CHECK(report.map.size() <= cfg.mapping.max_splats);
  CHECK(report.grid.count(CellState::Free) > 100);
  REQUIRE_FALSE(report.metrics.empty());
  CHECK(report.metrics.back().step == 80);
  CHECK(report.metrics.back().completeness > 0.05);

  // Noiseless tracking in a textured room stays near the truth.
  CHECK(report.metrics.back().ate < 0.15);
  for (const StepRecord& r : report.steps) {
    CHECK((r.gt.translation() - r.est.translation()).norm() < 0.3);
  }

  // Blocked steps stay rare when planning respects clearance.
  CHECK(report.collisions <= 4);

  // Exactly one chosen path per planning round, and it attains the round's
  // minimal objective.
  std::map<int, std::vector<const PlannerRoundRecord*>> rounds;
  REQUIRE_FALSE(report.planner_rounds.empty());
  for (const PlannerRoundRecord& r : report.planner_rounds) {
    CHECK(r.step >= 0);
    CHECK(r.step < 80);
    rounds[r.round].push_back(&r);
  }
  for (const auto& [round, rows] : rounds) {
    int chosen = 0;
    double best = std::numeric_limits<double>::infinity();
    double chosen_obj = 0.0;
    for (const auto* r : rows) {
      best = std::min(best, r->objective);
      if (r->chosen) {
        ++chosen;
        chosen_obj = r->objective;
      }
    }
    INFO("round " << round);
    CHECK(chosen == 1);
    CHECK(chosen_obj == best);
  }

  // Without an endpoint or fixture every consult falls back, in range.
  REQUIRE_FALSE(report.llm_rounds.empty());
  for (const LlmRoundRecord& r : report.llm_rounds) {
    CHECK(r.source == "fallback");
    CHECK(r.target >= -1);
    CHECK(r.target < r.frontier_count);
    CHECK(r.prompt_system.find("total of 80 steps") != std::string::npos);
    CHECK(r.prompt_system.find('<') == std::string::npos);
  }
}

TEST_CASE("identical seed and fixture reproduce the trajectory byte for byte") {
  const World world = testsupport::make_box_world(1.2, 1.2);
  TempDir tmp("am_episode_fixture");
  const std::string fixture = (tmp.path / "fixture.json").string();
  {
    nlohmann::json j = nlohmann::json::array();
    for (int round = 0; round < 10; ++round) {
      const int target = round % 3 == 2 ? -1 : round % 2;
      j.push_back({{"round", round},
                   {"response_text", "Analysis first. {\"target\": " + std::to_string(target) +
                                         ", \"reason\": \"round " + std::to_string(round) + "\"}"}});
    }
    std::ofstream(fixture) << j.dump();
  }

  EpisodeConfig cfg = fast_config(123);
  cfg.total_steps = 40;
  cfg.llm.fixture_path = fixture;

  const EpisodeReport a = run_episode(world, cfg);
  const EpisodeReport b = run_episode(world, cfg);
  CHECK(trajectory_json_string(a) == trajectory_json_string(b));
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].psnr_mean == b.metrics[i].psnr_mean);
    CHECK(a.metrics[i].ate == b.metrics[i].ate);
  }
  REQUIRE(a.map.size() == b.map.size());
  for (int i = 0; i < a.map.size(); ++i) {
    CHECK(a.map.splats[i].mean == b.map.splats[i].mean);
    CHECK(a.map.splats[i].opacity_logit == b.map.splats[i].opacity_logit);
  }

  // Fixture responses are consumed in round order and credited as such.
  bool any_fixture = false;
  for (const LlmRoundRecord& r : a.llm_rounds) {
    if (r.source == "fixture") any_fixture = true;
  }
  CHECK(any_fixture);

  // A different seed must not reproduce the same rollout.
  EpisodeConfig other = cfg;
  other.seed = 124;
  CHECK(trajectory_json_string(run_episode(world, other)) != trajectory_json_string(a));
}

TEST_CASE("ablation flags switch the decision policy") {
  const World world = testsupport::make_box_world(1.2, 1.2);
  EpisodeConfig cfg = fast_config(31);
  cfg.total_steps = 30;

  SECTION("frontier baseline never consults the model and scores by distance") {
    cfg.ablation.fbe = true;
    const EpisodeReport report = run_episode(world, cfg);
    CHECK(report.llm_rounds.empty());
    REQUIRE_FALSE(report.planner_rounds.empty());
    for (const PlannerRoundRecord& r : report.planner_rounds) {
      CHECK(r.eig_total == 0.0);
      CHECK(r.localization_total == 0.0);
      CHECK(r.poses_scored == 0);
    }
    CHECK(report.steps.size() == 30);
  }
  SECTION("disabling the llm keeps the episode silent toward it") {
    cfg.ablation.use_llm = false;
    const EpisodeReport report = run_episode(world, cfg);
    CHECK(report.llm_rounds.empty());
    CHECK_FALSE(report.planner_rounds.empty());
  }
  SECTION("disabling the localization term zeroes its contribution") {
    cfg.ablation.use_localization_cost = false;
    const EpisodeReport report = run_episode(world, cfg);
    REQUIRE_FALSE(report.planner_rounds.empty());
    for (const PlannerRoundRecord& r : report.planner_rounds) {
      CHECK(r.localization_total == 0.0);
    }
  }
}

TEST_CASE("report files round trip through their loaders") {
  const World world = testsupport::make_box_world(1.2, 1.2);
  EpisodeConfig cfg = fast_config(5);
  cfg.total_steps = 25;
  const EpisodeReport report = run_episode(world, cfg);

  TempDir tmp("am_episode_report");
  write_report(report, tmp.str());

  CHECK(slurp(tmp.path / "trajectory.json") == trajectory_json_string(report));
  const SplatMap map = load_splat_map((tmp.path / "final_map.splat").string());
  REQUIRE(map.size() == report.map.size());
  const OccupancyGrid grid =
      load_occupancy((tmp.path / "occupancy.pgm").string(), (tmp.path / "occupancy.json").string());
  CHECK(grid.count(CellState::Free) == report.grid.count(CellState::Free));
  CHECK(grid.count(CellState::Occupied) == report.grid.count(CellState::Occupied));

  const std::string metrics = slurp(tmp.path / "metrics.csv");
  CHECK(metrics.rfind("step,psnr_mean,depth_mae,ate,completeness\n", 0) == 0);
  const std::string rounds = slurp(tmp.path / "planner_rounds.csv");
  CHECK(rounds.rfind("step,round,path_index,candidate_index,eig_total,localization_total,"
                     "objective,poses_scored,degenerate,chosen\n",
                     0) == 0);
  const nlohmann::json llm = nlohmann::json::parse(slurp(tmp.path / "llm_log.json"));
  CHECK(llm.is_array());
  CHECK(llm.size() == report.llm_rounds.size());

  // The birdseye artifact is a real image of the explored window.
  CHECK(report.birdseye.width > 50);
  CHECK(report.birdseye.height > 50);
}

TEST_CASE("dead-reckoning composition matches the simulator's kinematics") {
  const World world = testsupport::make_box_world(2.0, 2.0);
  const Pose2 pose(0.3, -0.2, 0.7);
  const double fwd = 0.05, turn = 5.0 * kPi / 180.0;

  const Pose2 predicted = pose * detail::action_delta(Action::Forward, fwd, turn);
  const StepResult actual = step_action(world, pose, Action::Forward, fwd, turn);
  REQUIRE_FALSE(actual.blocked);
  CHECK((predicted.translation() - actual.pose.translation()).norm() < 1e-12);
  CHECK(predicted.theta() == Catch::Approx(actual.pose.theta()));

  const Pose2 left = pose * detail::action_delta(Action::TurnLeft, fwd, turn);
  CHECK(left.theta() == Catch::Approx(step_action(world, pose, Action::TurnLeft, fwd, turn).pose.theta()));
  CHECK(left.translation() == pose.translation());
  const Pose2 right = pose * detail::action_delta(Action::TurnRight, fwd, turn);
  CHECK(right.theta() == Catch::Approx(step_action(world, pose, Action::TurnRight, fwd, turn).pose.theta()));
}
