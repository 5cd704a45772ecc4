#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "activemap/episode.hpp"
#include "activemap/metrics.hpp"

namespace {

using namespace activemap;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> world;
  std::optional<int> steps;
  std::optional<std::string> fixture;
  std::optional<std::string> endpoint;
  bool no_localization_cost = false;
  bool no_llm = false;
  bool fbe = false;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "RNG seed (overrides config)");
  cmd->add_option("--world", ov.world, "world JSON path (overrides config)");
  cmd->add_option("--steps", ov.steps, "episode length (overrides config)");
  cmd->add_option("--fixture", ov.fixture, "recorded LLM responses (overrides config)");
  cmd->add_option("--endpoint", ov.endpoint, "chat-completions endpoint (overrides config)");
  cmd->add_flag("--no-localization-cost", ov.no_localization_cost,
                "select paths by information gain only");
  cmd->add_flag("--no-llm", ov.no_llm, "replace the language model with the largest frontier");
  cmd->add_flag("--fbe", ov.fbe, "pure nearest-frontier baseline (no information terms)");
}

EpisodeConfig resolve_config(const std::string& config_path, const Overrides& ov) {
  EpisodeConfig cfg;
  bool have_seed = false;
  if (!config_path.empty()) {
    cfg = load_config(config_path);
    have_seed = true;
  }
  if (ov.seed) {
    cfg.seed = *ov.seed;
    have_seed = true;
  }
  if (!have_seed) throw std::runtime_error("a seed is required: pass --config or --seed");
  if (ov.world) cfg.world = *ov.world;
  if (ov.steps) cfg.total_steps = *ov.steps;
  if (ov.fixture) cfg.llm.fixture_path = *ov.fixture;
  if (ov.endpoint) cfg.llm.endpoint = *ov.endpoint;
  if (ov.no_localization_cost) cfg.ablation.use_localization_cost = false;
  if (ov.no_llm) cfg.ablation.use_llm = false;
  if (ov.fbe) cfg.ablation.fbe = true;
  cfg.validate();
  return cfg;
}

void print_summary(const EpisodeReport& report) {
  std::cout << "world: " << report.world_name << "\n"
            << "steps: " << (report.steps.empty() ? 0 : report.steps.back().step + 1) << "\n"
            << "collisions: " << report.collisions << "\n"
            << "splats: " << report.map.size() << "\n"
            << "planning rounds: "
            << (report.planner_rounds.empty() ? 0 : report.planner_rounds.back().round + 1) << "\n"
            << "llm rounds: " << report.llm_rounds.size() << "\n";
  if (!report.metrics.empty()) {
    const MetricsRow& m = report.metrics.back();
    std::cout << "final psnr_mean: " << m.psnr_mean << " dB\n"
              << "final depth_mae: " << m.depth_mae << " m\n"
              << "final ate: " << m.ate << " m\n"
              << "final completeness: " << m.completeness << "\n";
  }
  for (const std::string& e : report.errors) std::cout << "warning: " << e << "\n";
}

int cmd_run(const std::string& config_path, const Overrides& ov, const std::string& out_dir) {
  const EpisodeConfig cfg = resolve_config(config_path, ov);
  const World world = load_world(cfg.world);
  const EpisodeReport report = run_episode(world, cfg);
  write_report(report, out_dir);
  std::cout << "report written to " << out_dir << "\n";
  print_summary(report);
  return 0;
}

int cmd_eval(const std::string& report_dir, const std::string& config_path,
             std::optional<std::uint64_t> seed_override, std::optional<int> positions_override,
             const std::string& out_csv) {
  namespace fs = std::filesystem;
  const std::string cfg_path =
      !config_path.empty() ? config_path : (fs::path(report_dir) / "config.json").string();
  EpisodeConfig cfg = load_config(cfg_path);
  if (seed_override) cfg.seed = *seed_override;
  if (positions_override) cfg.eval.positions = *positions_override;

  const World world = load_world(cfg.world);
  const Camera1D cam = cfg.make_camera();
  const RenderParams rp = cfg.render_params();
  const SplatMap map = load_splat_map((fs::path(report_dir) / "final_map.splat").string());
  const OccupancyGrid grid = load_occupancy((fs::path(report_dir) / "occupancy.pgm").string(),
                                            (fs::path(report_dir) / "occupancy.json").string());

  Rng eval_rng = make_rng(cfg.seed, 0xEA1ull);
  Rng mc_rng = make_rng(cfg.seed, 0xF15Eull);
  const std::vector<Pose2> poses =
      sample_eval_poses(world, cfg.occupancy.resolution, cfg.eval.positions, eval_rng);
  const EvalResult ev = evaluate_render_quality(map, world, poses, cam, rp);
  const std::vector<Eigen::Vector2d> gt_free =
      reachable_free_centers(world, cfg.occupancy.resolution);

  std::cout << "poses: " << ev.n_poses << "\n"
            << "psnr_mean: " << ev.psnr_mean << " dB\n"
            << "depth_mae: " << ev.depth_mae_mean << " m\n"
            << "completeness: " << (grid.width() == 0 ? 0.0 : completeness(grid, gt_free)) << "\n";

  const std::vector<Pose2> mc = detail::mc_sample_poses(grid, cfg.fisher.mc_poses, mc_rng);
  const FisherDiag model = mc_model_fisher(map, mc, cam, cfg.fisher.lambda, rp);
  try {
    const ScatterResult scatter = eig_psnr_scatter(map, world, poses, cam, model, rp);
    const std::string path =
        !out_csv.empty() ? out_csv : (fs::path(report_dir) / "scatter.csv").string();
    write_scatter_csv(path, scatter);
    std::cout << "eig/psnr pearson r: " << scatter.pearson_r << "\n"
              << "scatter written to " << path << "\n";
  } catch (const std::exception& e) {
    std::cout << "eig/psnr correlation unavailable: " << e.what() << "\n";
  }
  return 0;
}

int cmd_ablate(const std::string& config_path, const Overrides& ov,
               const std::vector<std::uint64_t>& seeds, const std::string& out_csv) {
  const EpisodeConfig base = resolve_config(config_path, ov);
  const World world = load_world(base.world);

  struct Variant {
    const char* name;
    bool use_loc, use_llm, fbe;
  };
  const Variant variants[] = {
      {"full", true, true, false},
      {"no-loc", false, true, false},
      {"fbe", true, true, true},
  };

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot open " + out_csv);
  out << "variant,seed,ate,completeness,psnr_mean,depth_mae,collisions\n";
  for (const Variant& v : variants) {
    for (const std::uint64_t seed : seeds) {
      EpisodeConfig cfg = base;
      cfg.seed = seed;
      cfg.ablation.use_localization_cost = v.use_loc;
      cfg.ablation.use_llm = v.use_llm;
      cfg.ablation.fbe = v.fbe;
      const EpisodeReport report = run_episode(world, cfg);
      const MetricsRow& m = report.metrics.back();
      out << v.name << ',' << seed << ',' << detail::csv_num(m.ate) << ','
          << detail::csv_num(m.completeness) << ',' << detail::csv_num(m.psnr_mean) << ','
          << detail::csv_num(m.depth_mae) << ',' << report.collisions << '\n';
      out.flush();
      std::cout << v.name << " seed " << seed << ": ate " << m.ate << " m, completeness "
                << m.completeness << "\n";
    }
  }
  std::cout << "ablation table written to " << out_csv << "\n";
  return 0;
}

int cmd_replay(const std::string& report_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const EpisodeConfig cfg = load_config((fs::path(report_dir) / "config.json").string());
  const World world = load_world(cfg.world);
  const EpisodeReport report = run_episode(world, cfg);
  if (!out_dir.empty()) write_report(report, out_dir);

  std::ifstream in(fs::path(report_dir) / "trajectory.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + report_dir + "/trajectory.json");
  std::ostringstream recorded;
  recorded << in.rdbuf();
  if (trajectory_json_string(report) == recorded.str()) {
    std::cout << "replay: trajectory identical\n";
    return 0;
  }
  std::cout << "replay: trajectory MISMATCH\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D splat-map exploration"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "report", report_dir, out_csv, replay_out;
  Overrides ov;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> eval_seed;
  std::optional<int> eval_positions;

  CLI::App* run = app.add_subcommand("run", "run one exploration episode");
  run->add_option("--config", config_path, "config JSON");
  run->add_option("--out", out_dir, "report directory");
  add_override_flags(run, ov);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved report directory");
  eval->add_option("report", report_dir, "report directory")->required();
  eval->add_option("--config", config_path, "config JSON (default: report's config.json)");
  eval->add_option("--seed", eval_seed, "seed for the evaluation pose draw");
  eval->add_option("--positions", eval_positions, "evaluation positions");
  eval->add_option("--out", out_csv, "scatter CSV path");

  CLI::App* ablate = app.add_subcommand("ablate", "run the variant-by-seed matrix");
  ablate->add_option("--config", config_path, "config JSON");
  ablate->add_option("--seeds", seeds, "seed list")->expected(-1);
  ablate->add_option("--out", out_csv, "output CSV")->default_val("ablation.csv");
  add_override_flags(ablate, ov);

  CLI::App* replay = app.add_subcommand("replay", "re-run a report and compare trajectories");
  replay->add_option("report", report_dir, "report directory")->required();
  replay->add_option("--out", replay_out, "optionally write the re-run report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, ov, out_dir);
    if (eval->parsed()) return cmd_eval(report_dir, config_path, eval_seed, eval_positions, out_csv);
    if (ablate->parsed()) {
      if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
      return cmd_ablate(config_path, ov, seeds, out_csv);
    }
    if (replay->parsed()) return cmd_replay(report_dir, replay_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
