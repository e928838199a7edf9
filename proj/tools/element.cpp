#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "element/agents.hpp"
#include "element/bench.hpp"
#include "element/config.hpp"
#include "element/error.hpp"
#include "element/metrics.hpp"
#include "element/verify.hpp"

namespace fs = std::filesystem;
using namespace element;

namespace {

int cmd_run(const std::string& config_path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (const char* dir = std::getenv("ELEMENT_OUTPUT_DIR"); dir != nullptr && *dir != '\0') cfg.output_dir = dir;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const FixedEncoder encoder = make_encoder(cfg);
    std::optional<Maze> maze;
    if (cfg.environment == EnvironmentKind::maze) maze = load_maze(cfg.maze.path, cfg.maze.max_steps);
    for (std::uint64_t seed : cfg.seeds) {
      const fs::path out = cfg.seeds.size() == 1 ? fs::path(cfg.output_dir)
                                                 : fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
      fs::create_directories(out);

      RunOptions options;
      options.backend = cfg.backend;
      options.heatmap_episodes = cfg.heatmap_episodes;
      RunResult result;
      if (maze) {
        MazeEnv env(*maze);
        result = run_element(env, encoder, cfg.reward, cfg.search, cfg.schedule, cfg.estimator, cfg.agent, seed,
                             options);
      } else {
        PointMassEnv env(cfg.pointmass.world, seed, cfg.pointmass.tabulation);
        result = run_element(env, encoder, cfg.reward, cfg.search, cfg.schedule, cfg.estimator, cfg.agent, seed,
                             options);
      }

      emit_csv(result.log, (out / "run.csv").string());
      emit_heatmap(coverage_grid(result.coverage, result.coverage_rows, result.coverage_cols),
                   (out / "coverage.pgm").string());
      save_graph(result.graph, (out / "graph.knng").string());
      for (const auto& [episode, grid] : result.heatmaps) {
        emit_heatmap(grid, (out / ("lifelong_reward_ep" + std::to_string(episode) + ".pgm")).string());
      }
      const auto& last = result.log.episodes.back();
      std::printf("seed %llu: %zu episodes, %llu steps, final entropy %.4f bits, %zu cells, graph %zu -> %s\n",
                  static_cast<unsigned long long>(seed), result.log.episodes.size(),
                  static_cast<unsigned long long>(last.steps), last.entropy_eval, last.unique_cells,
                  last.graph_size, out.string().c_str());
    }
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_verify(bool inject_fault) {
  VerifyOptions options;
  options.inject_fault = inject_fault;
  std::vector<CheckResult> rows;
  try {
    rows = run_verification(options);
  } catch (const std::exception& e) {
    std::cerr << "verification aborted: " << e.what() << "\n";
    return 1;
  }
  int failures = 0;
  for (const auto& r : rows) {
    const char* status = r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL");
    std::printf("%-4s  %-40s  %s\n", status, r.name.c_str(), r.detail.c_str());
    if (!r.passed && !r.informational) ++failures;
  }
  if (failures > 0) {
    std::printf("%d check(s) failed:\n", failures);
    for (const auto& r : rows)
      if (!r.passed && !r.informational) std::printf("  %s\n", r.name.c_str());
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}

int cmd_bench(std::size_t n, std::size_t dim, std::size_t k, std::size_t r1, std::size_t r2,
              std::size_t queries, const std::string& csv_path) {
  std::vector<BenchRow> rows;
  try {
    for (std::size_t size : {std::size_t{1000}, std::size_t{10000}, std::size_t{100000}}) {
      if (size > n) break;
      rows.push_back(bench_graph(size, dim, k, r1, r2, queries, 1));
    }
    const std::string csv = bench_csv(rows);
    std::fputs(csv.c_str(), stdout);
    if (!csv_path.empty()) write_file(csv_path, csv);
  } catch (const std::exception& e) {
    std::cerr << "bench failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exploration rewards from episodic entropy and lifelong kNN-graph novelty"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Train on a JSON experiment config");
  run->add_option("config", config_path, "Path to the config file")->required();

  bool inject_fault = false;
  auto* verify = app.add_subcommand("verify", "Run the closed-form and oracle checks");
  verify->add_flag("--inject-fault", inject_fault, "Distort the closed-form episodic reward (mutation check)");

  std::size_t n = 100000, dim = 2, k = 3, r1 = 20, r2 = 20, queries = 200;
  std::string csv_path;
  auto* bench = app.add_subcommand("bench", "Graph search vs brute force at 1e3, 1e4, 1e5 stored states");
  bench->add_option("--n", n, "Largest graph size (sizes above it are skipped)")->check(CLI::Range(1000, 100000000));
  bench->add_option("--dim", dim, "State dimension")->check(CLI::PositiveNumber);
  bench->add_option("--k", k, "Neighbours per node")->check(CLI::PositiveNumber);
  bench->add_option("--r1", r1, "Greedy steps per restart")->check(CLI::PositiveNumber);
  bench->add_option("--r2", r2, "Random restarts")->check(CLI::PositiveNumber);
  bench->add_option("--queries", queries, "Queries per size")->check(CLI::PositiveNumber);
  bench->add_option("--csv", csv_path, "Also write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run) return cmd_run(config_path);
  if (*verify) return cmd_verify(inject_fault);
  return cmd_bench(n, dim, k, r1, r2, queries, csv_path);
}
