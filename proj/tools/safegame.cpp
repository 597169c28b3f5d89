/*
 Copyright 2026 The safegame Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// safegame command-line front end.
//
// Exit codes: 0 success, 2 configuration/usage/artifact error,
// 3 solver non-convergence (artifacts are still written), 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "safegame/safegame.hpp"

namespace fs = std::filesystem;
using namespace safegame;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;

/// Usage problems found after argument parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  RunConfig c = load_config(path);
  if (o.seed) c.scenario_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.out) c.output_dir = *o.out;
  validate(c);
  return c;
}

std::string mode_name(bool baseline) { return baseline ? "baseline" : "proposed"; }

void write_config_copy(const RunConfig& c) {
  write_file(fs::path(c.output_dir) / "config.txt",
             "# config_hash=" + config_hash(c) + "\n" + print_config(c));
}

/// Runs one solve and writes its artifacts. Returns the solution.
Solution run_solve(const RunConfig& c, const Benchmark& bench, bool baseline) {
  const Solution sol = baseline ? solve_baseline(bench.problem) : solve(bench.problem);
  const Provenance prov = Provenance::of(c, mode_name(baseline));
  const fs::path dir = fs::path(c.output_dir) / prov.mode;
  write_file(dir / "trajectory.csv", trajectory_csv(sol, *bench.model, c.system, prov));
  write_file(dir / "iterations.csv", iterations_csv(sol, prov));
  write_file(dir / "summary.json", summary_json(sol, bench, c.system, prov));
  write_file(dir / "solution.json", solution_json(sol, prov));
  std::printf("%s: %s after %d iterations, cost %.6g, terminal distance %.4g\n",
              prov.mode.c_str(), sol.converged ? "converged" : "NOT converged",
              sol.iterations, sol.cost,
              nominal_terminal_distance(sol, bench, c.system));
  return sol;
}

Solution load_solution(const RunConfig& c, const Benchmark& bench, bool baseline) {
  const fs::path path = fs::path(c.output_dir) / mode_name(baseline) / "solution.json";
  if (!fs::exists(path))
    throw ArtifactError("missing solution artifact '" + path.string() +
                        "'; run solve first or pass --solve-first");
  LoadedSolution loaded = parse_solution(read_file(path), *bench.model);
  if (loaded.provenance.problem_hash != problem_hash(c))
    throw ArtifactError("'" + path.string() +
                        "' was solved for a different problem; re-run solve");
  return std::move(loaded.solution);
}

int cmd_config_init(const std::string& system, const std::string& out) {
  SystemTag tag;
  if (system == "pendulum") tag = SystemTag::kPendulum;
  else if (system == "quadrotor") tag = SystemTag::kQuadrotor;
  else throw UsageError("--system must be pendulum or quadrotor");
  const std::string text = print_config(defaults_for(tag));
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return kExitOk;
}

int cmd_solve(const std::string& path, bool baseline, const Overrides& o) {
  const RunConfig c = load_with_overrides(path, o);
  const Benchmark bench = benchmark_from(c);
  write_config_copy(c);
  const Solution sol = run_solve(c, bench, baseline);
  return sol.converged ? kExitOk : kExitNotConverged;
}

int cmd_evaluate(const std::string& path, bool baseline, bool compare_baseline,
                 bool solve_first, const Overrides& o) {
  if (baseline && compare_baseline)
    throw UsageError("--baseline and --compare-baseline are mutually exclusive");
  const RunConfig c = load_with_overrides(path, o);
  const Benchmark bench = benchmark_from(c);
  const Scenario scenario = scenario_from(c);
  write_config_copy(c);

  bool all_converged = true;
  auto obtain = [&](bool base) {
    Solution s = solve_first ? run_solve(c, bench, base) : load_solution(c, bench, base);
    all_converged = all_converged && s.converged;
    return s;
  };
  auto run = [&](bool base, const Solution& sol) {
    const Metrics m = evaluate(sol, bench, scenario);
    const Provenance prov = Provenance::of(c, mode_name(base));
    const fs::path dir = fs::path(c.output_dir) / prov.mode;
    write_file(dir / "metrics.json", metrics_json(m, prov));
    write_file(dir / "trials.csv", trials_csv(m, prov));
    std::printf("%s: safety %.1f%%  reach %.1f%%  success %.1f%%  rmsd %.4g  variance %.6g  blowups %d\n",
                prov.mode.c_str(), m.safety_rate, m.reachability_rate, m.success_rate,
                m.rmsd, m.total_state_variance, m.blowups);
    return m;
  };

  if (compare_baseline) {
    const Solution p = obtain(false);
    const Solution b = obtain(true);
    const Metrics mp = run(false, p);
    const Metrics mb = run(true, b);
    const Comparison cmp = compare(mp, mb);
    write_file(fs::path(c.output_dir) / "comparison.json",
               comparison_json(mp, mb, cmp, Provenance::of(c, "comparison")));
  } else {
    run(baseline, obtain(baseline));
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_export_plotdata(const std::string& dir) {
  const fs::path root(dir);
  const fs::path config_path = root / "config.txt";
  if (!fs::exists(config_path))
    throw ArtifactError("'" + config_path.string() + "' not found; not a solve output directory");
  RunConfig c = parse_config(read_file(config_path));
  c.output_dir = dir;
  const Benchmark bench = benchmark_from(c);
  Scenario scenario = scenario_from(c);
  scenario.keep_trajectories = true;

  int exported = 0;
  for (bool base : {false, true}) {
    if (!fs::exists(root / mode_name(base) / "solution.json")) continue;
    const Solution sol = load_solution(c, bench, base);
    const Metrics m = evaluate(sol, bench, scenario);
    const Provenance prov = Provenance::of(c, mode_name(base));
    const fs::path out = root / prov.mode;
    const double dt = bench.model->dt();
    write_file(out / "bundle.csv", bundle_csv(m.trajectories, dt, c.system, prov));
    write_file(out / "envelope.csv", envelope_csv(envelope(m.trajectories), dt, c.system, prov));
    std::printf("%s: wrote %d trajectories and their envelope\n", prov.mode.c_str(),
                static_cast<int>(m.trajectories.size()));
    ++exported;
  }
  if (exported == 0)
    throw ArtifactError("no solution artifacts under '" + dir + "'");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-embedded min-max DDP benchmarks"};
  app.require_subcommand(1);

  auto* config_cmd = app.add_subcommand("config", "Configuration helpers");
  config_cmd->require_subcommand(1);
  auto* init_cmd = config_cmd->add_subcommand("init", "Print a config with every default");
  std::string init_system = "pendulum";
  std::string init_out;
  init_cmd->add_option("--system", init_system, "pendulum or quadrotor");
  init_cmd->add_option("--out", init_out, "Write to this file instead of stdout");

  Overrides overrides;
  auto add_overrides = [&overrides](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&overrides](const std::uint64_t& v) { overrides.seed = v; },
        "Override scenario.seed");
    cmd->add_option_function<int>(
        "--trials", [&overrides](const int& v) { overrides.trials = v; },
        "Override scenario.trials");
    cmd->add_option_function<std::string>(
        "--out", [&overrides](const std::string& v) { overrides.out = v; },
        "Override output_dir");
  };

  std::string config_path;
  bool baseline = false;
  bool compare_baseline = false;
  bool solve_first = false;

  auto* solve_cmd = app.add_subcommand("solve", "Solve the configured problem");
  solve_cmd->add_option("config", config_path, "Config file")->required();
  solve_cmd->add_flag("--baseline", baseline, "Solve with the max player disabled");
  add_overrides(solve_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "Monte-Carlo evaluation");
  eval_cmd->add_option("config", config_path, "Config file")->required();
  eval_cmd->add_flag("--baseline", baseline, "Evaluate the baseline solution");
  eval_cmd->add_flag("--compare-baseline", compare_baseline,
                     "Evaluate both solutions and write comparison.json");
  eval_cmd->add_flag("--solve-first", solve_first, "Solve before evaluating");
  add_overrides(eval_cmd);

  std::string export_dir;
  auto* export_cmd = app.add_subcommand("export-plotdata",
                                        "Per-trial trajectories and envelopes");
  export_cmd->add_option("dir", export_dir, "Output directory of a solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (init_cmd->parsed()) return cmd_config_init(init_system, init_out);
    if (solve_cmd->parsed()) return cmd_solve(config_path, baseline, overrides);
    if (eval_cmd->parsed())
      return cmd_evaluate(config_path, baseline, compare_baseline, solve_first, overrides);
    if (export_cmd->parsed()) return cmd_export_plotdata(export_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const ArtifactError& e) {
    std::fprintf(stderr, "artifact error: %s\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
