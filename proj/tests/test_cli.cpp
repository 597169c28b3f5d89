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

// Drives the command-line tool as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "safegame/io.hpp"

#ifndef SAFEGAME_CLI_PATH
#error "SAFEGAME_CLI_PATH must name the built tool"
#endif

namespace fs = std::filesystem;

namespace safegame {
namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SAFEGAME_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("safegame_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// A short pendulum config written under the test directory.
  std::string small_config(const std::string& extra = "", int trials = 8) const {
    std::ostringstream s;
    s << "system = pendulum\nhorizon = 40\noutput_dir = " << path("out") << "\n"
      << "scenario.trials = " << trials << "\n" << extra;
    const std::string file = path("run.cfg");
    write_file(file, s.str());
    return file;
  }

  fs::path dir_;
};

TEST_F(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(Cli, ConfigInitParsesBack) {
  const RunResult r = run("config init --system quadrotor --out " + path("q.cfg"));
  ASSERT_EQ(r.code, 0) << r.output;
  const RunConfig c = load_config(path("q.cfg"));
  EXPECT_EQ(c.system, SystemTag::kQuadrotor);
  EXPECT_EQ(run("config init --system rocket").code, 2);
}

TEST_F(Cli, InitThenSolveTwiceIsByteIdentical) {
  ASSERT_EQ(run("config init --out " + path("p.cfg")).code, 0);
  std::string text = read_file(path("p.cfg"));
  // Shorter horizon keeps the test quick; everything else is the default.
  text.replace(text.find("horizon = 150"), 13, "horizon = 60");
  write_file(path("p.cfg"), text);

  const RunResult first = run("solve " + path("p.cfg") + " --out " + path("a"));
  ASSERT_EQ(first.code, 0) << first.output;
  const RunResult second = run("solve " + path("p.cfg") + " --out " + path("b"));
  ASSERT_EQ(second.code, 0) << second.output;
  for (const char* f : {"trajectory.csv", "iterations.csv", "summary.json", "solution.json"}) {
    const std::string a = read_file(dir_ / "a" / "proposed" / f);
    EXPECT_EQ(a, read_file(dir_ / "b" / "proposed" / f)) << f;
    EXPECT_NE(a.find("config_hash"), std::string::npos) << f;
    EXPECT_NE(a.find("seed"), std::string::npos) << f;
  }
}

TEST_F(Cli, NonPositiveEpsilonIsRejected) {
  const std::string cfg = small_config("solver.convergence_threshold = 0\n");
  const RunResult r = run("solve " + cfg);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 5: solver.convergence_threshold"), std::string::npos)
      << r.output;
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(Cli, UnknownKeyIsRejectedWithItsLine) {
  const RunResult r = run("solve " + small_config("cost.r_w = 1\n"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("line 5: unknown key 'cost.r_w'"), std::string::npos) << r.output;
}

TEST_F(Cli, MissingConfigFile) { EXPECT_EQ(run("solve " + path("none.cfg")).code, 2); }

TEST_F(Cli, BaselineWritesItsOwnDirectory) {
  const RunResult r = run("solve --baseline " + small_config());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j =
      nlohmann::json::parse(read_file(dir_ / "out" / "baseline" / "summary.json"));
  EXPECT_EQ(j["mode"], "baseline");
  EXPECT_FALSE(fs::exists(dir_ / "out" / "proposed"));
}

TEST_F(Cli, NonConvergenceStillWritesArtifacts) {
  const RunResult r = run("solve " + small_config("solver.max_iterations = 1\n"));
  EXPECT_EQ(r.code, 3) << r.output;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "proposed" / "solution.json"));
  const auto j =
      nlohmann::json::parse(read_file(dir_ / "out" / "proposed" / "summary.json"));
  EXPECT_EQ(j["converged"], false);
}

TEST_F(Cli, EvaluateNeedsASolution) {
  const RunResult r = run("evaluate " + small_config());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("solve-first"), std::string::npos) << r.output;
}

TEST_F(Cli, EvaluateAfterSolve) {
  const std::string cfg = small_config();
  ASSERT_EQ(run("solve " + cfg).code, 0);
  const RunResult r = run("evaluate " + cfg + " --seed 9");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j =
      nlohmann::json::parse(read_file(dir_ / "out" / "proposed" / "metrics.json"));
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["trials"], 8);
}

TEST_F(Cli, CompareBaselineWritesComparison) {
  const RunResult r = run("evaluate --compare-baseline --solve-first --trials 6 " + small_config());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto j = nlohmann::json::parse(read_file(dir_ / "out" / "comparison.json"));
  EXPECT_EQ(j["format"], "safegame-comparison");
  EXPECT_EQ(j["trials"], 6);
  EXPECT_TRUE(j["delta"].contains("safety"));
  EXPECT_EQ(run("evaluate --baseline --compare-baseline " + small_config()).code, 2);
}

TEST_F(Cli, MetricsDoNotDependOnWorkers) {
  const std::string one = small_config("scenario.workers = 1\n", 12);
  ASSERT_EQ(run("evaluate --solve-first " + one + " --out " + path("w1")).code, 0);
  const std::string three = small_config("scenario.workers = 3\n", 12);
  ASSERT_EQ(run("evaluate --solve-first " + three + " --out " + path("w3")).code, 0);
  EXPECT_EQ(read_file(dir_ / "w1" / "proposed" / "metrics.json"),
            read_file(dir_ / "w3" / "proposed" / "metrics.json"));
  EXPECT_EQ(read_file(dir_ / "w1" / "proposed" / "trials.csv"),
            read_file(dir_ / "w3" / "proposed" / "trials.csv"));
}

TEST_F(Cli, ExportOfOneTrialIsTheTrajectory) {
  const std::string cfg = small_config("", 1);
  ASSERT_EQ(run("solve " + cfg).code, 0);
  const RunResult r = run("export-plotdata " + path("out"));
  ASSERT_EQ(r.code, 0) << r.output;
  std::istringstream env(read_file(dir_ / "out" / "proposed" / "envelope.csv"));
  std::string line;
  std::getline(env, line);
  EXPECT_EQ(line.rfind("# config_hash=", 0), 0u);
  std::getline(env, line);
  int rows = 0;
  while (std::getline(env, line)) {
    std::vector<double> v;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 8u);
    EXPECT_EQ(v[2], v[3]);
    EXPECT_EQ(v[2], v[4]);
    EXPECT_EQ(v[5], v[6]);
    EXPECT_EQ(v[5], v[7]);
    ++rows;
  }
  EXPECT_EQ(rows, 41);
}

TEST_F(Cli, CorruptSolutionIsAnArtifactError) {
  const std::string cfg = small_config("", 2);
  ASSERT_EQ(run("solve " + cfg).code, 0);
  write_file(dir_ / "out" / "proposed" / "solution.json", "{\"format\": \"safegame-solution\"");
  const RunResult r = run("export-plotdata " + path("out"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("artifact error"), std::string::npos) << r.output;
  EXPECT_EQ(run("evaluate " + cfg).code, 2);
  EXPECT_EQ(run("export-plotdata " + path("nowhere")).code, 2);
}

TEST_F(Cli, StaleSolutionIsRejected) {
  const std::string cfg = small_config();
  ASSERT_EQ(run("solve " + cfg).code, 0);
  small_config("cost.r_v = 2\n");
  EXPECT_EQ(run("evaluate " + cfg).code, 2);
}

}  // namespace
}  // namespace safegame
