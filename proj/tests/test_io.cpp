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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <string>

#include "safegame/io.hpp"

namespace safegame {
namespace {

class SolutionArtifacts : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    config_ = new RunConfig(parse_config("system = pendulum\nhorizon = 40\n"));
    bench_ = new Benchmark(benchmark_from(*config_));
    solution_ = new Solution(solve(bench_->problem));
  }
  static void TearDownTestSuite() {
    delete solution_;
    delete bench_;
    delete config_;
  }

  static Provenance prov() { return Provenance::of(*config_, "proposed"); }

  static RunConfig* config_;
  static Benchmark* bench_;
  static Solution* solution_;
};

RunConfig* SolutionArtifacts::config_ = nullptr;
Benchmark* SolutionArtifacts::bench_ = nullptr;
Solution* SolutionArtifacts::solution_ = nullptr;

TEST_F(SolutionArtifacts, SolutionRoundTripsExactly) {
  const std::string text = solution_json(*solution_, prov());
  const LoadedSolution back = parse_solution(text, *bench_->model);
  const Solution& s = back.solution;
  ASSERT_EQ(s.trajectory.horizon(), solution_->trajectory.horizon());
  for (int k = 0; k <= s.trajectory.horizon(); ++k)
    EXPECT_TRUE(s.trajectory.states[k] == solution_->trajectory.states[k]) << k;
  ASSERT_EQ(s.policy.size(), solution_->policy.size());
  for (int k = 0; k < s.policy.size(); ++k) {
    EXPECT_TRUE(s.policy.fb_u[k] == solution_->policy.fb_u[k]);
    EXPECT_TRUE(s.policy.ff_v[k] == solution_->policy.ff_v[k]);
  }
  EXPECT_EQ(back.provenance.config_hash, config_hash(*config_));
  EXPECT_EQ(back.provenance.seed, config_->scenario_seed);
  EXPECT_EQ(solution_json(s, back.provenance), text);
}

TEST_F(SolutionArtifacts, CorruptArtifactsAreRejected) {
  const auto& model = *bench_->model;
  EXPECT_THROW(parse_solution("{ not json", model), ArtifactError);
  EXPECT_THROW(parse_solution("{\"format\": \"safegame-metrics\"}", model), ArtifactError);
  EXPECT_THROW(parse_solution("{\"format\": \"safegame-solution\"}", model), ArtifactError);

  auto j = nlohmann::json::parse(solution_json(*solution_, prov()));
  auto truncated = j;
  truncated["fb_u"].erase(truncated["fb_u"].size() - 1);
  EXPECT_THROW(parse_solution(truncated.dump(), model), ArtifactError);

  auto wide = j;
  wide["states"][3].push_back(1.0);
  EXPECT_THROW(parse_solution(wide.dump(), model), ArtifactError);

  auto bad_gain = j;
  bad_gain["fb_u"][0][0].push_back(1.0);
  EXPECT_THROW(parse_solution(bad_gain.dump(), model), ArtifactError);
}

TEST_F(SolutionArtifacts, CsvCarriesProvenanceAndHeader) {
  const std::string csv =
      trajectory_csv(*solution_, *bench_->model, SystemTag::kPendulum, prov());
  const std::string first = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(first, "# config_hash=" + config_hash(*config_) +
                       ",problem_hash=" + problem_hash(*config_) + ",seed=1,mode=proposed");
  const auto second_start = csv.find('\n') + 1;
  const std::string header = csv.substr(second_start, csv.find('\n', second_start) - second_start);
  EXPECT_EQ(header.rfind("k,t,theta,theta_dot,u0,v0,w0", 0), 0u) << header;
  // Header, provenance and one row per timestep.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 41);

  const std::string iters = iterations_csv(*solution_, prov());
  EXPECT_EQ(iters.rfind("# config_hash=", 0), 0u);
}

TEST_F(SolutionArtifacts, SummaryReportsSafety) {
  const auto j = nlohmann::json::parse(
      summary_json(*solution_, *bench_, SystemTag::kPendulum, prov()));
  EXPECT_EQ(j["format"], "safegame-summary");
  EXPECT_EQ(j["nominal_safe"], true);
  EXPECT_EQ(j["seed"], 1);
  EXPECT_EQ(j["config_hash"], config_hash(*config_));
}

Metrics toy_metrics() {
  Metrics m;
  m.scenario.trials = 2;
  m.safety_rate = 50.0;
  m.reachability_rate = 100.0;
  m.success_rate = 50.0;
  m.rmsd = 0.125;
  m.total_state_variance = 3.5;
  TrialRecord a;
  a.index = 0;
  a.safe = true;
  a.reached = true;
  a.finite = true;
  a.terminal_distance = 0.1;
  a.final_state = Vector::Constant(2, 0.5);
  TrialRecord b = a;
  b.index = 1;
  b.safe = false;
  b.violation_step = 7;
  b.violation_constraint = 0;
  m.records = {a, b};
  return m;
}

TEST(MetricsArtifacts, JsonIsStampedAndStable) {
  const Provenance p{"00000000000000aa", "00000000000000bb", 42, "proposed"};
  const std::string text = metrics_json(toy_metrics(), p);
  EXPECT_EQ(text, metrics_json(toy_metrics(), p));
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["format"], "safegame-metrics");
  EXPECT_EQ(j["config_hash"], "00000000000000aa");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["level"], "moderate");
  EXPECT_DOUBLE_EQ(j["safety_rate"].get<double>(), 50.0);
  EXPECT_DOUBLE_EQ(j["total_state_variance"].get<double>(), 3.5);
}

TEST(MetricsArtifacts, TrialsCsvRows) {
  const Provenance p{"a", "b", 3, "baseline"};
  const std::string csv = trials_csv(toy_metrics(), p);
  EXPECT_NE(csv.find("\n0,1,1,1,1,-1,-1,0.1,0,0.5,0.5\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n1,0,1,0,1,7,0,0.1,0,0.5,0.5\n"), std::string::npos) << csv;
}

TEST(PlotArtifacts, EnvelopeOfOneTrialIsTheTrajectory) {
  std::vector<std::vector<Vector>> trajs(1);
  for (int k = 0; k < 3; ++k) trajs[0].push_back(Vector::Constant(2, 0.25 * k));
  const Envelope e = envelope(trajs, 0.025, 0.975);
  const Provenance p{"a", "b", 3, "proposed"};
  const std::string csv = envelope_csv(e, 0.5, SystemTag::kPendulum, p);
  EXPECT_NE(csv.find("k,t,theta_mean,theta_lo,theta_hi,theta_dot_mean,theta_dot_lo,"
                     "theta_dot_hi\n"),
            std::string::npos);
  EXPECT_NE(csv.find("\n2,1,0.5,0.5,0.5,0.5,0.5,0.5\n"), std::string::npos) << csv;

  const std::string bundle = bundle_csv(trajs, 0.5, SystemTag::kPendulum, p);
  EXPECT_NE(bundle.find("\n0,1,0.5,0.25,0.25\n"), std::string::npos) << bundle;
}

TEST(Files, ReadMissingFileIsAnArtifactError) {
  EXPECT_THROW(read_file("/nonexistent/solution.json"), ArtifactError);
}

}  // namespace
}  // namespace safegame
