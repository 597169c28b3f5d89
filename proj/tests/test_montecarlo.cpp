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

#include <cmath>
#include <random>

#include "safegame/montecarlo.hpp"
#include "test_util.hpp"

namespace safegame {
namespace {

TrialRecord record(int index, bool safe, double distance, double threshold) {
  TrialRecord r;
  r.index = index;
  r.safe = safe;
  r.finite = true;
  r.terminal_distance = distance;
  r.reached = distance < threshold;
  return r;
}

std::vector<Vector> constant_trajectory(double value, int steps, int dim = 2) {
  return std::vector<Vector>(steps, Vector::Constant(dim, value));
}

// Four trials: 0 is clean, 1 violates a constraint but ends on target,
// 2 stays safe but ends 0.5 away, 3 is clean. Distances 0, 0.1, 0.5, 0.2.
Metrics four_trial_batch() {
  Metrics m;
  m.records = {record(0, true, 0.0, 0.3), record(1, false, 0.1, 0.3),
               record(2, true, 0.5, 0.3), record(3, true, 0.2, 0.3)};
  std::vector<std::vector<Vector>> trajs = {constant_trajectory(0.0, 3),
                                            constant_trajectory(1.0, 3),
                                            constant_trajectory(2.0, 3),
                                            constant_trajectory(3.0, 3)};
  summarize(m, trajs);
  return m;
}

TEST(Summarize, FourTrialBatchByHand) {
  const Metrics m = four_trial_batch();
  EXPECT_DOUBLE_EQ(m.safety_rate, 75.0);
  EXPECT_DOUBLE_EQ(m.reachability_rate, 75.0);
  EXPECT_DOUBLE_EQ(m.success_rate, 50.0);
  // sqrt((0 + 0.01 + 0.25 + 0.04)/4)
  EXPECT_NEAR(m.rmsd, std::sqrt(0.3 / 4.0), 1e-15);
  // Per component and step the samples are 0,1,2,3: unbiased variance 5/3;
  // two components over three steps.
  EXPECT_NEAR(m.total_state_variance, 6.0 * 5.0 / 3.0, 1e-12);
  EXPECT_EQ(m.blowups, 0);
}

TEST(Summarize, AllTrialsOnTarget) {
  Metrics m;
  std::vector<std::vector<Vector>> trajs;
  for (int i = 0; i < 5; ++i) {
    m.records.push_back(record(i, true, 0.0, 0.3));
    trajs.push_back(constant_trajectory(0.0, 4));
  }
  summarize(m, trajs);
  EXPECT_EQ(m.safety_rate, 100.0);
  EXPECT_EQ(m.reachability_rate, 100.0);
  EXPECT_EQ(m.success_rate, 100.0);
  EXPECT_EQ(m.rmsd, 0.0);
  EXPECT_EQ(m.total_state_variance, 0.0);
}

TEST(Summarize, BlowupsAreUnsafeAndExcludedFromMoments) {
  Metrics m;
  m.records = {record(0, true, 0.1, 0.3), record(1, true, 0.3, 0.3)};
  TrialRecord bad;
  bad.index = 2;
  m.records.push_back(bad);
  std::vector<std::vector<Vector>> trajs = {constant_trajectory(0.0, 3),
                                            constant_trajectory(2.0, 3),
                                            constant_trajectory(1e9, 1)};
  summarize(m, trajs);
  EXPECT_EQ(m.blowups, 1);
  EXPECT_NEAR(m.safety_rate, 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.rmsd, std::sqrt((0.01 + 0.09) / 2.0), 1e-15);
  EXPECT_NEAR(m.total_state_variance, 3 * 2 * 2.0, 1e-12);
}

TEST(Compare, IdenticalMetricsGiveZeroDeltas) {
  const Metrics m = four_trial_batch();
  const Comparison c = compare(m, m);
  EXPECT_EQ(c.safety_delta, 0.0);
  EXPECT_EQ(c.reachability_delta, 0.0);
  EXPECT_EQ(c.success_delta, 0.0);
  EXPECT_EQ(c.rmsd_delta, 0.0);
  EXPECT_EQ(c.variance_delta, 0.0);
  EXPECT_FALSE(c.safer);
}

Metrics metrics_row(double safety, double reach, double success, double rmsd,
                     double variance) {
  Metrics m;
  m.safety_rate = safety;
  m.reachability_rate = reach;
  m.success_rate = success;
  m.rmsd = rmsd;
  m.total_state_variance = variance;
  return m;
}

TEST(Compare, ReferencePendulumModerateOrderings) {
  const Comparison c = compare(metrics_row(98.8, 86.7, 86.4, 0.202, 39.8),
                               metrics_row(79.4, 95.6, 75.5, 0.119, 86.3));
  EXPECT_TRUE(c.safer);
  EXPECT_TRUE(c.lower_variance);
  EXPECT_TRUE(c.larger_rmsd);
}

TEST(Compare, ReferenceQuadrotorHighOrderings) {
  const Comparison c = compare(metrics_row(94.3, 86.5, 81.6, 0.852, 421.8),
                               metrics_row(83.3, 90.4, 75.2, 0.791, 603.5));
  EXPECT_TRUE(c.more_successful);
  EXPECT_TRUE(c.lower_reachability);
  EXPECT_TRUE(c.safer);
  EXPECT_TRUE(c.lower_variance);
}

TEST(Compare, RejectsDifferentProtocols) {
  Metrics a = four_trial_batch(), b = four_trial_batch();
  b.scenario.seed = 99;
  EXPECT_THROW(compare(a, b), Error);
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.975), 7.0);
  EXPECT_THROW(quantile({}, 0.5), Error);
  EXPECT_THROW(quantile(v, 1.5), Error);
}

TEST(Envelope, SingleTrialIsTheTrajectory) {
  std::mt19937_64 rng(1);
  std::vector<Vector> t;
  for (int k = 0; k < 6; ++k) t.push_back(testing::random_vector(rng, 3, -1, 1));
  const Envelope e = envelope({t});
  ASSERT_EQ(e.steps(), 6);
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(e.mean[k], t[k]);
    EXPECT_EQ(e.lower[k], t[k]);
    EXPECT_EQ(e.upper[k], t[k]);
  }
  EXPECT_EQ(envelope_volume(e, {0, 1, 2}), 0.0);
}

TEST(Envelope, SymmetricBatchHasZeroMean) {
  std::mt19937_64 rng(2);
  std::vector<std::vector<Vector>> batch;
  for (int i = 0; i < 20; ++i) {
    std::vector<Vector> t, mirrored;
    for (int k = 0; k < 5; ++k) {
      t.push_back(testing::random_vector(rng, 2, -3, 3));
      mirrored.push_back(-t.back());
    }
    batch.push_back(t);
    batch.push_back(mirrored);
  }
  const Envelope e = envelope(batch);
  for (int k = 0; k < e.steps(); ++k) {
    EXPECT_LT(e.mean[k].cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(e.lower[k][0], -e.upper[k][0], 1e-12);
  }
}

TEST(Envelope, QuantileBandBracketsMostSamples) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<std::vector<Vector>> batch(1000);
  for (auto& t : batch)
    for (int k = 0; k < 10; ++k) t.push_back(Vector::Constant(1, n01(rng) * (k + 1)));
  const Envelope e = envelope(batch);
  for (int k = 0; k < 10; ++k) {
    int inside = 0;
    for (const auto& t : batch) inside += t[k][0] >= e.lower[k][0] && t[k][0] <= e.upper[k][0];
    EXPECT_GE(inside, 950) << "k=" << k;
  }
}

TEST(Envelope, SkipsTruncatedTrajectories) {
  std::vector<std::vector<Vector>> batch = {constant_trajectory(1.0, 4, 1),
                                            constant_trajectory(5.0, 2, 1)};
  const Envelope e = envelope(batch);
  EXPECT_EQ(e.steps(), 4);
  EXPECT_EQ(e.mean[0][0], 1.0);
}

TEST(TrialGenerator, DependsOnlyOnSeedAndIndex) {
  std::mt19937_64 a = trial_generator(5, 17), b = trial_generator(5, 17);
  std::mt19937_64 c = trial_generator(5, 18), d = trial_generator(6, 17);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
}

// --- Closed-loop evaluation on the pendulum benchmark ---------------------

class PendulumEvaluation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    bench_ = new Benchmark(make_pendulum_benchmark(PendulumSetup{}));
    proposed_ = new Solution(solve(bench_->problem));
    baseline_ = new Solution(solve_baseline(bench_->problem));
  }
  static void TearDownTestSuite() {
    delete bench_;
    delete proposed_;
    delete baseline_;
  }
  static Benchmark* bench_;
  static Solution* proposed_;
  static Solution* baseline_;
};

Benchmark* PendulumEvaluation::bench_ = nullptr;
Solution* PendulumEvaluation::proposed_ = nullptr;
Solution* PendulumEvaluation::baseline_ = nullptr;

TEST_F(PendulumEvaluation, DesignPlantReproducesBaselineNominal) {
  const Vector x0 = baseline_->trajectory.states[0].head(2);
  const ClosedLoopResult cl =
      closed_loop_rollout(*baseline_, *bench_->model, bench_->model->plant(), {}, x0);
  ASSERT_EQ(cl.states.size(), baseline_->trajectory.states.size());
  for (std::size_t k = 0; k < cl.states.size(); ++k)
    EXPECT_LT((cl.states[k] - baseline_->trajectory.states[k].head(2)).norm(), 1e-10);
  EXPECT_TRUE(cl.safe);
}

TEST_F(PendulumEvaluation, DesignPlantWithNominalAdversaryReproducesNominal) {
  const Trajectory& nom = proposed_->trajectory;
  const Disturbance adversary = [&nom](int k, double) { return nom.max_inputs[k]; };
  const ClosedLoopResult cl = closed_loop_rollout(*proposed_, *bench_->model,
                                                  bench_->model->plant(), adversary,
                                                  nom.states[0].head(2));
  for (std::size_t k = 0; k < cl.states.size(); ++k)
    EXPECT_LT((cl.states[k] - nom.states[k].head(2)).norm(), 1e-10);
}

TEST_F(PendulumEvaluation, PerturbedPlantStaysFinite) {
  std::mt19937_64 rng(4);
  const PendulumParams p =
      sample_perturbed_pendulum(PendulumParams{}, UncertaintyLevel::moderate(), rng);
  const auto plant = pendulum_model(p, 0.01);
  const ClosedLoopResult cl = closed_loop_rollout(*proposed_, *bench_->model, *plant, {},
                                                  proposed_->trajectory.states[0].head(2));
  EXPECT_TRUE(cl.finite);
  EXPECT_EQ(cl.states.size(), proposed_->trajectory.states.size());
  for (const auto& x : cl.states) EXPECT_TRUE(x.allFinite());
}

TEST_F(PendulumEvaluation, ResultsIndependentOfWorkerCount) {
  Scenario s;
  s.trials = 40;
  s.seed = 7;
  s.workers = 1;
  const Metrics a = evaluate(*proposed_, *bench_, s);
  s.workers = 3;
  const Metrics b = evaluate(*proposed_, *bench_, s);
  EXPECT_EQ(a.safety_rate, b.safety_rate);
  EXPECT_EQ(a.rmsd, b.rmsd);
  EXPECT_EQ(a.total_state_variance, b.total_state_variance);
  for (int i = 0; i < s.trials; ++i)
    EXPECT_EQ(a.records[i].final_state, b.records[i].final_state);
}

TEST_F(PendulumEvaluation, FirstTrialMatchesManualReplay) {
  Scenario s;
  s.trials = 3;
  s.seed = 11;
  s.workers = 1;
  s.keep_trajectories = true;
  const Metrics m = evaluate(*proposed_, *bench_, s);
  std::mt19937_64 rng = trial_generator(11, 1);
  const PendulumParams p =
      sample_perturbed_pendulum(PendulumParams{}, UncertaintyLevel::moderate(), rng);
  const ClosedLoopResult cl =
      closed_loop_rollout(*proposed_, *bench_->model, *pendulum_model(p, 0.01), {},
                          proposed_->trajectory.states[0].head(2));
  ASSERT_EQ(m.trajectories[1].size(), cl.states.size());
  EXPECT_EQ(m.trajectories[1].back(), cl.states.back());
  EXPECT_EQ(m.records[1].safe, cl.safe);
  EXPECT_DOUBLE_EQ(m.records[1].terminal_distance, std::abs(cl.states.back()[0]));
}

TEST(QuadrotorEvaluation, ZeroWindEqualsUndisturbedRollout) {
  QuadrotorSetup setup;
  setup.horizon = 60;
  const Benchmark b = make_quadrotor_benchmark(setup);
  const Solution sol = solve_baseline(b.problem);
  WindModel calm;
  calm.sigma = 15.0;
  const Disturbance wind = [calm](int, double t) { return wind_disturbance(calm, t); };
  const Vector x0 = sol.trajectory.states[0].head(12);
  const ClosedLoopResult a =
      closed_loop_rollout(sol, *b.model, b.model->plant(), wind, x0);
  const ClosedLoopResult c = closed_loop_rollout(sol, *b.model, b.model->plant(), {}, x0);
  ASSERT_EQ(a.states.size(), c.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k) EXPECT_EQ(a.states[k], c.states[k]);
}

}  // namespace
}  // namespace safegame
