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

#ifndef SAFEGAME_MONTECARLO_HPP
#define SAFEGAME_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "safegame/barrier.hpp"
#include "safegame/core_types.hpp"
#include "safegame/models.hpp"

namespace safegame {

enum class SystemTag { kPendulum, kQuadrotor };

inline std::string to_string(SystemTag s) {
  return s == SystemTag::kPendulum ? "pendulum" : "quadrotor";
}

struct Scenario {
  SystemTag system = SystemTag::kPendulum;
  /// Pendulum only.
  UncertaintyLevel level = UncertaintyLevel::moderate();
  /// Quadrotor only.
  double wind_sigma = WindModel::kModerateSigma;
  int trials = 1000;
  /// Radians for the pendulum, metres for the quadrotor.
  double reach_threshold = 0.3;
  std::uint64_t seed = 1;
  /// Zero picks the hardware concurrency. Results do not depend on it.
  int workers = 0;
  /// Keep every trial's plant trajectory in the result.
  bool keep_trajectories = false;
  /// A state component beyond this magnitude counts as a numerical blow-up.
  double divergence_bound = 1e6;

  void validate() const {
    if (trials < 1) throw Error("scenario needs at least one trial");
    if (!(reach_threshold > 0.0)) throw Error("reach threshold must be positive");
    if (workers < 0) throw Error("worker count must be non-negative");
    if (!(divergence_bound > 0.0)) throw Error("divergence bound must be positive");
    if (system == SystemTag::kPendulum) level.validate();
    if (system == SystemTag::kQuadrotor && !(wind_sigma >= 0.0))
      throw Error("wind sigma must be non-negative");
  }

  bool same_protocol(const Scenario& o) const {
    return system == o.system && trials == o.trials && seed == o.seed &&
           reach_threshold == o.reach_threshold &&
           level.mean == o.level.mean && level.stddev == o.level.stddev &&
           wind_sigma == o.wind_sigma;
  }
};

/// Plant-only closed-loop trajectory.
struct ClosedLoopResult {
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  bool safe = true;
  bool finite = true;
  int violation_step = -1;
  int violation_constraint = -1;
};

/// Per-step disturbance fed into the true plant's max-input channel.
using Disturbance = std::function<Vector(int k, double t)>;

/// Runs the min player's policy u_k = ū_k + K_u(x̂_k − x̄̂_k) on `true_plant`.
///
/// x̂_k is [x_k; w(x_k)] with w recomputed from the true state by the raw
/// barrier formula; a non-finite reading (h exactly zero) keeps the previous
/// reading. u_0 = ū_0. The max-input channel receives `disturbance` instead
/// of the policy's v. The rollout continues after a violation so the full
/// trajectory is available; it stops early, flagged non-finite, once a state
/// is NaN/Inf or exceeds `divergence_bound` in magnitude.
inline ClosedLoopResult closed_loop_rollout(const Solution& solution,
                                            const AugmentedModel& design,
                                            const DynamicsModel& true_plant,
                                            const Disturbance& disturbance,
                                            const Vector& x0,
                                            double divergence_bound =
                                                std::numeric_limits<double>::infinity()) {
  const Trajectory& nom = solution.trajectory;
  const int n_steps = nom.horizon();
  const int n = design.plant_dim();
  if (true_plant.state_dim() != n ||
      true_plant.min_input_dim() != design.min_input_dim() ||
      true_plant.max_input_dim() != design.max_input_dim())
    throw DimensionError("true plant does not match the design model");
  if (n_steps > 1 && solution.policy.size() != n_steps - 1)
    throw DimensionError("policy horizon does not match the trajectory",
                         solution.policy.size());
  require_size(x0, n, "initial plant state");

  ClosedLoopResult out;
  out.states.reserve(n_steps + 1);
  out.inputs.reserve(n_steps);
  out.states.push_back(x0);
  std::vector<SafeSetFunction> all;
  for (const auto& spec : design.specs())
    all.insert(all.end(), spec.constraints.begin(), spec.constraints.end());
  auto check = [&](const Vector& x, int k) {
    if (!out.safe) return;
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (!(all[j].value(x) > 0.0)) {
        out.safe = false;
        out.violation_step = k;
        out.violation_constraint = static_cast<int>(j);
        return;
      }
    }
  };
  check(x0, 0);

  Vector measured = design.measure_state(x0);
  const Eigen::Index q = design.barrier_dim();
  for (int k = 0; k < n_steps; ++k) {
    const Vector& x = out.states[k];
    Vector u = nom.min_inputs[k];
    if (k >= 1) {
      Vector xh = design.measure_state(x);
      for (Eigen::Index i = n; i < n + q; ++i)
        if (!std::isfinite(xh[i])) xh[i] = measured[i];
      measured = xh;
      u += solution.policy.K_u(k) * (xh - nom.states[k]);
    }
    const Vector v = disturbance ? disturbance(k, k * nom.dt)
                                 : Vector(Vector::Zero(true_plant.max_input_dim()));
    Vector next = true_plant.next_state(x, u, v);
    out.inputs.push_back(std::move(u));
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > divergence_bound) {
      out.finite = false;
      out.safe = false;
      if (out.violation_step < 0) out.violation_step = k + 1;
      return out;
    }
    out.states.push_back(std::move(next));
    check(out.states.back(), k + 1);
  }
  return out;
}

struct TrialRecord {
  int index = 0;
  bool safe = false;
  bool reached = false;
  bool finite = false;
  int violation_step = -1;
  int violation_constraint = -1;
  double terminal_distance = std::numeric_limits<double>::infinity();
  Vector final_state;
  /// Pendulum parameter draws discarded for being non-positive.
  int rejected_draws = 0;

  bool success() const { return safe && reached; }
};

struct Metrics {
  Scenario scenario;
  double safety_rate = 0.0;
  double reachability_rate = 0.0;
  double success_rate = 0.0;
  double rmsd = 0.0;
  double total_state_variance = 0.0;
  /// Trials whose rollout went non-finite; excluded from RMSD and variance.
  int blowups = 0;
  int rejected_draws = 0;
  std::vector<TrialRecord> records;
  /// Plant trajectories, present when the scenario asked for them. Entries
  /// for blown-up trials are truncated.
  std::vector<std::vector<Vector>> trajectories;
};

/// Total across-trial variance: Σ_k Σ_i var_trials(x_{k,i}), using the
/// unbiased (n − 1) estimator and two passes in trial order. Fewer than two
/// trajectories give zero.
inline double total_state_variance(const std::vector<const std::vector<Vector>*>& trajs) {
  const std::size_t count = trajs.size();
  if (count < 2) return 0.0;
  const std::size_t steps = trajs.front()->size();
  double total = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    Vector mean = Vector::Zero((*trajs.front())[k].size());
    for (const auto* t : trajs) mean += (*t)[k];
    mean /= static_cast<double>(count);
    double ss = 0.0;
    for (const auto* t : trajs) ss += ((*t)[k] - mean).squaredNorm();
    total += ss / static_cast<double>(count - 1);
  }
  return total;
}

/// Rates, RMSD and variance from finished trials. `trajectories[i]` belongs
/// to `records[i]`.
inline void summarize(Metrics& m, const std::vector<std::vector<Vector>>& trajectories) {
  const std::size_t n = m.records.size();
  if (n == 0) throw Error("no trials to summarize");
  int safe = 0, reached = 0, success = 0;
  double sq = 0.0;
  int finite = 0;
  std::vector<const std::vector<Vector>*> kept;
  m.blowups = 0;
  m.rejected_draws = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const TrialRecord& r = m.records[i];
    safe += r.safe;
    reached += r.reached;
    success += r.success();
    m.rejected_draws += r.rejected_draws;
    if (!r.finite) {
      ++m.blowups;
      continue;
    }
    ++finite;
    sq += r.terminal_distance * r.terminal_distance;
    if (i < trajectories.size()) kept.push_back(&trajectories[i]);
  }
  const double count = static_cast<double>(n);
  m.safety_rate = 100.0 * safe / count;
  m.reachability_rate = 100.0 * reached / count;
  m.success_rate = 100.0 * success / count;
  m.rmsd = finite > 0 ? std::sqrt(sq / finite) : std::numeric_limits<double>::quiet_NaN();
  m.total_state_variance = total_state_variance(kept);
}

/// What one trial needs: the true plant, the disturbance and (for logging)
/// how many parameter draws were rejected.
struct TrialSetup {
  std::shared_ptr<const DynamicsModel> plant;
  Disturbance disturbance;
  int rejected_draws = 0;
};

using TrialSampler = std::function<TrialSetup(std::mt19937_64&)>;

/// Generator for trial `index`: seeded from (scenario seed, index) only, so
/// any worker can produce it.
inline std::mt19937_64 trial_generator(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

/// Generic Monte-Carlo loop. `reach_components` are the plant state indices
/// whose distance to `plant_target` decides reachability and RMSD.
inline Metrics evaluate_with(const Solution& solution, const AugmentedModel& design,
                             const Scenario& scenario, const TrialSampler& sampler,
                             const Vector& plant_target,
                             const std::vector<int>& reach_components) {
  scenario.validate();
  if (solution.trajectory.states.empty())
    throw Error("solution has no trajectory");
  const int n = design.plant_dim();
  const Vector x0 = solution.trajectory.states.front().head(n);
  Metrics m;
  m.scenario = scenario;
  m.records.resize(scenario.trials);
  std::vector<std::vector<Vector>> trajs(scenario.trials);

  auto run = [&](int i) {
    std::mt19937_64 rng = trial_generator(scenario.seed, i);
    TrialSetup setup = sampler(rng);
    ClosedLoopResult cl =
        closed_loop_rollout(solution, design, *setup.plant, setup.disturbance, x0,
                            scenario.divergence_bound);
    TrialRecord& r = m.records[i];
    r.index = i;
    r.finite = cl.finite;
    r.safe = cl.safe;
    r.violation_step = cl.violation_step;
    r.violation_constraint = cl.violation_constraint;
    r.rejected_draws = setup.rejected_draws;
    r.final_state = cl.states.back();
    if (cl.finite) {
      double d2 = 0.0;
      for (int c : reach_components) {
        const double e = r.final_state[c] - plant_target[c];
        d2 += e * e;
      }
      r.terminal_distance = std::sqrt(d2);
      r.reached = r.terminal_distance < scenario.reach_threshold;
    }
    trajs[i] = std::move(cl.states);
  };

  int workers = scenario.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, scenario.trials);
  if (workers <= 1) {
    for (int i = 0; i < scenario.trials; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (int i = w; i < scenario.trials; i += workers) run(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  summarize(m, trajs);
  if (scenario.keep_trajectories) m.trajectories = std::move(trajs);
  return m;
}

/// Pendulum: parametric mismatch, no disturbance. Quadrotor: design plant,
/// sinusoidal wind.
inline TrialSampler pendulum_sampler(const PendulumParams& nominal,
                                     const UncertaintyLevel& level, double dt) {
  return [nominal, level, dt](std::mt19937_64& rng) {
    int rejected = 0;
    const PendulumParams p = sample_perturbed_pendulum(nominal, level, rng, &rejected);
    TrialSetup s;
    s.plant = pendulum_model(p, dt);
    s.rejected_draws = rejected;
    return s;
  };
}

inline TrialSampler quadrotor_sampler(std::shared_ptr<const DynamicsModel> plant,
                                      double sigma) {
  return [plant, sigma](std::mt19937_64& rng) {
    const WindModel wind = WindModel::draw(sigma, rng);
    TrialSetup s;
    s.plant = plant;
    s.disturbance = [wind](int, double t) { return wind_disturbance(wind, t); };
    return s;
  };
}

inline Metrics evaluate(const Solution& solution, const Benchmark& bench,
                        const Scenario& scenario) {
  if (scenario.system == SystemTag::kPendulum) {
    const auto* plant = dynamic_cast<const PendulumModel*>(&bench.model->plant());
    if (!plant) throw Error("pendulum scenario needs a pendulum benchmark");
    return evaluate_with(solution, *bench.model, scenario,
                         pendulum_sampler(plant->params(), scenario.level, plant->dt()),
                         bench.plant_target, {0});
  }
  if (!dynamic_cast<const QuadrotorModel*>(&bench.model->plant()))
    throw Error("quadrotor scenario needs a quadrotor benchmark");
  return evaluate_with(solution, *bench.model, scenario,
                       quadrotor_sampler(bench.model->plant_ptr(), scenario.wind_sigma),
                       bench.plant_target, {0, 1, 2});
}

struct Comparison {
  Scenario scenario;
  double safety_delta = 0.0;
  double reachability_delta = 0.0;
  double success_delta = 0.0;
  double rmsd_delta = 0.0;
  double variance_delta = 0.0;
  /// Orderings expected of a robust policy against the min-only baseline.
  bool safer = false;
  bool more_successful = false;
  bool lower_variance = false;
  bool larger_rmsd = false;
  bool lower_reachability = false;
};

/// Deltas are proposed minus baseline.
inline Comparison compare(const Metrics& proposed, const Metrics& baseline) {
  if (!proposed.scenario.same_protocol(baseline.scenario))
    throw Error("metrics come from different scenarios");
  Comparison c;
  c.scenario = proposed.scenario;
  c.safety_delta = proposed.safety_rate - baseline.safety_rate;
  c.reachability_delta = proposed.reachability_rate - baseline.reachability_rate;
  c.success_delta = proposed.success_rate - baseline.success_rate;
  c.rmsd_delta = proposed.rmsd - baseline.rmsd;
  c.variance_delta = proposed.total_state_variance - baseline.total_state_variance;
  c.safer = c.safety_delta > 0.0;
  c.more_successful = c.success_delta > 0.0;
  c.lower_variance = c.variance_delta < 0.0;
  c.larger_rmsd = c.rmsd_delta >= 0.0;
  c.lower_reachability = c.reachability_delta <= 0.0;
  return c;
}

/// Sample quantile with linear interpolation between order statistics
/// (h = (n − 1)p). Sorts a copy.
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

/// Per-timestep, per-component mean and [lower, upper] quantiles.
struct Envelope {
  double lower_level = 0.025;
  double upper_level = 0.975;
  std::vector<Vector> mean, lower, upper;

  int steps() const { return static_cast<int>(mean.size()); }
};

/// Envelope over equal-length trajectories; shorter (blown-up) ones are
/// skipped.
inline Envelope envelope(const std::vector<std::vector<Vector>>& trajs,
                         double lower_level = 0.025, double upper_level = 0.975) {
  Envelope e;
  e.lower_level = lower_level;
  e.upper_level = upper_level;
  std::size_t steps = 0;
  for (const auto& t : trajs) steps = std::max(steps, t.size());
  std::vector<const std::vector<Vector>*> full;
  for (const auto& t : trajs)
    if (t.size() == steps) full.push_back(&t);
  if (full.empty()) throw Error("no complete trajectories for an envelope");
  const Eigen::Index dim = full.front()->front().size();
  std::vector<double> column(full.size());
  for (std::size_t k = 0; k < steps; ++k) {
    Vector mean(dim), lo(dim), hi(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < full.size(); ++j) {
        column[j] = (*full[j])[k][i];
        sum += column[j];
      }
      mean[i] = sum / static_cast<double>(full.size());
      lo[i] = quantile(column, lower_level);
      hi[i] = quantile(column, upper_level);
    }
    e.mean.push_back(std::move(mean));
    e.lower.push_back(std::move(lo));
    e.upper.push_back(std::move(hi));
  }
  return e;
}

/// Σ_k Σ_{i ∈ components} (upper − lower).
inline double envelope_volume(const Envelope& e, const std::vector<int>& components) {
  double v = 0.0;
  for (int k = 0; k < e.steps(); ++k)
    for (int c : components) v += e.upper[k][c] - e.lower[k][c];
  return v;
}

}  // namespace safegame

#endif  // SAFEGAME_MONTECARLO_HPP
