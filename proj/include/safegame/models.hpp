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

#ifndef SAFEGAME_MODELS_HPP
#define SAFEGAME_MODELS_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "safegame/barrier.hpp"
#include "safegame/cost.hpp"
#include "safegame/dynamics.hpp"
#include "safegame/game_ddp.hpp"

namespace safegame {

// ---------------------------------------------------------------------------
// Pendulum

struct PendulumParams {
  double length = 0.75;
  double damping = 0.15;
  double mass = 1.5;
  double gravity = 9.81;

  double inertia() const { return mass * length * length; }

  void validate() const {
    if (!(length > 0.0) || !(damping > 0.0) || !(mass > 0.0) ||
        !(gravity > 0.0))
      throw Error("pendulum parameters must be positive");
  }
};

/// I·θ̈ + b·θ̇ − m·g·l·sin θ = u + v with state (θ, θ̇); θ = 0 is upright.
class PendulumModel : public ContinuousModel {
 public:
  PendulumModel(PendulumParams params, double dt)
      : ContinuousModel(dt), p_(params) {
    p_.validate();
  }

  int state_dim() const override { return 2; }
  int min_input_dim() const override { return 1; }
  int max_input_dim() const override { return 1; }
  const PendulumParams& params() const { return p_; }

  Vector vector_field(const Vector& x, const Vector& u,
                      const Vector& v) const override {
    Vector g(2);
    g[0] = x[1];
    g[1] = (u[0] + v[0] - p_.damping * x[1] +
            p_.mass * p_.gravity * p_.length * std::sin(x[0])) /
           p_.inertia();
    return g;
  }

  bool has_field_jacobians() const override { return true; }
  void field_jacobians(const Vector& x, const Vector&, const Vector&,
                       Matrix& gx, Matrix& gu, Matrix& gv) const override {
    const double inv_i = 1.0 / p_.inertia();
    gx.resize(2, 2);
    gx << 0.0, 1.0,
        p_.mass * p_.gravity * p_.length * std::cos(x[0]) * inv_i,
        -p_.damping * inv_i;
    gu = Matrix::Zero(2, 1);
    gu(1, 0) = inv_i;
    gv = gu;
  }

  bool has_field_hessians() const override { return true; }
  void field_hessians(const Vector& x, const Vector&, const Vector&,
                      Derivatives& d) const override {
    zero_hessians(2, 1, 1, d);
    d.fxx[1](0, 0) =
        -p_.mass * p_.gravity * p_.length * std::sin(x[0]) / p_.inertia();
  }

 private:
  PendulumParams p_;
};

inline std::shared_ptr<const PendulumModel> pendulum_model(
    const PendulumParams& params, double dt) {
  return std::make_shared<PendulumModel>(params, dt);
}

enum class UncertaintyTag { kModerate, kHigh };

/// Each true parameter is nominal·c with c = 1 − x, x ~ N(mean, stddev).
struct UncertaintyLevel {
  UncertaintyTag tag = UncertaintyTag::kModerate;
  double mean = 0.10;
  double stddev = 0.30;

  static UncertaintyLevel moderate() { return {UncertaintyTag::kModerate, 0.10, 0.30}; }
  static UncertaintyLevel high() { return {UncertaintyTag::kHigh, 0.20, 0.50}; }

  void validate() const {
    if (!(stddev > 0.0)) throw Error("uncertainty stddev must be positive");
  }
};

/// Scale factors (c_l, c_b, c_m) and the number of draws rejected because
/// they made a parameter non-positive.
struct PendulumPerturbation {
  double c_length = 1.0;
  double c_damping = 1.0;
  double c_mass = 1.0;
  int rejected_draws = 0;
};

/// Applies explicit draws x = (x_l, x_b, x_m): c_i = 1 − x_i.
inline PendulumParams perturb_pendulum(const PendulumParams& nominal, double x_l,
                                       double x_b, double x_m) {
  PendulumParams p = nominal;
  p.length = nominal.length * (1.0 - x_l);
  p.damping = nominal.damping * (1.0 - x_b);
  p.mass = nominal.mass * (1.0 - x_m);
  return p;
}

template <class Rng>
PendulumPerturbation draw_pendulum_perturbation(const UncertaintyLevel& level,
                                                Rng& rng) {
  level.validate();
  std::normal_distribution<double> dist(level.mean, level.stddev);
  PendulumPerturbation out;
  auto draw = [&]() {
    for (;;) {
      const double c = 1.0 - dist(rng);
      if (c > 0.0) return c;
      ++out.rejected_draws;
    }
  };
  out.c_length = draw();
  out.c_damping = draw();
  out.c_mass = draw();
  return out;
}

template <class Rng>
PendulumParams sample_perturbed_pendulum(const PendulumParams& nominal,
                                         const UncertaintyLevel& level, Rng& rng,
                                         int* rejected_draws = nullptr) {
  const PendulumPerturbation c = draw_pendulum_perturbation(level, rng);
  if (rejected_draws) *rejected_draws = c.rejected_draws;
  return perturb_pendulum(nominal, 1.0 - c.c_length, 1.0 - c.c_damping,
                          1.0 - c.c_mass);
}

// ---------------------------------------------------------------------------
// Quadrotor

struct QuadrotorParams {
  double mass = 1.0;
  Eigen::Vector3d inertia{0.0213, 0.0213, 0.0426};
  double gravity = 9.81;

  double hover_thrust() const { return mass * gravity; }

  void validate() const {
    if (!(mass > 0.0) || !(gravity > 0.0) || !(inertia.minCoeff() > 0.0))
      throw Error("quadrotor mass, inertia and gravity must be positive");
  }
};

/// Euler-angle rigid body in a north-east-down world frame.
///
/// State (x, y, z, φ, θ, ψ, u, v, w, p, q, r): world position, roll/pitch/yaw,
/// body-frame linear velocity and body rates. Min inputs are total thrust
/// (along −z body) and the three body torques. Max inputs are a body-frame
/// force added to the linear-velocity rates.
class QuadrotorModel : public ContinuousModel {
 public:
  /// Pitch angles whose cosine falls below this are treated as singular.
  static constexpr double kPitchCosineFloor = 1e-6;

  QuadrotorModel(QuadrotorParams params, double dt)
      : ContinuousModel(dt), p_(std::move(params)) {
    p_.validate();
  }

  int state_dim() const override { return 12; }
  int min_input_dim() const override { return 4; }
  int max_input_dim() const override { return 3; }
  const QuadrotorParams& params() const { return p_; }

  Vector hover_input() const {
    Vector u = Vector::Zero(4);
    u[0] = p_.hover_thrust();
    return u;
  }

  Vector vector_field(const Vector& s, const Vector& in,
                      const Vector& force) const override {
    const double phi = s[3], theta = s[4], psi = s[5];
    const double ub = s[6], vb = s[7], wb = s[8];
    const double p = s[9], q = s[10], r = s[11];
    const double cph = std::cos(phi), sph = std::sin(phi);
    const double cth = std::cos(theta), sth = std::sin(theta);
    const double cps = std::cos(psi), sps = std::sin(psi);
    Vector g(12);
    if (std::abs(cth) < kPitchCosineFloor) {
      g.setConstant(std::numeric_limits<double>::quiet_NaN());
      return g;
    }
    const double tth = sth / cth;
    const double m = p_.mass, grav = p_.gravity;
    const double ix = p_.inertia[0], iy = p_.inertia[1], iz = p_.inertia[2];

    // World-frame velocity R(ψ,θ,φ)·[u v w].
    g[0] = cth * cps * ub + (sph * sth * cps - cph * sps) * vb +
           (cph * sth * cps + sph * sps) * wb;
    g[1] = cth * sps * ub + (sph * sth * sps + cph * cps) * vb +
           (cph * sth * sps - sph * cps) * wb;
    g[2] = -sth * ub + sph * cth * vb + cph * cth * wb;

    g[3] = p + sph * tth * q + cph * tth * r;
    g[4] = cph * q - sph * r;
    g[5] = (sph * q + cph * r) / cth;

    g[6] = r * vb - q * wb - grav * sth + force[0] / m;
    g[7] = p * wb - r * ub + grav * cth * sph + force[1] / m;
    g[8] = q * ub - p * vb + grav * cth * cph - in[0] / m + force[2] / m;

    g[9] = ((iy - iz) * q * r + in[1]) / ix;
    g[10] = ((iz - ix) * p * r + in[2]) / iy;
    g[11] = ((ix - iy) * p * q + in[3]) / iz;
    return g;
  }

 private:
  QuadrotorParams p_;
};

inline std::shared_ptr<const QuadrotorModel> quadrotor_model(
    const QuadrotorParams& params, double dt) {
  return std::make_shared<QuadrotorModel>(params, dt);
}

/// F_i(t) = σ·ρ_i·sin(t) with ρ drawn once per rollout.
struct WindModel {
  double sigma = 15.0;
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();

  static constexpr double kModerateSigma = 15.0;
  static constexpr double kHighSigma = 20.0;

  template <class Rng>
  static WindModel draw(double sigma, Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    WindModel w;
    w.sigma = sigma;
    for (int i = 0; i < 3; ++i) w.rho[i] = n01(rng);
    return w;
  }
};

inline Vector wind_disturbance(const WindModel& wind, double t) {
  return Vector(wind.sigma * wind.rho * std::sin(t));
}

// ---------------------------------------------------------------------------
// Obstacles

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

struct ObstacleCourse {
  std::vector<Sphere> obstacles;
  Eigen::Vector3d start{10.0, 0.0, -1.0};
  Eigen::Vector3d target{-5.0, -3.0, 2.0};

  /// Smallest (|p − o|² − r²) over all obstacles; +Inf when there are none.
  double min_clearance(const Eigen::Vector3d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles)
      best = std::min(best, (p - o.center).squaredNorm() - o.radius * o.radius);
    return best;
  }

  void validate() const {
    for (std::size_t j = 0; j < obstacles.size(); ++j) {
      if (!(obstacles[j].radius > 0.0))
        throw Error("obstacle " + std::to_string(j) + " has non-positive radius");
    }
    if (!(min_clearance(start) > 0.0))
      throw Error("start lies inside an obstacle");
    if (!(min_clearance(target) > 0.0))
      throw Error("target lies inside an obstacle");
  }
};

struct ObstacleBounds {
  Eigen::Vector3d min_corner{-2.0, -2.5, -1.0};
  Eigen::Vector3d max_corner{7.0, 0.5, 1.5};
  double radius_min = 0.6;
  double radius_max = 1.2;
  /// Minimum gap between an obstacle surface and the start or target.
  double clearance = 1.0;
  int max_attempts = 10000;
};

/// Uniformly places `count` spheres inside the bounds, redrawing any that
/// come within `clearance` of the start or the target.
inline ObstacleCourse build_obstacle_course(std::uint64_t seed, int count,
                                            const ObstacleBounds& bounds,
                                            const Eigen::Vector3d& start = {10.0, 0.0, -1.0},
                                            const Eigen::Vector3d& target = {-5.0, -3.0, 2.0}) {
  if (count < 0) throw Error("obstacle count must be non-negative");
  if (!(bounds.radius_min > 0.0) || bounds.radius_max < bounds.radius_min)
    throw Error("obstacle radius range is invalid");
  if ((bounds.max_corner - bounds.min_corner).minCoeff() < 0.0)
    throw Error("obstacle bounds are inverted");
  ObstacleCourse course;
  course.start = start;
  course.target = target;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int attempts = 0;
  while (static_cast<int>(course.obstacles.size()) < count) {
    if (++attempts > bounds.max_attempts)
      throw Error("could not place " + std::to_string(count) +
                  " obstacles within the attempt budget");
    Sphere s;
    for (int i = 0; i < 3; ++i)
      s.center[i] = bounds.min_corner[i] +
                    unit(rng) * (bounds.max_corner[i] - bounds.min_corner[i]);
    s.radius = bounds.radius_min + unit(rng) * (bounds.radius_max - bounds.radius_min);
    const double gap = s.radius + bounds.clearance;
    if ((s.center - start).norm() <= gap || (s.center - target).norm() <= gap)
      continue;
    course.obstacles.push_back(s);
  }
  return course;
}

/// One constraint per obstacle on the position components (0..2).
inline std::vector<SafeSetFunction> obstacle_constraints(const ObstacleCourse& course) {
  std::vector<SafeSetFunction> out;
  for (std::size_t j = 0; j < course.obstacles.size(); ++j)
    out.push_back(sphere_exclusion(course.obstacles[j].center,
                                   course.obstacles[j].radius, 0,
                                   "obstacle " + std::to_string(j)));
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark problems

/// A solvable problem plus what evaluation needs to interpret it.
struct Benchmark {
  GameProblem problem;
  std::shared_ptr<const AugmentedModel> model;
  Vector plant_target;
};

struct PendulumSetup {
  PendulumParams params;
  double dt = 0.01;
  int horizon = 150;
  double initial_angle = std::numbers::pi;
  double initial_rate = 0.0;
  double rate_limit = 5.0;
  BarrierKind barrier = BarrierKind::kInverse;
  bool shift_by_target = true;
  double q_dbas = 1000.0;
  double r_u = 0.1;
  double r_v = 1.1;
  Eigen::Vector3d terminal{1000.0, 5.0, 500.0};
  SolverOptions options;
};

inline Benchmark make_pendulum_benchmark(const PendulumSetup& s) {
  auto plant = pendulum_model(s.params, s.dt);
  BarrierSpec spec;
  spec.kind = s.barrier;
  spec.shift_by_target = s.shift_by_target;
  spec.constraints.push_back(magnitude_limit(1, s.rate_limit, "|rate| limit"));
  Vector plant_target = Vector::Zero(2);
  spec.set_target(plant_target);
  auto model = augment(plant, {spec});

  Matrix q = Matrix::Zero(3, 3);
  q(2, 2) = s.q_dbas;
  Matrix sm = s.terminal.asDiagonal();
  Vector target = Vector::Zero(3);
  auto cost = std::make_shared<QuadraticGameCost>(
      q, Matrix::Constant(1, 1, s.r_u), Matrix::Constant(1, 1, s.r_v), sm,
      target);

  Benchmark b;
  b.model = model;
  b.plant_target = plant_target;
  b.problem.model = model;
  b.problem.cost = cost;
  Vector x0(2);
  x0 << s.initial_angle, s.initial_rate;
  b.problem.initial_state = model->augment_state(x0);
  b.problem.horizon = s.horizon;
  b.problem.options = s.options;
  b.problem.nominal_u = {Vector::Zero(1)};
  b.problem.nominal_v = {Vector::Zero(1)};
  return b;
}

/// Airframe used by the quadrotor benchmark: a heavy-lift body whose wind
/// response stays inside the Euler-angle model's range at σ = 20.
inline QuadrotorParams benchmark_quadrotor_params() {
  QuadrotorParams p;
  p.mass = 6.0;
  p.inertia = {2.13, 2.13, 4.26};
  return p;
}

inline constexpr std::uint64_t kBenchmarkObstacleSeed = 4;
inline constexpr int kBenchmarkObstacleCount = 4;

struct QuadrotorSetup {
  QuadrotorParams params = benchmark_quadrotor_params();
  double dt = 0.01;
  int horizon = 500;
  ObstacleCourse course = build_obstacle_course(
      kBenchmarkObstacleSeed, kBenchmarkObstacleCount, ObstacleBounds{});
  BarrierKind barrier = BarrierKind::kInverse;
  bool shift_by_target = true;
  double q_dbas = 0.1;
  double state_weight = 0.0;
  double r_u = 1e-2;
  double r_v = 0.15;
  /// Terminal weight on positions; every other state and w get 1.
  double terminal_position = 10.0;
  double terminal_other = 1.0;
  /// Penalize thrust about hover instead of about zero.
  bool hover_reference = true;
  /// Gauss-Newton: the finite-difference dynamics Hessians of this model are
  /// too noisy for the full expansion.
  SolverOptions options = [] {
    SolverOptions o;
    o.second_order_dynamics = false;
    return o;
  }();
};

inline Benchmark make_quadrotor_benchmark(const QuadrotorSetup& s) {
  s.course.validate();
  auto plant = quadrotor_model(s.params, s.dt);
  std::vector<BarrierSpec> specs;
  Vector plant_target = Vector::Zero(12);
  plant_target.head(3) = s.course.target;
  if (!s.course.obstacles.empty()) {
    BarrierSpec spec;
    spec.kind = s.barrier;
    spec.grouping = BarrierGrouping::kSummed;
    spec.shift_by_target = s.shift_by_target;
    spec.constraints = obstacle_constraints(s.course);
    spec.set_target(plant_target);
    specs.push_back(std::move(spec));
  }
  auto model = augment(plant, specs);
  const int n = model->state_dim();

  Matrix q = Matrix::Identity(n, n) * s.state_weight;
  for (int i = 12; i < n; ++i) q(i, i) = s.q_dbas;
  Matrix sm = Matrix::Identity(n, n) * s.terminal_other;
  for (int i = 0; i < 3; ++i) sm(i, i) = s.terminal_position;
  Vector target = Vector::Zero(n);
  target.head(12) = plant_target;
  Vector u_ref = s.hover_reference ? plant->hover_input() : Vector::Zero(4);
  auto cost = std::make_shared<QuadraticGameCost>(
      q, Matrix::Identity(4, 4) * s.r_u, Matrix::Identity(3, 3) * s.r_v, sm,
      target, u_ref);

  Benchmark b;
  b.model = model;
  b.plant_target = plant_target;
  b.problem.model = model;
  b.problem.cost = cost;
  Vector x0 = Vector::Zero(12);
  x0.head(3) = s.course.start;
  b.problem.initial_state = model->augment_state(x0);
  b.problem.horizon = s.horizon;
  b.problem.options = s.options;
  b.problem.nominal_u = {plant->hover_input()};
  b.problem.nominal_v = {Vector::Zero(3)};
  return b;
}

}  // namespace safegame

#endif  // SAFEGAME_MODELS_HPP
