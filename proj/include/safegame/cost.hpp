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

#ifndef SAFEGAME_COST_HPP
#define SAFEGAME_COST_HPP

#include <algorithm>
#include <string>
#include <utility>

#include "safegame/core_types.hpp"

namespace safegame {

struct RunningCostExpansion {
  double value = 0.0;
  Vector lx, lu, lv;
  Matrix lxx, luu, lvv, lxu, lxv, luv;
};

struct TerminalCostExpansion {
  double value = 0.0;
  Vector phix;
  Matrix phixx;
};

/// Running cost L(x̂, u, v) and terminal cost φ(x̂) shared by both players:
/// u minimizes, v maximizes.
class GameCost {
 public:
  virtual ~GameCost() = default;

  virtual int state_dim() const = 0;
  virtual int min_input_dim() const = 0;
  virtual int max_input_dim() const = 0;

  virtual double running(const Vector& x, const Vector& u,
                         const Vector& v) const = 0;
  virtual RunningCostExpansion running_expansion(const Vector& x,
                                                 const Vector& u,
                                                 const Vector& v) const = 0;
  virtual double terminal(const Vector& x) const = 0;
  virtual TerminalCostExpansion terminal_expansion(const Vector& x) const = 0;
};

/// L = (x̂−x̂ᵈ)ᵀQ(x̂−x̂ᵈ) + (u−uᵈ)ᵀR_u(u−uᵈ) − vᵀR_v v,
/// φ = (x̂−x̂ᵈ)ᵀS(x̂−x̂ᵈ).
///
/// The input reference uᵈ defaults to zero; a hover thrust or similar trim can
/// be placed there so that holding the trim is free.
class QuadraticGameCost : public GameCost {
 public:
  QuadraticGameCost(Matrix q, Matrix r_u, Matrix r_v, Matrix s, Vector target,
                    Vector input_reference = Vector())
      : q_(std::move(q)),
        r_u_(std::move(r_u)),
        r_v_(std::move(r_v)),
        s_(std::move(s)),
        target_(std::move(target)),
        u_ref_(std::move(input_reference)) {
    const Eigen::Index n = target_.size();
    if (u_ref_.size() == 0) u_ref_ = Vector::Zero(r_u_.rows());
    auto square = [](const Matrix& m, Eigen::Index dim, const char* name) {
      if (m.rows() != dim || m.cols() != dim)
        throw DimensionError(std::string(name) + " must be " +
                             std::to_string(dim) + "x" + std::to_string(dim));
    };
    square(q_, n, "Q");
    square(s_, n, "S");
    square(r_u_, r_u_.rows(), "R_u");
    square(r_v_, r_v_.rows(), "R_v");
    require_size(u_ref_, r_u_.rows(), "input reference");
    check_definite(q_, "Q", 0.0, false);
    check_definite(s_, "S", 0.0, false);
    check_definite(r_u_, "R_u", 0.0, true);
    check_definite(r_v_, "R_v", 0.0, true);
  }

  int state_dim() const override { return static_cast<int>(target_.size()); }
  int min_input_dim() const override { return static_cast<int>(r_u_.rows()); }
  int max_input_dim() const override { return static_cast<int>(r_v_.rows()); }

  const Matrix& state_weight() const { return q_; }
  const Matrix& min_input_weight() const { return r_u_; }
  const Matrix& max_input_weight() const { return r_v_; }
  const Matrix& terminal_weight() const { return s_; }
  const Vector& target() const { return target_; }
  const Vector& input_reference() const { return u_ref_; }

  double running(const Vector& x, const Vector& u,
                 const Vector& v) const override {
    const Vector dx = x - target_;
    const Vector du = u - u_ref_;
    return dx.dot(q_ * dx) + du.dot(r_u_ * du) - v.dot(r_v_ * v);
  }

  RunningCostExpansion running_expansion(const Vector& x, const Vector& u,
                                         const Vector& v) const override {
    RunningCostExpansion e;
    const Vector dx = x - target_;
    const Vector du = u - u_ref_;
    e.value = dx.dot(q_ * dx) + du.dot(r_u_ * du) - v.dot(r_v_ * v);
    e.lx = 2.0 * q_ * dx;
    e.lu = 2.0 * r_u_ * du;
    e.lv = -2.0 * r_v_ * v;
    e.lxx = 2.0 * q_;
    e.luu = 2.0 * r_u_;
    e.lvv = -2.0 * r_v_;
    e.lxu = Matrix::Zero(x.size(), u.size());
    e.lxv = Matrix::Zero(x.size(), v.size());
    e.luv = Matrix::Zero(u.size(), v.size());
    return e;
  }

  double terminal(const Vector& x) const override {
    const Vector dx = x - target_;
    return dx.dot(s_ * dx);
  }

  TerminalCostExpansion terminal_expansion(const Vector& x) const override {
    TerminalCostExpansion e;
    const Vector dx = x - target_;
    e.value = dx.dot(s_ * dx);
    e.phix = 2.0 * s_ * dx;
    e.phixx = 2.0 * s_;
    return e;
  }

 private:
  static void check_definite(const Matrix& m, const char* name, double floor,
                             bool strict) {
    if (m.size() == 0) return;
    if (!m.isApprox(m.transpose(), 1e-12))
      throw Error(std::string(name) + " must be symmetric");
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues();
    const double lo = eig.minCoeff();
    if (strict ? !(lo > floor) : !(lo >= floor))
      throw Error(std::string(name) + " must be positive " +
                  (strict ? "definite" : "semidefinite"));
  }

  Matrix q_, r_u_, r_v_, s_;
  Vector target_, u_ref_;
};

namespace detail {
inline void check_cost_inputs(const GameCost& cost, const Vector& x,
                              const Vector& u, const Vector& v, int k = -1) {
  require_size(x, cost.state_dim(), "state", k);
  require_size(u, cost.min_input_dim(), "min input", k);
  require_size(v, cost.max_input_dim(), "max input", k);
}
}  // namespace detail

inline RunningCostExpansion evaluate_running(const GameCost& cost,
                                             const Vector& x, const Vector& u,
                                             const Vector& v) {
  detail::check_cost_inputs(cost, x, u, v);
  return cost.running_expansion(x, u, v);
}

inline TerminalCostExpansion evaluate_terminal(const GameCost& cost,
                                               const Vector& x) {
  require_size(x, cost.state_dim(), "terminal state");
  return cost.terminal_expansion(x);
}

/// Running cost summed over timesteps [begin, end), clipped to 1..N-1.
inline double running_cost_sum(const Trajectory& traj, const GameCost& cost,
                               int begin, int end) {
  double sum = 0.0;
  for (int k = std::max(begin, 1); k < std::min(end, traj.horizon()); ++k) {
    detail::check_cost_inputs(cost, traj.states[k], traj.min_inputs[k],
                              traj.max_inputs[k], k);
    sum += cost.running(traj.states[k], traj.min_inputs[k], traj.max_inputs[k]);
  }
  return sum;
}

/// J = Σ_{k=1}^{N-1} L(x̂_k, u_k, v_k) + φ(x̂_N).
///
/// The running sum starts at k = 1: the running cost of the first timestep,
/// including its inputs u_0 and v_0, is not part of J. Solvers built on this
/// library keep u_0 and v_0 at their nominal values for the same reason.
inline double total_cost(const Trajectory& traj, const GameCost& cost) {
  traj.validate(cost.state_dim(), cost.min_input_dim(), cost.max_input_dim());
  return running_cost_sum(traj, cost, 1, traj.horizon()) +
         cost.terminal(traj.states.back());
}

}  // namespace safegame

#endif  // SAFEGAME_COST_HPP
