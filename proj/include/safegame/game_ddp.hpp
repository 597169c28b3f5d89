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

#ifndef SAFEGAME_GAME_DDP_HPP
#define SAFEGAME_GAME_DDP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "safegame/core_types.hpp"
#include "safegame/cost.hpp"
#include "safegame/dynamics.hpp"

namespace safegame {

struct GameProblem {
  /// Usually an AugmentedModel; any DynamicsModel works.
  std::shared_ptr<const DynamicsModel> model;
  std::shared_ptr<const GameCost> cost;
  Vector initial_state;
  int horizon = 0;
  SolverOptions options;
  /// Initial nominal inputs. Empty means zeros, a single entry is repeated.
  std::vector<Vector> nominal_u;
  std::vector<Vector> nominal_v;
  FiniteDifferenceOptions fd;

  int state_dim() const { return model->state_dim(); }
  int min_dim() const { return model->min_input_dim(); }
  int max_dim() const { return model->max_input_dim(); }

  void validate() const {
    if (!model || !cost) throw Error("problem needs a model and a cost");
    if (horizon < 1) throw Error("horizon must be at least 1");
    options.validate();
    if (cost->state_dim() != model->state_dim() ||
        cost->min_input_dim() != model->min_input_dim() ||
        cost->max_input_dim() != model->max_input_dim())
      throw DimensionError("cost and model dimensions disagree");
    require_size(initial_state, model->state_dim(), "initial state");
    const int bad = first_non_finite(initial_state);
    if (bad >= 0 || model->is_unsafe(initial_state))
      throw Error("initial state must be finite and strictly safe");
    auto check_seq = [&](const std::vector<Vector>& seq, int dim,
                         const char* name) {
      if (seq.size() > 1 && static_cast<int>(seq.size()) != horizon)
        throw DimensionError(std::string(name) + " sequence length mismatch",
                             static_cast<int>(seq.size()));
      for (std::size_t k = 0; k < seq.size(); ++k)
        require_size(seq[k], dim, name, static_cast<int>(k));
    };
    check_seq(nominal_u, min_dim(), "nominal min input");
    check_seq(nominal_v, max_dim(), "nominal max input");
  }

  Vector nominal_min_input(int k) const {
    if (nominal_u.empty()) return Vector::Zero(min_dim());
    return nominal_u.size() == 1 ? nominal_u.front() : nominal_u[k];
  }
  Vector nominal_max_input(int k) const {
    if (nominal_v.empty()) return Vector::Zero(max_dim());
    return nominal_v.size() == 1 ? nominal_v.front() : nominal_v[k];
  }
};

/// Second-order expansion of the HJBI variation function around one
/// nominal point. Only the x̂u, x̂v and uv cross blocks are stored; their
/// transposes are the ux̂, vx̂ and vu blocks.
struct HamiltonianBlocks {
  Vector hx, hu, hv;
  Matrix hxx, huu, hvv, hxu, hxv, huv;

  Matrix hux() const { return hxu.transpose(); }
  Matrix hvx() const { return hxv.transpose(); }
  Matrix hvu() const { return huv.transpose(); }
};

struct ValueExpansion {
  double value = 0.0;
  Vector vx;
  Matrix vxx;
};

namespace detail {
inline void contract(Matrix& target, const Vector& weights,
                     const std::vector<Matrix>& tensor) {
  for (std::size_t i = 0; i < tensor.size(); ++i)
    if (weights[i] != 0.0) target.noalias() += weights[i] * tensor[i];
}

inline void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite())
    throw NonFiniteError(std::string("Hamiltonian block ") + name +
                             " is not finite",
                         -1);
}
}  // namespace detail

/// H = L + V' evaluated through the local models of f and L.
///
///   H_x̂  = L_x̂ + f̂_x̂ᵀV_x̂              H_x̂x̂ = L_x̂x̂ + f̂_x̂ᵀV_x̂x̂f̂_x̂ + V_x̂·f_x̂x̂
///   H_u  = L_u + f̂_uᵀV_x̂              H_uu  = L_uu + f̂_uᵀV_x̂x̂f̂_u + V_x̂·f_uu
///   H_v  = L_v + f̂_vᵀV_x̂              H_vv  = L_vv + f̂_vᵀV_x̂x̂f̂_v + V_x̂·f_vv
///   H_x̂u = L_x̂u + f̂_x̂ᵀV_x̂x̂f̂_u + V_x̂·f_x̂u   (likewise x̂v and uv)
///
/// Tensor contractions are skipped when `d` carries no second-order terms.
inline HamiltonianBlocks compute_hamiltonian(const Derivatives& d,
                                             const RunningCostExpansion& l,
                                             const ValueExpansion& next) {
  if (!next.vxx.isApprox(next.vxx.transpose(), 1e-8) &&
      (next.vxx - next.vxx.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw Error("value Hessian must be symmetric");
  HamiltonianBlocks b;
  const Matrix vxx_fx = next.vxx * d.fx;
  const Matrix vxx_fu = next.vxx * d.fu;
  const Matrix vxx_fv = next.vxx * d.fv;
  b.hx = l.lx + d.fx.transpose() * next.vx;
  b.hu = l.lu + d.fu.transpose() * next.vx;
  b.hv = l.lv + d.fv.transpose() * next.vx;
  b.hxx = l.lxx + d.fx.transpose() * vxx_fx;
  b.huu = l.luu + d.fu.transpose() * vxx_fu;
  b.hvv = l.lvv + d.fv.transpose() * vxx_fv;
  b.hxu = l.lxu + d.fx.transpose() * vxx_fu;
  b.hxv = l.lxv + d.fx.transpose() * vxx_fv;
  b.huv = l.luv + d.fu.transpose() * vxx_fv;
  if (d.has_second_order()) {
    detail::contract(b.hxx, next.vx, d.fxx);
    detail::contract(b.huu, next.vx, d.fuu);
    detail::contract(b.hvv, next.vx, d.fvv);
    detail::contract(b.hxu, next.vx, d.fxu);
    detail::contract(b.hxv, next.vx, d.fxv);
    detail::contract(b.huv, next.vx, d.fuv);
  }
  detail::require_finite(b.hx, "H_x");
  detail::require_finite(b.hu, "H_u");
  detail::require_finite(b.hv, "H_v");
  detail::require_finite(b.hxx, "H_xx");
  detail::require_finite(b.huu, "H_uu");
  detail::require_finite(b.hvv, "H_vv");
  detail::require_finite(b.hxu, "H_xu");
  detail::require_finite(b.hxv, "H_xv");
  detail::require_finite(b.huv, "H_uv");
  return b;
}

/// Makes H_uu positive definite and H_vv negative definite.
///
/// Eigen-clamp raises every eigenvalue of H_uu below `strength` to
/// `strength` and lowers every eigenvalue of H_vv above −strength to
/// −strength; blocks already satisfying the bound are returned untouched.
/// The additive scheme shifts H_uu by +strength·I and H_vv by −strength·I.
inline HamiltonianBlocks regularize(HamiltonianBlocks b,
                                    RegularizationScheme scheme,
                                    double strength) {
  if (scheme == RegularizationScheme::kAdditive) {
    b.huu += strength * Matrix::Identity(b.huu.rows(), b.huu.cols());
    b.hvv -= strength * Matrix::Identity(b.hvv.rows(), b.hvv.cols());
    return b;
  }
  auto clamp = [strength](Matrix& m, double sign) {
    if (m.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * sign * (m + m.transpose()));
    Vector eig = es.eigenvalues();
    if (eig.minCoeff() > strength) return;
    eig = eig.cwiseMax(strength);
    m = sign * es.eigenvectors() * eig.asDiagonal() *
        es.eigenvectors().transpose();
  };
  clamp(b.huu, 1.0);
  clamp(b.hvv, -1.0);
  return b;
}

/// Raised when a Schur complement cannot be factored; the caller should
/// retry with stronger regularization.
class GainError : public Error {
 public:
  GainError(const std::string& what, int step = -1) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct GameGains {
  Vector ku, kv;
  Matrix Ku, Kv;
  Matrix huu_tilde, hvv_tilde;
};

/// Saddle-point gains from the Schur complements
///   H̃_uu = H_uu − H_uv H_vv⁻¹ H_vu,  H̃_vv = H_vv − H_vu H_uu⁻¹ H_uv,
///   k_u = −H̃_uu⁻¹(H_u − H_uv H_vv⁻¹ H_v),  K_u = −H̃_uu⁻¹(H_ux̂ − H_uv H_vv⁻¹ H_vx̂),
///   k_v = −H̃_vv⁻¹(H_v − H_vu H_uu⁻¹ H_u),  K_v = −H̃_vv⁻¹(H_vx̂ − H_vu H_uu⁻¹ H_ux̂).
/// With no max-player blocks this is the ordinary DDP −H_uu⁻¹[H_u, H_ux̂].
inline GameGains compute_gains(const HamiltonianBlocks& b) {
  GameGains g;
  const Eigen::Index mu = b.hu.size();
  const Eigen::Index mv = b.hv.size();
  const Eigen::Index n = b.hx.size();
  const Matrix hux = b.hux();

  Eigen::LLT<Matrix> huu_llt(b.huu);
  if (mu > 0 && huu_llt.info() != Eigen::Success)
    throw GainError("H_uu is not positive definite; increase regularization");

  if (mv == 0) {
    g.huu_tilde = b.huu;
    g.hvv_tilde = Matrix(0, 0);
    g.ku = mu > 0 ? Vector(-huu_llt.solve(b.hu)) : Vector(0);
    g.Ku = mu > 0 ? Matrix(-huu_llt.solve(hux)) : Matrix(0, n);
    g.kv = Vector(0);
    g.Kv = Matrix(0, n);
    return g;
  }

  const Matrix hvx = b.hvx();
  const Matrix hvu = b.hvu();
  Eigen::LLT<Matrix> neg_hvv_llt(-b.hvv);
  if (neg_hvv_llt.info() != Eigen::Success)
    throw GainError("H_vv is not negative definite; increase regularization");
  // H_vv⁻¹ X = −(−H_vv)⁻¹ X.
  auto hvv_solve = [&](const Matrix& x) -> Matrix { return -neg_hvv_llt.solve(x); };
  auto huu_solve = [&](const Matrix& x) -> Matrix { return huu_llt.solve(x); };

  const Matrix hvv_inv_hvu = hvv_solve(hvu);
  const Matrix hvv_inv_hv = hvv_solve(b.hv);
  const Matrix hvv_inv_hvx = hvv_solve(hvx);
  const Matrix huu_inv_huv = huu_solve(b.huv);
  const Matrix huu_inv_hu = huu_solve(b.hu);
  const Matrix huu_inv_hux = huu_solve(hux);

  g.huu_tilde = b.huu - b.huv * hvv_inv_hvu;
  g.hvv_tilde = b.hvv - hvu * huu_inv_huv;

  Eigen::LLT<Matrix> tuu(0.5 * (g.huu_tilde + g.huu_tilde.transpose()));
  Eigen::LLT<Matrix> neg_tvv(-0.5 * (g.hvv_tilde + g.hvv_tilde.transpose()));
  if (tuu.info() != Eigen::Success || neg_tvv.info() != Eigen::Success)
    throw GainError("Schur complement is singular; increase regularization");

  g.ku = -tuu.solve(b.hu - b.huv * hvv_inv_hv);
  g.Ku = -tuu.solve(hux - b.huv * hvv_inv_hvx);
  g.kv = neg_tvv.solve(b.hv - hvu * huu_inv_hu);
  g.Kv = neg_tvv.solve(hvx - hvu * huu_inv_hux);
  return g;
}

/// Scalars of one timestep that the expected cost change needs.
struct StepCoefficients {
  double ku_hu = 0.0;
  double kv_hv = 0.0;
  double ku_huv_kv = 0.0;
  double ku_huu_ku = 0.0;
  double kv_hvv_kv = 0.0;
};

inline StepCoefficients step_coefficients(const HamiltonianBlocks& b,
                                          const GameGains& g) {
  StepCoefficients c;
  c.ku_hu = g.ku.dot(b.hu);
  c.ku_huu_ku = g.ku.dot(b.huu * g.ku);
  if (g.kv.size() > 0) {
    c.kv_hv = g.kv.dot(b.hv);
    c.ku_huv_kv = g.ku.dot(b.huv * g.kv);
    c.kv_hvv_kv = g.kv.dot(b.hvv * g.kv);
  }
  return c;
}

/// One step of the value recursion. `running_value` and `next.value` give
/// the zeroth-order term L + V'. The largest |V_x̂x̂ − V_x̂x̂ᵀ| before
/// symmetrization is stored in `asymmetry` when given.
inline ValueExpansion propagate_value(const HamiltonianBlocks& b,
                                      const GameGains& g, double running_value,
                                      const ValueExpansion& next,
                                      double* asymmetry = nullptr) {
  const StepCoefficients c = step_coefficients(b, g);
  ValueExpansion v;
  v.value = running_value + next.value + c.ku_hu + c.kv_hv + c.ku_huv_kv +
            0.5 * (c.ku_huu_ku + c.kv_hvv_kv);

  const Matrix hux = b.hux();
  v.vx = b.hx + g.Ku.transpose() * b.hu + b.hxu * g.ku +
         g.Ku.transpose() * (b.huu * g.ku);
  v.vxx = b.hxx + g.Ku.transpose() * hux + b.hxu * g.Ku +
          g.Ku.transpose() * b.huu * g.Ku;
  if (g.kv.size() > 0) {
    const Matrix hvu = b.hvu();
    const Matrix hvx = b.hvx();
    v.vx += g.Kv.transpose() * b.hv + b.hxv * g.kv +
            g.Kv.transpose() * (b.hvv * g.kv) +
            g.Ku.transpose() * (b.huv * g.kv) +
            g.Kv.transpose() * (hvu * g.ku);
    v.vxx += g.Kv.transpose() * hvx + b.hxv * g.Kv +
             g.Kv.transpose() * b.hvv * g.Kv +
             g.Ku.transpose() * b.huv * g.Kv +
             g.Kv.transpose() * hvu * g.Ku;
  }
  if (asymmetry)
    *asymmetry = v.vxx.size() > 0 ? (v.vxx - v.vxx.transpose()).cwiseAbs().maxCoeff() : 0.0;
  v.vxx = 0.5 * (v.vxx + v.vxx.transpose()).eval();
  return v;
}

/// ΔJ(α_u, α_v) = Σ_k α_u k_uᵀH_u + α_v k_vᵀH_v + α_uα_v k_uᵀH_uv k_v
///               + ½(α_u² k_uᵀH_uu k_u + α_v² k_vᵀH_vv k_v).
inline double expected_cost_change(const std::vector<StepCoefficients>& coeffs,
                                   double alpha_u, double alpha_v) {
  double sum = 0.0;
  for (const auto& c : coeffs) {
    sum += alpha_u * c.ku_hu + alpha_v * c.kv_hv +
           alpha_u * alpha_v * c.ku_huv_kv +
           0.5 * (alpha_u * alpha_u * c.ku_huu_ku +
                  alpha_v * alpha_v * c.kv_hvv_kv);
  }
  return sum;
}

struct BackwardPassResult {
  GamePolicy policy;
  /// Value expansion at k = 0..N.
  std::vector<ValueExpansion> value;
  /// Timesteps 1..N-1, entry i for timestep i+1.
  std::vector<StepCoefficients> coefficients;
  /// Largest |V_x̂x̂ − V_x̂x̂ᵀ| seen before symmetrization.
  double max_asymmetry = 0.0;
};

namespace detail {
inline void drop_max_player(Derivatives& d, RunningCostExpansion& l) {
  const Eigen::Index n = d.fx.rows();
  const Eigen::Index nx = d.fx.cols();
  const Eigen::Index mu = d.fu.cols();
  d.fv = Matrix(n, 0);
  l.lv = Vector(0);
  l.lvv = Matrix(0, 0);
  l.lxv = Matrix(nx, 0);
  l.luv = Matrix(mu, 0);
  if (d.has_second_order()) {
    d.fvv.assign(d.fvv.size(), Matrix(0, 0));
    d.fxv.assign(d.fxv.size(), Matrix(nx, 0));
    d.fuv.assign(d.fuv.size(), Matrix(mu, 0));
  }
}
}  // namespace detail

/// Backward sweep k = N−1..1 over the nominal trajectory.
///
/// Throws GainError (with the timestep) when a Schur complement cannot be
/// factored at the given regularization strength.
inline BackwardPassResult backward_pass(const Trajectory& nominal,
                                        const GameProblem& problem,
                                        double regularization) {
  const DynamicsModel& model = *problem.model;
  const GameCost& cost = *problem.cost;
  const SolverOptions& opt = problem.options;
  const int n_steps = nominal.horizon();
  nominal.validate(model.state_dim(), model.min_input_dim(),
                   model.max_input_dim());
  for (int k = 0; k <= n_steps; ++k) {
    if (!nominal.states[k].allFinite() || model.is_unsafe(nominal.states[k]))
      throw Error("backward pass needs a strictly safe nominal; step " +
                  std::to_string(k) + " is not");
  }

  BackwardPassResult out;
  out.value.resize(n_steps + 1);
  const int gain_count = std::max(n_steps - 1, 0);
  out.policy.ff_u.resize(gain_count);
  out.policy.fb_u.resize(gain_count);
  out.policy.ff_v.resize(gain_count);
  out.policy.fb_v.resize(gain_count);
  out.coefficients.resize(gain_count);

  const TerminalCostExpansion term = cost.terminal_expansion(nominal.states.back());
  out.value[n_steps] = {term.value, term.phix, term.phixx};

  for (int k = n_steps - 1; k >= 1; --k) {
    const Vector& x = nominal.states[k];
    const Vector& u = nominal.min_inputs[k];
    const Vector& v = nominal.max_inputs[k];
    Derivatives d =
        quadratize(model, x, u, v, problem.fd, opt.second_order_dynamics);
    RunningCostExpansion l = cost.running_expansion(x, u, v);
    if (!opt.max_player_enabled) detail::drop_max_player(d, l);

    HamiltonianBlocks blocks;
    GameGains gains;
    try {
      blocks = regularize(compute_hamiltonian(d, l, out.value[k + 1]),
                          opt.regularization, regularization);
      gains = compute_gains(blocks);
    } catch (const GainError& e) {
      throw GainError(std::string(e.what()) + " at step " + std::to_string(k),
                      k);
    } catch (const NonFiniteError& e) {
      throw GainError(std::string(e.what()) + " at step " + std::to_string(k),
                      k);
    }

    double asymmetry = 0.0;
    ValueExpansion next =
        propagate_value(blocks, gains, l.value, out.value[k + 1], &asymmetry);
    out.max_asymmetry = std::max(out.max_asymmetry, asymmetry);
    out.value[k] = std::move(next);
    out.coefficients[k - 1] = step_coefficients(blocks, gains);
    out.policy.ff_u[k - 1] = std::move(gains.ku);
    out.policy.fb_u[k - 1] = std::move(gains.Ku);
    out.policy.ff_v[k - 1] = std::move(gains.kv);
    out.policy.fb_v[k - 1] = std::move(gains.Kv);
  }

  // Timestep 0 has no running cost and fixed inputs: V_0(x̂) = V_1(f̂(x̂, ū_0, v̄_0)).
  {
    const Derivatives d = quadratize(model, nominal.states[0],
                                     nominal.min_inputs[0],
                                     nominal.max_inputs[0], problem.fd,
                                     opt.second_order_dynamics);
    const ValueExpansion& next = out.value[1 <= n_steps ? 1 : n_steps];
    ValueExpansion v0;
    v0.value = next.value;
    v0.vx = d.fx.transpose() * next.vx;
    v0.vxx = d.fx.transpose() * next.vxx * d.fx;
    if (d.has_second_order()) detail::contract(v0.vxx, next.vx, d.fxx);
    v0.vxx = 0.5 * (v0.vxx + v0.vxx.transpose()).eval();
    out.value[0] = std::move(v0);
  }
  return out;
}

struct Rollout {
  Trajectory trajectory;
  double cost = std::numeric_limits<double>::infinity();
  bool safe = true;
  bool finite = true;
  /// First timestep whose state is unsafe or non-finite, -1 if none.
  int violation_step = -1;

  bool ok() const { return safe && finite; }
};

/// Applies u_k = ū_k + α_u k_u + K_u(x̂_k − x̄̂_k) and the matching v_k from
/// the nominal's initial state. Inputs at k = 0 are the nominal ones. A
/// rollout that reaches an unsafe or non-finite state stops there and is
/// flagged; the caller rejects it.
inline Rollout forward_pass(const Trajectory& nominal, const GamePolicy& policy,
                            double alpha_u, double alpha_v,
                            const GameProblem& problem) {
  const DynamicsModel& model = *problem.model;
  const int n_steps = nominal.horizon();
  Rollout r;
  Trajectory& t = r.trajectory;
  t.dt = nominal.dt;
  t.states.reserve(n_steps + 1);
  t.min_inputs.reserve(n_steps);
  t.max_inputs.reserve(n_steps);
  t.states.push_back(nominal.states[0]);
  const bool has_v = policy.has_max_player();
  for (int k = 0; k < n_steps; ++k) {
    const Vector& x = t.states[k];
    Vector u = nominal.min_inputs[k];
    Vector v = nominal.max_inputs[k];
    if (k >= 1) {
      const Vector dx = x - nominal.states[k];
      u += alpha_u * policy.k_u(k) + policy.K_u(k) * dx;
      if (has_v) v += alpha_v * policy.k_v(k) + policy.K_v(k) * dx;
    }
    Vector next = model.next_state(x, u, v);
    t.min_inputs.push_back(std::move(u));
    t.max_inputs.push_back(std::move(v));
    if (model.is_unsafe(next)) {
      r.safe = false;
      r.violation_step = k + 1;
    } else if (!next.allFinite() || !t.min_inputs.back().allFinite() ||
               !t.max_inputs.back().allFinite()) {
      r.finite = false;
      r.violation_step = k + 1;
    }
    t.states.push_back(std::move(next));
    if (!r.ok()) return r;
  }
  r.cost = total_cost(t, *problem.cost);
  if (!std::isfinite(r.cost)) r.finite = false;
  return r;
}

/// Rolls out the problem's nominal inputs from its initial state.
inline Trajectory initial_trajectory(const GameProblem& problem) {
  problem.validate();
  Trajectory t;
  t.dt = problem.model->dt();
  t.states.push_back(problem.initial_state);
  for (int k = 0; k < problem.horizon; ++k) {
    t.min_inputs.push_back(problem.nominal_min_input(k));
    t.max_inputs.push_back(problem.nominal_max_input(k));
    t.states.push_back(problem.model->next_state(t.states[k], t.min_inputs[k],
                                                 t.max_inputs[k]));
  }
  return t;
}

enum class Rejection {
  kUnsafe,
  kNonFinite,
  kWrongSign,
  kNoPredictedImprovement,
  kRatioTooSmall,
};

/// Outcome of the two-stage line search.
///
/// Each stage compares the actual change ΔV of the total cost J over that
/// stage with the acting player's predicted change ΔJ of its own objective,
/// z = ΔV/ΔJ. The min player's objective is J, so a step whose outcome agrees
/// with its model has z > 0. The max player's objective is −J, so agreement
/// shows up as z < 0. A stage accepts the first safe, finite trial whose z
/// has that sign. The predicted change itself may have either sign: the
/// leader's step is taken against the follower's feedback, and in a coupled
/// game it can lower J while still moving toward the saddle point.
struct LineSearchReport {
  double alpha_u = 0.0;
  double alpha_v = 0.0;
  /// Min player: ΔJ(α_u, α_v) − ΔJ(0, α_v).
  double expected_u = 0.0;
  /// Max player: −ΔJ(0, α_v).
  double expected_v = 0.0;
  double actual_u = 0.0;
  double actual_v = 0.0;
  double ratio_u = 0.0;
  double ratio_v = 0.0;
  bool min_accepted = false;
  bool max_accepted = false;
  int trials = 0;
  std::vector<Rejection> rejections;
};

struct LineSearchResult {
  Rollout rollout;
  LineSearchReport report;
  /// Neither stage found an acceptable step although one was predicted.
  bool failed = false;
  /// Neither player predicts an improvement larger than the threshold.
  bool stationary = false;
};

/// Stackelberg (leader-follower) backtracking: the max player searches α_v
/// first with the min player's feedforward switched off (feedback only);
/// the min player then searches α_u against the accepted max-player step.
inline LineSearchResult stackelberg_line_search(const Trajectory& nominal,
                                                double nominal_cost,
                                                const BackwardPassResult& bp,
                                                const GameProblem& problem) {
  const SolverOptions& opt = problem.options;
  const auto& coeffs = bp.coefficients;
  LineSearchResult res;
  LineSearchReport& rep = res.report;

  Rollout stage_start;
  stage_start.trajectory = nominal;
  stage_start.cost = nominal_cost;
  const double floor = opt.min_step * (1.0 - 1e-12);

  // Stage 1: max player.
  const double predicted_ascent = expected_cost_change(coeffs, 0.0, 1.0);
  if (bp.policy.has_max_player() && opt.max_player_enabled) {
    for (double alpha = 1.0; alpha >= floor; alpha *= opt.line_search_shrink) {
      const double expected = -expected_cost_change(coeffs, 0.0, alpha);
      if (!(expected != 0.0)) {
        rep.rejections.push_back(Rejection::kNoPredictedImprovement);
        continue;
      }
      ++rep.trials;
      Rollout trial = forward_pass(nominal, bp.policy, 0.0, alpha, problem);
      if (!trial.safe) {
        rep.rejections.push_back(Rejection::kUnsafe);
        continue;
      }
      if (!trial.finite) {
        rep.rejections.push_back(Rejection::kNonFinite);
        continue;
      }
      const double actual = trial.cost - nominal_cost;
      const double z = actual / expected;
      if (!(z < 0.0)) {
        rep.rejections.push_back(Rejection::kWrongSign);
        continue;
      }
      if (std::abs(z) < opt.min_ratio) {
        rep.rejections.push_back(Rejection::kRatioTooSmall);
        continue;
      }
      rep.alpha_v = alpha;
      rep.expected_v = expected;
      rep.actual_v = actual;
      rep.ratio_v = z;
      rep.max_accepted = true;
      stage_start = std::move(trial);
      break;
    }
  }

  // Stage 2: min player, against the accepted α_v.
  const double av = rep.alpha_v;
  const double base = expected_cost_change(coeffs, 0.0, av);
  const double predicted_descent = expected_cost_change(coeffs, 1.0, av) - base;
  for (double alpha = 1.0; alpha >= floor; alpha *= opt.line_search_shrink) {
    const double expected = expected_cost_change(coeffs, alpha, av) - base;
    if (!(expected != 0.0)) {
      rep.rejections.push_back(Rejection::kNoPredictedImprovement);
      continue;
    }
    ++rep.trials;
    Rollout trial = forward_pass(nominal, bp.policy, alpha, av, problem);
    if (!trial.safe) {
      rep.rejections.push_back(Rejection::kUnsafe);
      continue;
    }
    if (!trial.finite) {
      rep.rejections.push_back(Rejection::kNonFinite);
      continue;
    }
    const double actual = trial.cost - stage_start.cost;
    const double z = actual / expected;
    if (!(z > 0.0)) {
      rep.rejections.push_back(Rejection::kWrongSign);
      continue;
    }
    if (std::abs(z) < opt.min_ratio) {
      rep.rejections.push_back(Rejection::kRatioTooSmall);
      continue;
    }
    rep.alpha_u = alpha;
    rep.expected_u = expected;
    rep.actual_u = actual;
    rep.ratio_u = z;
    rep.min_accepted = true;
    stage_start = std::move(trial);
    break;
  }

  res.rollout = std::move(stage_start);
  if (!rep.min_accepted && !rep.max_accepted) {
    const double scale = std::abs(predicted_descent) +
                         (opt.max_player_enabled ? std::abs(predicted_ascent) : 0.0);
    if (scale < opt.convergence_threshold)
      res.stationary = true;
    else
      res.failed = true;
  }
  return res;
}

/// Safety-embedded min-max DDP.
///
/// Iterates backward pass, Stackelberg line search and nominal update until
/// the accepted iteration changes J by less than the convergence threshold.
/// A failed line search or an unfactorable Schur complement raises the
/// regularization and retries; exhausting the regularization budget or the
/// iteration count returns the best iterate with `converged == false`.
inline Solution solve(const GameProblem& problem) {
  problem.validate();
  const SolverOptions& opt = problem.options;
  Solution sol;
  Trajectory nominal = initial_trajectory(problem);
  if (!nominal.all_finite()) {
    for (int k = 0; k <= problem.horizon; ++k)
      if (problem.model->is_unsafe(nominal.states[k]))
        throw Error("initial nominal trajectory is unsafe at step " +
                    std::to_string(k));
    throw Error("initial nominal trajectory is not finite");
  }
  double cost = total_cost(nominal, *problem.cost);
  double reg = opt.initial_regularization;
  BackwardPassResult last_bp;
  bool have_bp = false;

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    sol.iterations = iter;
    BackwardPassResult bp;
    try {
      bp = backward_pass(nominal, problem, reg);
    } catch (const GainError&) {
      reg *= opt.regularization_increase;
      if (reg > opt.max_regularization) break;
      continue;
    }
    LineSearchResult ls = stackelberg_line_search(nominal, cost, bp, problem);
    IterationRecord rec;
    rec.iteration = iter;
    rec.regularization = reg;
    rec.alpha_u = ls.report.alpha_u;
    rec.alpha_v = ls.report.alpha_v;
    rec.expected_u = ls.report.expected_u;
    rec.expected_v = ls.report.expected_v;
    rec.ratio_u = ls.report.ratio_u;
    rec.ratio_v = ls.report.ratio_v;
    rec.min_accepted = ls.report.min_accepted;
    rec.max_accepted = ls.report.max_accepted;
    rec.trials = ls.report.trials;

    if (ls.failed) {
      rec.cost = cost;
      rec.delta_v = 0.0;
      sol.log.push_back(rec);
      reg *= opt.regularization_increase;
      if (reg > opt.max_regularization) break;
      continue;
    }

    const double delta = ls.rollout.cost - cost;
    nominal = std::move(ls.rollout.trajectory);
    cost = ls.rollout.cost;
    last_bp = std::move(bp);
    have_bp = true;
    rec.cost = cost;
    rec.delta_v = delta;
    sol.log.push_back(rec);
    reg = std::max(opt.initial_regularization, reg / opt.regularization_decrease);
    if (ls.stationary || std::abs(delta) < opt.convergence_threshold) {
      sol.converged = true;
      break;
    }
  }

  // Anchor the returned policy to the final nominal.
  try {
    last_bp = backward_pass(nominal, problem, reg);
    have_bp = true;
  } catch (const GainError&) {
  }
  sol.trajectory = std::move(nominal);
  sol.cost = cost;
  if (have_bp) {
    sol.policy = std::move(last_bp.policy);
    sol.value.reserve(last_bp.value.size());
    for (const auto& v : last_bp.value) sol.value.push_back(v.value);
  }
  return sol;
}

/// The min-only baseline: the same solver with every max-player block
/// dropped, so v stays at its nominal.
inline Solution solve_baseline(GameProblem problem) {
  problem.options.max_player_enabled = false;
  return solve(problem);
}

}  // namespace safegame

#endif  // SAFEGAME_GAME_DDP_HPP
