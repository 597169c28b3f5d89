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

#ifndef SAFEGAME_BARRIER_HPP
#define SAFEGAME_BARRIER_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "safegame/core_types.hpp"
#include "safegame/dynamics.hpp"

namespace safegame {

/// Constraint function h: positive in the safe interior, zero on the
/// boundary, negative outside. Gradient and Hessian are with respect to the
/// plant state.
struct SafeSetFunction {
  std::string label;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

enum class SetRegion { kInterior, kBoundary, kExterior };

inline SetRegion classify(const SafeSetFunction& h, const Vector& x) {
  const double hx = h.value(x);
  if (hx > 0.0) return SetRegion::kInterior;
  if (hx == 0.0) return SetRegion::kBoundary;
  return SetRegion::kExterior;
}

/// h(x) = limit² − x_index².
inline SafeSetFunction magnitude_limit(int index, double limit,
                                       std::string label = {}) {
  if (label.empty()) label = "|x" + std::to_string(index) + "| < " + std::to_string(limit);
  SafeSetFunction h;
  h.label = std::move(label);
  h.value = [index, limit](const Vector& x) {
    return limit * limit - x[index] * x[index];
  };
  h.gradient = [index](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    g[index] = -2.0 * x[index];
    return g;
  };
  h.hessian = [index](const Vector& x) {
    Matrix hess = Matrix::Zero(x.size(), x.size());
    hess(index, index) = -2.0;
    return hess;
  };
  return h;
}

/// h(x) = ‖p − center‖² − radius², p = x.segment(offset, 3).
inline SafeSetFunction sphere_exclusion(const Eigen::Vector3d& center,
                                        double radius, int offset = 0,
                                        std::string label = {}) {
  if (label.empty()) label = "sphere r=" + std::to_string(radius);
  SafeSetFunction h;
  h.label = std::move(label);
  h.value = [center, radius, offset](const Vector& x) {
    return (x.segment<3>(offset) - center).squaredNorm() - radius * radius;
  };
  h.gradient = [center, offset](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    g.segment<3>(offset) = 2.0 * (x.segment<3>(offset) - center);
    return g;
  };
  h.hessian = [offset](const Vector& x) {
    Matrix hess = Matrix::Zero(x.size(), x.size());
    hess.block<3, 3>(offset, offset) = 2.0 * Eigen::Matrix3d::Identity();
    return hess;
  };
  return h;
}

enum class BarrierKind { kInverse, kLogarithmic };
enum class BarrierGrouping { kPerConstraint, kSummed };

/// B(h): 1/h or −log(h/(1+h)). The raw formula is applied for any h; callers
/// decide what a non-positive argument means.
inline double barrier_function(BarrierKind kind, double h) {
  switch (kind) {
    case BarrierKind::kInverse:
      return 1.0 / h;
    case BarrierKind::kLogarithmic:
      return -std::log(h / (1.0 + h));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double barrier_derivative(BarrierKind kind, double h) {
  switch (kind) {
    case BarrierKind::kInverse:
      return -1.0 / (h * h);
    case BarrierKind::kLogarithmic:
      return 1.0 / (1.0 + h) - 1.0 / h;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline double barrier_second_derivative(BarrierKind kind, double h) {
  switch (kind) {
    case BarrierKind::kInverse:
      return 2.0 / (h * h * h);
    case BarrierKind::kLogarithmic:
      return 1.0 / (h * h) - 1.0 / ((1.0 + h) * (1.0 + h));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// One or more barrier states built from a set of constraints.
///
/// Summed grouping yields a single state Σ_j B(h_j(x)) − β^d; per-constraint
/// grouping yields one state B(h_j(x)) − β^d_j per constraint.
struct BarrierSpec {
  BarrierKind kind = BarrierKind::kInverse;
  std::vector<SafeSetFunction> constraints;
  BarrierGrouping grouping = BarrierGrouping::kSummed;
  bool shift_by_target = true;
  /// β^d per barrier state; empty means zero.
  std::vector<double> target_offset;

  int state_count() const {
    return grouping == BarrierGrouping::kSummed
               ? 1
               : static_cast<int>(constraints.size());
  }

  double offset(int s) const {
    if (!shift_by_target || target_offset.empty()) return 0.0;
    return target_offset.at(s);
  }

  /// Constraint indices feeding barrier state `s`.
  std::pair<int, int> members(int s) const {
    if (grouping == BarrierGrouping::kSummed)
      return {0, static_cast<int>(constraints.size())};
    return {s, s + 1};
  }

  /// Sets β^d = B(h(x^d)) for every barrier state.
  void set_target(const Vector& target) {
    target_offset.assign(state_count(), 0.0);
    for (int s = 0; s < state_count(); ++s) {
      auto [begin, end] = members(s);
      for (int j = begin; j < end; ++j) {
        const double h = constraints[j].value(target);
        if (!(h > 0.0))
          throw Error("target state violates constraint '" +
                      constraints[j].label + "'");
        target_offset[s] += barrier_function(kind, h);
      }
    }
  }
};

/// Barrier state values at one plant state. Groups touching an unsafe
/// constraint hold +Inf; `unsafe` and `violated_constraint` tag the first
/// offender.
struct BarrierValue {
  Vector values;
  bool unsafe = false;
  int violated_constraint = -1;
};

inline BarrierValue barrier_value(const BarrierSpec& spec, const Vector& x) {
  BarrierValue out;
  out.values.resize(spec.state_count());
  for (int s = 0; s < spec.state_count(); ++s) {
    auto [begin, end] = spec.members(s);
    double sum = 0.0;
    bool group_unsafe = false;
    for (int j = begin; j < end; ++j) {
      const double h = spec.constraints[j].value(x);
      if (!(h > 0.0)) {
        group_unsafe = true;
        if (!out.unsafe) {
          out.unsafe = true;
          out.violated_constraint = j;
        }
        continue;
      }
      sum += barrier_function(spec.kind, h);
    }
    out.values[s] = group_unsafe ? std::numeric_limits<double>::infinity()
                                 : sum - spec.offset(s);
  }
  return out;
}

/// The barrier formula evaluated without the safety sentinel. Outside the
/// safe set this gives the raw (possibly negative or non-finite) value, which
/// is what a sensor measuring an already-violated constraint would report.
inline Vector raw_barrier_value(const BarrierSpec& spec, const Vector& x) {
  Vector w(spec.state_count());
  for (int s = 0; s < spec.state_count(); ++s) {
    auto [begin, end] = spec.members(s);
    double sum = 0.0;
    for (int j = begin; j < end; ++j)
      sum += barrier_function(spec.kind, spec.constraints[j].value(x));
    w[s] = sum - spec.offset(s);
  }
  return w;
}

/// Next barrier state: the barrier evaluated on the plant's next state.
inline BarrierValue bas_step(const BarrierSpec& spec,
                             const DynamicsModel& plant, const Vector& x,
                             const Vector& u, const Vector& v) {
  detail::check_inputs(plant, x, u, v);
  return barrier_value(spec, plant.next_state(x, u, v));
}

/// Plant augmented with barrier states: x̂ = [x; w], f̂ = [f; B(h(f)) − β^d].
///
/// Derivatives of the barrier rows follow from the chain rule through the
/// plant's own derivatives (analytic or finite-difference, per the plant).
class AugmentedModel : public DynamicsModel {
 public:
  AugmentedModel(std::shared_ptr<const DynamicsModel> plant,
                 std::vector<BarrierSpec> specs,
                 FiniteDifferenceOptions fd = {})
      : plant_(std::move(plant)), specs_(std::move(specs)), fd_(fd) {
    if (!plant_) throw Error("augmented model needs a plant");
    q_ = 0;
    for (const auto& s : specs_) q_ += s.state_count();
  }

  int state_dim() const override { return plant_->state_dim() + q_; }
  int min_input_dim() const override { return plant_->min_input_dim(); }
  int max_input_dim() const override { return plant_->max_input_dim(); }
  double dt() const override { return plant_->dt(); }

  int plant_dim() const { return plant_->state_dim(); }
  int barrier_dim() const { return q_; }
  const DynamicsModel& plant() const { return *plant_; }
  std::shared_ptr<const DynamicsModel> plant_ptr() const { return plant_; }
  const std::vector<BarrierSpec>& specs() const { return specs_; }

  /// [x; w(x)] with +Inf barrier entries when x is unsafe.
  Vector augment_state(const Vector& x) const {
    require_size(x, plant_dim(), "plant state");
    Vector out(state_dim());
    out.head(plant_dim()) = x;
    int row = plant_dim();
    for (const auto& spec : specs_) {
      const BarrierValue bv = barrier_value(spec, x);
      out.segment(row, bv.values.size()) = bv.values;
      row += static_cast<int>(bv.values.size());
    }
    return out;
  }

  /// Augmented state measured from a plant state with the raw barrier
  /// formula (no sentinel).
  Vector measure_state(const Vector& x) const {
    Vector out(state_dim());
    out.head(plant_dim()) = x;
    int row = plant_dim();
    for (const auto& spec : specs_) {
      const Vector w = raw_barrier_value(spec, x);
      out.segment(row, w.size()) = w;
      row += static_cast<int>(w.size());
    }
    return out;
  }

  Vector next_state(const Vector& xh, const Vector& u,
                    const Vector& v) const override {
    const Vector y = plant_->next_state(xh.head(plant_dim()), u, v);
    if (y.size() != plant_dim() || !y.allFinite()) {
      Vector bad = Vector::Constant(state_dim(),
                                    std::numeric_limits<double>::quiet_NaN());
      if (y.size() == plant_dim()) bad.head(plant_dim()) = y;
      return bad;
    }
    return augment_state(y);
  }

  bool is_unsafe(const Vector& xh) const override {
    const Vector w = xh.tail(q_);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (std::isinf(w[i]) && w[i] > 0) return true;
    return false;
  }

  bool has_analytic_jacobians() const override { return true; }
  void jacobians(const Vector& xh, const Vector& u, const Vector& v,
                 Derivatives& d) const override {
    const Derivatives pd = linearize(*plant_, xh.head(plant_dim()), u, v, fd_);
    assemble_first_order(plant_->next_state(xh.head(plant_dim()), u, v), pd, d);
  }

  bool has_analytic_hessians() const override { return true; }
  void hessians(const Vector& xh, const Vector& u, const Vector& v,
                Derivatives& d) const override {
    const int n = plant_dim();
    const int mu = min_input_dim();
    const int mv = max_input_dim();
    const Vector x = xh.head(n);
    const Derivatives pd = quadratize(*plant_, x, u, v, fd_, true);
    const Vector y = plant_->next_state(x, u, v);
    assemble_first_order(y, pd, d);

    // Work in the plant's joint coordinates z = [x; u; v], then insert the
    // zero rows/columns belonging to w.
    const int dz = n + mu + mv;
    Matrix fz(n, dz);
    fz << pd.fx, pd.fu, pd.fv;
    std::vector<Matrix> plant_hz(n, Matrix(dz, dz));
    for (int i = 0; i < n; ++i) {
      Matrix& hz = plant_hz[i];
      hz.topLeftCorner(n, n) = pd.fxx[i];
      hz.block(n, n, mu, mu) = pd.fuu[i];
      hz.bottomRightCorner(mv, mv) = pd.fvv[i];
      hz.block(0, n, n, mu) = pd.fxu[i];
      hz.block(n, 0, mu, n) = pd.fxu[i].transpose();
      hz.block(0, n + mu, n, mv) = pd.fxv[i];
      hz.block(n + mu, 0, mv, n) = pd.fxv[i].transpose();
      hz.block(n, n + mu, mu, mv) = pd.fuv[i];
      hz.block(n + mu, n, mv, mu) = pd.fuv[i].transpose();
    }

    const int na = state_dim();
    const int da = na + mu + mv;
    auto embed = [&](const Matrix& hz) {
      Matrix out = Matrix::Zero(da, da);
      out.topLeftCorner(n, n) = hz.topLeftCorner(n, n);
      out.block(0, na, n, mu + mv) = hz.topRightCorner(n, mu + mv);
      out.block(na, 0, mu + mv, n) = hz.bottomLeftCorner(mu + mv, n);
      out.bottomRightCorner(mu + mv, mu + mv) =
          hz.bottomRightCorner(mu + mv, mu + mv);
      return out;
    };

    std::vector<Matrix> joint(na);
    for (int i = 0; i < n; ++i) joint[i] = embed(plant_hz[i]);
    int row = n;
    for (const auto& spec : specs_) {
      for (int s = 0; s < spec.state_count(); ++s, ++row) {
        auto [begin, end] = spec.members(s);
        Vector grad = Vector::Zero(n);
        Matrix hess = Matrix::Zero(n, n);
        for (int j = begin; j < end; ++j) {
          const auto& c = spec.constraints[j];
          const double h = c.value(y);
          const Vector gh = c.gradient(y);
          const double b1 = barrier_derivative(spec.kind, h);
          const double b2 = barrier_second_derivative(spec.kind, h);
          grad += b1 * gh;
          hess += b2 * gh * gh.transpose() + b1 * c.hessian(y);
        }
        Matrix hz = fz.transpose() * hess * fz;
        for (int i = 0; i < n; ++i)
          if (grad[i] != 0.0) hz += grad[i] * plant_hz[i];
        joint[row] = embed(hz);
      }
    }
    detail::split_joint_hessians(joint, na, mu, mv, d);
  }

 private:
  void assemble_first_order(const Vector& y, const Derivatives& pd,
                            Derivatives& d) const {
    const int n = plant_dim();
    const int na = state_dim();
    d.fx = Matrix::Zero(na, na);
    d.fu.resize(na, min_input_dim());
    d.fv.resize(na, max_input_dim());
    d.fx.topLeftCorner(n, n) = pd.fx;
    d.fu.topRows(n) = pd.fu;
    d.fv.topRows(n) = pd.fv;
    int row = n;
    for (const auto& spec : specs_) {
      for (int s = 0; s < spec.state_count(); ++s, ++row) {
        auto [begin, end] = spec.members(s);
        Vector grad = Vector::Zero(n);
        for (int j = begin; j < end; ++j) {
          const auto& c = spec.constraints[j];
          grad += barrier_derivative(spec.kind, c.value(y)) * c.gradient(y);
        }
        d.fx.row(row).head(n) = grad.transpose() * pd.fx;
        d.fu.row(row) = grad.transpose() * pd.fu;
        d.fv.row(row) = grad.transpose() * pd.fv;
      }
    }
  }

  std::shared_ptr<const DynamicsModel> plant_;
  std::vector<BarrierSpec> specs_;
  FiniteDifferenceOptions fd_;
  int q_ = 0;
};

inline std::shared_ptr<const AugmentedModel> augment(
    std::shared_ptr<const DynamicsModel> plant, std::vector<BarrierSpec> specs,
    FiniteDifferenceOptions fd = {}) {
  return std::make_shared<AugmentedModel>(std::move(plant), std::move(specs),
                                          fd);
}

struct SafetyReport {
  bool safe = true;
  int step = -1;
  /// Index into the concatenated constraint list of all specs.
  int constraint = -1;
};

/// Checks h_j(x_k) > 0 for every constraint and every k = 0..N. Only the
/// first `plant_dim` components of each state are handed to h (pass -1 to
/// use the whole vector).
inline SafetyReport is_safe_trajectory(const std::vector<BarrierSpec>& specs,
                                       const Trajectory& traj,
                                       int plant_dim = -1) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Vector x = plant_dim < 0 ? traj.states[k]
                                   : Vector(traj.states[k].head(plant_dim));
    int offset = 0;
    for (const auto& spec : specs) {
      for (std::size_t j = 0; j < spec.constraints.size(); ++j) {
        if (!(spec.constraints[j].value(x) > 0.0))
          return {false, static_cast<int>(k), offset + static_cast<int>(j)};
      }
      offset += static_cast<int>(spec.constraints.size());
    }
  }
  return {};
}

}  // namespace safegame

#endif  // SAFEGAME_BARRIER_HPP
