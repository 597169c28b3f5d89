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

#ifndef SAFEGAME_DYNAMICS_HPP
#define SAFEGAME_DYNAMICS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "safegame/core_types.hpp"

namespace safegame {

/// First and second derivatives of one discrete step x' = f(x, u, v).
///
/// Tensors are stored per output row: fxx[i] is the n×n Hessian of f_i,
/// fxu[i] is n×m_u, fuv[i] is m_u×m_v and so on. Empty tensor vectors mean
/// the second-order terms are absent (first-order or Gauss-Newton result)
/// and consumers treat them as zero.
struct Derivatives {
  Matrix fx;
  Matrix fu;
  Matrix fv;
  std::vector<Matrix> fxx;
  std::vector<Matrix> fuu;
  std::vector<Matrix> fvv;
  std::vector<Matrix> fxu;
  std::vector<Matrix> fxv;
  std::vector<Matrix> fuv;

  bool has_second_order() const { return !fxx.empty(); }
};

struct FiniteDifferenceOptions {
  /// Central-difference step is `first_order_step * (1 + |z_i|)`.
  double first_order_step = 1e-6;
  double second_order_step = 1e-4;
};

/// Discrete-time two-player model. Implementations are immutable; every
/// method is reentrant.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual int state_dim() const = 0;
  virtual int min_input_dim() const = 0;
  virtual int max_input_dim() const = 0;
  virtual double dt() const = 0;

  /// Raw discrete map. No dimension or finiteness checks; see step().
  virtual Vector next_state(const Vector& x, const Vector& u,
                            const Vector& v) const = 0;

  virtual bool has_analytic_jacobians() const { return false; }
  /// Fills fx, fu, fv. Only called when has_analytic_jacobians().
  virtual void jacobians(const Vector&, const Vector&, const Vector&,
                         Derivatives&) const {
    throw Error("model has no analytic jacobians");
  }

  virtual bool has_analytic_hessians() const { return false; }
  /// Fills the six tensors. Only called when has_analytic_hessians().
  virtual void hessians(const Vector&, const Vector&, const Vector&,
                        Derivatives&) const {
    throw Error("model has no analytic hessians");
  }

  /// Whether `x` lies outside the model's admissible region. Plain models
  /// have none; models with barrier states override this.
  virtual bool is_unsafe(const Vector&) const { return false; }
};

enum class Discretization { kForwardEuler };

/// Continuous vector field ẋ = g(x, u, v) discretized with forward Euler.
/// Subclasses may provide the field's derivatives; the discrete ones follow
/// as f_x = I + dt·g_x, f_u = dt·g_u and so on.
class ContinuousModel : public DynamicsModel {
 public:
  explicit ContinuousModel(double dt,
                           Discretization scheme = Discretization::kForwardEuler)
      : dt_(dt), scheme_(scheme) {
    if (!(dt > 0.0)) throw Error("timestep must be positive");
  }

  double dt() const override { return dt_; }
  Discretization discretization() const { return scheme_; }

  virtual Vector vector_field(const Vector& x, const Vector& u,
                              const Vector& v) const = 0;

  virtual bool has_field_jacobians() const { return false; }
  virtual void field_jacobians(const Vector&, const Vector&, const Vector&,
                               Matrix&, Matrix&, Matrix&) const {
    throw Error("model has no analytic field jacobians");
  }
  virtual bool has_field_hessians() const { return false; }
  /// Same layout as Derivatives' tensors, for g instead of f.
  virtual void field_hessians(const Vector&, const Vector&, const Vector&,
                              Derivatives&) const {
    throw Error("model has no analytic field hessians");
  }

  Vector next_state(const Vector& x, const Vector& u,
                    const Vector& v) const override {
    return x + dt_ * vector_field(x, u, v);
  }

  bool has_analytic_jacobians() const override { return has_field_jacobians(); }
  void jacobians(const Vector& x, const Vector& u, const Vector& v,
                 Derivatives& d) const override {
    Matrix gx, gu, gv;
    field_jacobians(x, u, v, gx, gu, gv);
    d.fx = Matrix::Identity(state_dim(), state_dim()) + dt_ * gx;
    d.fu = dt_ * gu;
    d.fv = dt_ * gv;
  }

  bool has_analytic_hessians() const override { return has_field_hessians(); }
  void hessians(const Vector& x, const Vector& u, const Vector& v,
                Derivatives& d) const override {
    field_hessians(x, u, v, d);
    for (auto* t : {&d.fxx, &d.fuu, &d.fvv, &d.fxu, &d.fxv, &d.fuv})
      for (auto& m : *t) m *= dt_;
  }

 private:
  double dt_;
  Discretization scheme_;
};

namespace detail {

inline void check_inputs(const DynamicsModel& model, const Vector& x,
                         const Vector& u, const Vector& v) {
  require_size(x, model.state_dim(), "state");
  require_size(u, model.min_input_dim(), "min input");
  require_size(v, model.max_input_dim(), "max input");
}

/// Evaluates f at the joint point z = [x; u; v].
inline Vector eval_joint(const DynamicsModel& model, const Vector& z) {
  const int n = model.state_dim();
  const int mu = model.min_input_dim();
  const int mv = model.max_input_dim();
  Vector out = model.next_state(z.head(n), z.segment(n, mu), z.tail(mv));
  const int bad = first_non_finite(out);
  if (bad >= 0) {
    throw NonFiniteError(
        "finite-difference evaluation left the model's domain at output " +
            std::to_string(bad),
        bad);
  }
  return out;
}

inline Vector joint(const Vector& x, const Vector& u, const Vector& v) {
  Vector z(x.size() + u.size() + v.size());
  z << x, u, v;
  return z;
}

/// Central-difference Jacobian of f with respect to z (n × d).
inline Matrix fd_jacobian(const DynamicsModel& model, const Vector& z,
                          double step) {
  const int n = model.state_dim();
  Matrix jac(n, z.size());
  Vector zp = z;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double h = step * (1.0 + std::abs(z[j]));
    zp[j] = z[j] + h;
    const Vector fp = eval_joint(model, zp);
    zp[j] = z[j] - h;
    const Vector fm = eval_joint(model, zp);
    zp[j] = z[j];
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

inline Matrix analytic_joint_jacobian(const DynamicsModel& model,
                                      const Vector& z) {
  const int n = model.state_dim();
  const int mu = model.min_input_dim();
  const int mv = model.max_input_dim();
  Derivatives d;
  model.jacobians(z.head(n), z.segment(n, mu), z.tail(mv), d);
  Matrix jac(n, z.size());
  jac << d.fx, d.fu, d.fv;
  return jac;
}

/// Splits per-output joint Hessians (d × d each) into the six blocks.
inline void split_joint_hessians(const std::vector<Matrix>& joint_hess, int n,
                                 int mu, int mv, Derivatives& d) {
  const std::size_t rows = joint_hess.size();
  d.fxx.resize(rows);
  d.fuu.resize(rows);
  d.fvv.resize(rows);
  d.fxu.resize(rows);
  d.fxv.resize(rows);
  d.fuv.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    const Matrix& hz = joint_hess[i];
    d.fxx[i] = hz.topLeftCorner(n, n);
    d.fuu[i] = hz.block(n, n, mu, mu);
    d.fvv[i] = hz.bottomRightCorner(mv, mv);
    d.fxu[i] = hz.block(0, n, n, mu);
    d.fxv[i] = hz.block(0, n + mu, n, mv);
    d.fuv[i] = hz.block(n, n + mu, mu, mv);
  }
}

/// Symmetrized central difference of analytic Jacobians.
inline std::vector<Matrix> fd_hessians_from_jacobian(const DynamicsModel& model,
                                                     const Vector& z,
                                                     double step) {
  const int n = model.state_dim();
  const Eigen::Index dim = z.size();
  std::vector<Matrix> hess(n, Matrix::Zero(dim, dim));
  Vector zp = z;
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double h = step * (1.0 + std::abs(z[j]));
    zp[j] = z[j] + h;
    const Matrix jp = analytic_joint_jacobian(model, zp);
    zp[j] = z[j] - h;
    const Matrix jm = analytic_joint_jacobian(model, zp);
    zp[j] = z[j];
    const Matrix col = (jp - jm) / (2.0 * h);
    if (!col.allFinite())
      throw NonFiniteError("finite-difference evaluation left the model's domain",
                           static_cast<int>(j));
    for (int i = 0; i < n; ++i) hess[i].col(j) = col.row(i).transpose();
  }
  for (auto& m : hess) m = 0.5 * (m + m.transpose()).eval();
  return hess;
}

/// Nested central differences of the map itself.
inline std::vector<Matrix> fd_hessians_from_map(const DynamicsModel& model,
                                                const Vector& z, double step) {
  const int n = model.state_dim();
  const Eigen::Index dim = z.size();
  std::vector<Matrix> hess(n, Matrix::Zero(dim, dim));
  const Vector f0 = eval_joint(model, z);
  Vector zp = z;
  for (Eigen::Index a = 0; a < dim; ++a) {
    const double ha = step * (1.0 + std::abs(z[a]));
    zp[a] = z[a] + ha;
    const Vector fp = eval_joint(model, zp);
    zp[a] = z[a] - ha;
    const Vector fm = eval_joint(model, zp);
    zp[a] = z[a];
    const Vector diag = (fp - 2.0 * f0 + fm) / (ha * ha);
    for (int i = 0; i < n; ++i) hess[i](a, a) = diag[i];
    for (Eigen::Index b = a + 1; b < dim; ++b) {
      const double hb = step * (1.0 + std::abs(z[b]));
      zp[a] = z[a] + ha;
      zp[b] = z[b] + hb;
      const Vector fpp = eval_joint(model, zp);
      zp[b] = z[b] - hb;
      const Vector fpm = eval_joint(model, zp);
      zp[a] = z[a] - ha;
      const Vector fmm = eval_joint(model, zp);
      zp[b] = z[b] + hb;
      const Vector fmp = eval_joint(model, zp);
      zp[a] = z[a];
      zp[b] = z[b];
      const Vector cross = (fpp - fpm - fmp + fmm) / (4.0 * ha * hb);
      for (int i = 0; i < n; ++i) {
        hess[i](a, b) = cross[i];
        hess[i](b, a) = cross[i];
      }
    }
  }
  return hess;
}

}  // namespace detail

/// One checked step. Throws DimensionError on size mismatch and
/// NonFiniteError (carrying the component index) on a non-finite result.
inline Vector step(const DynamicsModel& model, const Vector& x, const Vector& u,
                   const Vector& v) {
  detail::check_inputs(model, x, u, v);
  Vector next = model.next_state(x, u, v);
  const int bad = first_non_finite(next);
  if (bad >= 0) {
    throw NonFiniteError("step produced a non-finite component " +
                             std::to_string(bad),
                         bad);
  }
  return next;
}

/// First-order derivatives: analytic when the model supplies them, central
/// finite differences otherwise.
inline Derivatives linearize(const DynamicsModel& model, const Vector& x,
                             const Vector& u, const Vector& v,
                             const FiniteDifferenceOptions& fd = {}) {
  detail::check_inputs(model, x, u, v);
  Derivatives d;
  if (model.has_analytic_jacobians()) {
    model.jacobians(x, u, v, d);
    return d;
  }
  const int n = model.state_dim();
  const int mu = model.min_input_dim();
  const int mv = model.max_input_dim();
  const Matrix jac =
      detail::fd_jacobian(model, detail::joint(x, u, v), fd.first_order_step);
  d.fx = jac.leftCols(n);
  d.fu = jac.middleCols(n, mu);
  d.fv = jac.rightCols(mv);
  return d;
}

/// First- and second-order derivatives. With `second_order == false` the
/// tensors are left empty (Gauss-Newton). Otherwise they come from the model
/// when analytic, from differences of analytic Jacobians when only those
/// exist, and from nested central differences of the map as a last resort.
inline Derivatives quadratize(const DynamicsModel& model, const Vector& x,
                              const Vector& u, const Vector& v,
                              const FiniteDifferenceOptions& fd = {},
                              bool second_order = true) {
  Derivatives d = linearize(model, x, u, v, fd);
  if (!second_order) return d;
  if (model.has_analytic_hessians()) {
    model.hessians(x, u, v, d);
    return d;
  }
  const Vector z = detail::joint(x, u, v);
  const std::vector<Matrix> hz =
      model.has_analytic_jacobians()
          ? detail::fd_hessians_from_jacobian(model, z, fd.second_order_step)
          : detail::fd_hessians_from_map(model, z, fd.second_order_step);
  detail::split_joint_hessians(hz, model.state_dim(), model.min_input_dim(),
                               model.max_input_dim(), d);
  return d;
}

/// Zero tensors with the right shapes, for models that are exactly linear.
inline void zero_hessians(int n, int mu, int mv, Derivatives& d) {
  d.fxx.assign(n, Matrix::Zero(n, n));
  d.fuu.assign(n, Matrix::Zero(mu, mu));
  d.fvv.assign(n, Matrix::Zero(mv, mv));
  d.fxu.assign(n, Matrix::Zero(n, mu));
  d.fxv.assign(n, Matrix::Zero(n, mv));
  d.fuv.assign(n, Matrix::Zero(mu, mv));
}

/// x_{k+1} = A x + B u + C v.
class LinearModel : public DynamicsModel {
 public:
  LinearModel(Matrix a, Matrix b, Matrix c, double dt = 1.0)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), dt_(dt) {
    if (a_.rows() != a_.cols() || b_.rows() != a_.rows() ||
        c_.rows() != a_.rows())
      throw DimensionError("linear model matrices have inconsistent rows");
  }

  int state_dim() const override { return static_cast<int>(a_.rows()); }
  int min_input_dim() const override { return static_cast<int>(b_.cols()); }
  int max_input_dim() const override { return static_cast<int>(c_.cols()); }
  double dt() const override { return dt_; }

  Vector next_state(const Vector& x, const Vector& u,
                    const Vector& v) const override {
    return a_ * x + b_ * u + c_ * v;
  }

  bool has_analytic_jacobians() const override { return true; }
  void jacobians(const Vector&, const Vector&, const Vector&,
                 Derivatives& d) const override {
    d.fx = a_;
    d.fu = b_;
    d.fv = c_;
  }
  bool has_analytic_hessians() const override { return true; }
  void hessians(const Vector&, const Vector&, const Vector&,
                Derivatives& d) const override {
    zero_hessians(state_dim(), min_input_dim(), max_input_dim(), d);
  }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }

 private:
  Matrix a_, b_, c_;
  double dt_;
};

}  // namespace safegame

#endif  // SAFEGAME_DYNAMICS_HPP
