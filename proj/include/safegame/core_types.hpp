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

#ifndef SAFEGAME_CORE_TYPES_HPP
#define SAFEGAME_CORE_TYPES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace safegame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Size mismatch. `index()` is the offending timestep or component, -1 if
/// none applies.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, int index = -1)
      : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// A computation produced NaN/Inf. `index()` is the first bad component.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, int index)
      : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

/// Index of the first non-finite entry, -1 when all are finite.
inline int first_non_finite(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) return static_cast<int>(i);
  }
  return -1;
}

inline void require_size(const Vector& x, Eigen::Index n, const char* name,
                         int index = -1) {
  if (x.size() != n) {
    throw DimensionError(std::string(name) + " has dimension " +
                             std::to_string(x.size()) + ", expected " +
                             std::to_string(n) +
                             (index >= 0 ? " at index " + std::to_string(index)
                                         : std::string()),
                         index);
  }
}

/// States x̂_0..x̂_N and both players' inputs u_0..u_{N-1}, v_0..v_{N-1}.
/// States are augmented (plant followed by barrier states) whenever the
/// trajectory comes from an augmented model.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> min_inputs;
  std::vector<Vector> max_inputs;
  double dt = 0.0;

  int horizon() const { return static_cast<int>(min_inputs.size()); }

  /// Throws DimensionError naming the first inconsistent index.
  void validate(int state_dim, int min_dim, int max_dim) const {
    const int n = horizon();
    if (static_cast<int>(states.size()) != n + 1) {
      throw DimensionError("trajectory has " + std::to_string(states.size()) +
                               " states for horizon " + std::to_string(n),
                           static_cast<int>(states.size()));
    }
    if (static_cast<int>(max_inputs.size()) != n) {
      throw DimensionError("trajectory has " +
                               std::to_string(max_inputs.size()) +
                               " max inputs for horizon " + std::to_string(n),
                           static_cast<int>(max_inputs.size()));
    }
    for (int k = 0; k <= n; ++k) require_size(states[k], state_dim, "state", k);
    for (int k = 0; k < n; ++k) {
      require_size(min_inputs[k], min_dim, "min input", k);
      require_size(max_inputs[k], max_dim, "max input", k);
    }
  }

  bool all_finite() const {
    for (const auto& x : states)
      if (!x.allFinite()) return false;
    for (const auto& u : min_inputs)
      if (!u.allFinite()) return false;
    for (const auto& v : max_inputs)
      if (!v.allFinite()) return false;
    return true;
  }
};

enum class RegularizationScheme { kEigenClamp, kAdditive };

struct SolverOptions {
  /// Stop once the accepted iteration changes the total cost by less than this.
  double convergence_threshold = 1e-4;
  int max_iterations = 200;

  RegularizationScheme regularization = RegularizationScheme::kEigenClamp;
  /// Eigenvalue floor for the clamp scheme, diagonal shift for the additive one.
  double initial_regularization = 1e-6;
  double max_regularization = 1e10;
  double regularization_increase = 10.0;
  double regularization_decrease = 2.0;

  double line_search_shrink = 0.5;
  double min_step = 1e-3;
  /// Optional Armijo-like floor on |z|; zero accepts on sign alone.
  double min_ratio = 0.0;

  bool max_player_enabled = true;
  /// false drops the dynamics' second-order tensors (Gauss-Newton).
  bool second_order_dynamics = true;

  void validate() const {
    if (!(convergence_threshold > 0.0))
      throw Error("convergence_threshold must be positive");
    if (max_iterations < 1) throw Error("max_iterations must be at least 1");
    if (!(initial_regularization > 0.0) ||
        !(max_regularization >= initial_regularization))
      throw Error("regularization bounds must satisfy 0 < initial <= max");
    if (!(regularization_increase > 1.0) || !(regularization_decrease >= 1.0))
      throw Error("regularization schedule factors must exceed one");
    if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0))
      throw Error("line_search_shrink must lie in (0,1)");
    if (!(min_step > 0.0 && min_step <= 1.0))
      throw Error("min_step must lie in (0,1]");
    if (!(min_ratio >= 0.0)) throw Error("min_ratio must be non-negative");
  }
};

/// Both players' local strategies δu = k_u + K_u δx̂, δv = k_v + K_v δx̂.
///
/// Gains exist for timesteps 1..N-1 only, matching the running-cost index;
/// entry i belongs to timestep i+1. Inputs at timestep 0 stay at their
/// nominal values. When the max player is disabled the v gains are
/// zero-sized.
struct GamePolicy {
  std::vector<Vector> ff_u;
  std::vector<Matrix> fb_u;
  std::vector<Vector> ff_v;
  std::vector<Matrix> fb_v;

  int size() const { return static_cast<int>(ff_u.size()); }
  bool has_max_player() const { return !ff_v.empty() && ff_v.front().size() > 0; }

  const Vector& k_u(int k) const { return ff_u.at(k - 1); }
  const Matrix& K_u(int k) const { return fb_u.at(k - 1); }
  const Vector& k_v(int k) const { return ff_v.at(k - 1); }
  const Matrix& K_v(int k) const { return fb_v.at(k - 1); }
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double delta_v = 0.0;
  double alpha_u = 0.0;
  double alpha_v = 0.0;
  double regularization = 0.0;
  double expected_u = 0.0;
  double expected_v = 0.0;
  double ratio_u = 0.0;
  double ratio_v = 0.0;
  bool min_accepted = false;
  bool max_accepted = false;
  int trials = 0;
};

struct Solution {
  Trajectory trajectory;
  GamePolicy policy;
  /// V_k, k = 0..N.
  std::vector<double> value;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> log;
};

}  // namespace safegame

#endif  // SAFEGAME_CORE_TYPES_HPP
