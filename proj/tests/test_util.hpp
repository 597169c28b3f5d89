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

// Helpers shared by the unit tests and the acceptance binary.

#ifndef SAFEGAME_TESTS_TEST_UTIL_HPP
#define SAFEGAME_TESTS_TEST_UTIL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "safegame/safegame.hpp"

namespace safegame::testing {

inline Vector random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

/// A Aᵀ + floor·I.
inline Matrix random_spd(std::mt19937_64& rng, int n, double floor) {
  const Matrix a = random_matrix(rng, n, n, 1.0);
  return a * a.transpose() + floor * Matrix::Identity(n, n);
}

/// ‖a − b‖ / max(‖b‖, floor), Frobenius norm.
inline double rel_error(const Matrix& a, const Matrix& b, double floor = 1e-8) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

/// Two-sided (min-max) LQ game solved by the discrete coupled Riccati
/// recursion over the block system [u; v], written independently of the
/// solver's Schur-complement path:
///
///   M = [R_u + BᵀPB, BᵀPC; CᵀPB, −R_v + CᵀPC],  [K_u; K_v] = −M⁻¹ [Bᵀ; Cᵀ] P A.
///
/// P is the value Hessian, so the stage weights enter as 2Q, 2R_u, 2R_v and
/// the recursion starts from P_N = 2S. Entry i of the result is the gain of
/// timestep i+1.
struct RiccatiGame {
  std::vector<Matrix> Ku, Kv;
};

inline RiccatiGame riccati_game(const Matrix& a, const Matrix& b, const Matrix& c,
                                const Matrix& q, const Matrix& ru, const Matrix& rv,
                                const Matrix& s, int gain_steps) {
  const int mu = static_cast<int>(b.cols());
  const int mv = static_cast<int>(c.cols());
  Matrix p = 2.0 * s;
  RiccatiGame out;
  out.Ku.resize(gain_steps);
  out.Kv.resize(gain_steps);
  Matrix bc(b.rows(), mu + mv);
  bc << b, c;
  for (int i = gain_steps - 1; i >= 0; --i) {
    Matrix r = Matrix::Zero(mu + mv, mu + mv);
    r.topLeftCorner(mu, mu) = 2.0 * ru;
    r.bottomRightCorner(mv, mv) = -2.0 * rv;
    const Matrix m = r + bc.transpose() * p * bc;
    const Matrix k = -m.fullPivLu().solve(bc.transpose() * p * a);
    out.Ku[i] = k.topRows(mu);
    out.Kv[i] = k.bottomRows(mv);
    const Matrix acl = a + bc * k;
    p = 2.0 * q + k.transpose() * r * k + acl.transpose() * p * acl;
    p = 0.5 * (p + p.transpose()).eval();
  }
  return out;
}

/// True when every stage of the game is strictly convex in u and strictly
/// concave in v under the recursion above.
inline bool convex_concave(const Matrix& a, const Matrix& b, const Matrix& c,
                           const Matrix& q, const Matrix& ru, const Matrix& rv,
                           const Matrix& s, int gain_steps, double margin = 1e-3) {
  const int mu = static_cast<int>(b.cols());
  const int mv = static_cast<int>(c.cols());
  Matrix p = 2.0 * s;
  Matrix bc(b.rows(), mu + mv);
  bc << b, c;
  for (int i = gain_steps - 1; i >= 0; --i) {
    const Matrix huu = 2.0 * ru + b.transpose() * p * b;
    const Matrix hvv = -2.0 * rv + c.transpose() * p * c;
    if (Eigen::SelfAdjointEigenSolver<Matrix>(huu).eigenvalues().minCoeff() < margin)
      return false;
    if (Eigen::SelfAdjointEigenSolver<Matrix>(hvv).eigenvalues().maxCoeff() > -margin)
      return false;
    Matrix r = Matrix::Zero(mu + mv, mu + mv);
    r.topLeftCorner(mu, mu) = 2.0 * ru;
    r.bottomRightCorner(mv, mv) = -2.0 * rv;
    const Matrix m = r + bc.transpose() * p * bc;
    const Matrix k = -m.fullPivLu().solve(bc.transpose() * p * a);
    const Matrix acl = a + bc * k;
    p = 2.0 * q + k.transpose() * r * k + acl.transpose() * p * acl;
    p = 0.5 * (p + p.transpose()).eval();
  }
  return true;
}

/// Plain finite-horizon LQR with the same scaling.
inline std::vector<Matrix> riccati_lqr(const Matrix& a, const Matrix& b, const Matrix& q,
                                       const Matrix& ru, const Matrix& s, int gain_steps) {
  Matrix p = 2.0 * s;
  std::vector<Matrix> out(gain_steps);
  for (int i = gain_steps - 1; i >= 0; --i) {
    const Matrix m = 2.0 * ru + b.transpose() * p * b;
    const Matrix k = -m.ldlt().solve(b.transpose() * p * a);
    out[i] = k;
    const Matrix acl = a + b * k;
    p = 2.0 * q + k.transpose() * (2.0 * ru) * k + acl.transpose() * p * acl;
    p = 0.5 * (p + p.transpose()).eval();
  }
  return out;
}

/// A random convex-concave LQ game ready for the solver.
struct LqGame {
  Matrix a, b, c, q, ru, rv, s;
  Vector x0;
  int horizon = 20;

  GameProblem problem() const {
    GameProblem p;
    p.model = std::make_shared<LinearModel>(a, b, c);
    p.cost = std::make_shared<QuadraticGameCost>(q, ru, rv, s, Vector::Zero(a.rows()));
    p.initial_state = x0;
    p.horizon = horizon;
    return p;
  }
};

/// Draws games until one passes the convex-concave filter.
inline LqGame random_lq_game(std::mt19937_64& rng, int horizon = 20,
                             bool equal_inputs = false) {
  std::uniform_int_distribution<int> dim_n(1, 4);
  std::uniform_int_distribution<int> dim_m(1, 2);
  for (;;) {
    LqGame g;
    g.horizon = horizon;
    const int n = dim_n(rng);
    const int mu = dim_m(rng);
    const int mv = equal_inputs ? mu : dim_m(rng);
    g.a = Matrix::Identity(n, n) + random_matrix(rng, n, n, 0.15);
    g.b = random_matrix(rng, n, mu, 0.5);
    g.c = random_matrix(rng, n, mv, 0.2);
    g.q = random_spd(rng, n, 0.1) * 0.1;
    g.ru = random_spd(rng, mu, 0.5);
    g.rv = random_spd(rng, mv, 2.0) * 2.0;
    g.s = random_spd(rng, n, 0.5);
    g.x0 = random_vector(rng, n, -1.0, 1.0);
    if (convex_concave(g.a, g.b, g.c, g.q, g.ru, g.rv, g.s, horizon - 1)) return g;
  }
}

}  // namespace safegame::testing

#endif  // SAFEGAME_TESTS_TEST_UTIL_HPP
