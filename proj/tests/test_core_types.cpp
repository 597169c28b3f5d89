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
#include <limits>

#include "safegame/core_types.hpp"

namespace safegame {
namespace {

Trajectory make_trajectory(int horizon, int n, int mu, int mv) {
  Trajectory t;
  t.dt = 0.1;
  t.states.assign(horizon + 1, Vector::Zero(n));
  t.min_inputs.assign(horizon, Vector::Zero(mu));
  t.max_inputs.assign(horizon, Vector::Zero(mv));
  return t;
}

TEST(FirstNonFinite, ReportsFirstBadIndex) {
  Vector x(4);
  x << 1.0, 2.0, std::numeric_limits<double>::quiet_NaN(), INFINITY;
  EXPECT_EQ(first_non_finite(x), 2);
  EXPECT_EQ(first_non_finite(Vector::Ones(3)), -1);
}

TEST(RequireSize, ThrowsWithIndex) {
  try {
    require_size(Vector::Zero(2), 3, "state", 7);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.index(), 7);
    EXPECT_NE(std::string(e.what()).find("index 7"), std::string::npos);
  }
}

TEST(Trajectory, ValidateAcceptsConsistentShapes) {
  const Trajectory t = make_trajectory(5, 3, 2, 1);
  EXPECT_EQ(t.horizon(), 5);
  EXPECT_NO_THROW(t.validate(3, 2, 1));
}

TEST(Trajectory, ValidateNamesOffendingStep) {
  Trajectory t = make_trajectory(5, 3, 2, 1);
  t.min_inputs[3] = Vector::Zero(4);
  try {
    t.validate(3, 2, 1);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.index(), 3);
  }
}

TEST(Trajectory, ValidateRejectsWrongStateCount) {
  Trajectory t = make_trajectory(5, 3, 2, 1);
  t.states.pop_back();
  EXPECT_THROW(t.validate(3, 2, 1), DimensionError);
}

TEST(Trajectory, AllFiniteSeesEveryField) {
  Trajectory t = make_trajectory(3, 2, 1, 1);
  EXPECT_TRUE(t.all_finite());
  t.max_inputs[1][0] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(t.all_finite());
}

TEST(SolverOptions, DefaultsAreValid) {
  const SolverOptions o;
  EXPECT_NO_THROW(o.validate());
  EXPECT_DOUBLE_EQ(o.convergence_threshold, 1e-4);
  EXPECT_DOUBLE_EQ(o.initial_regularization, 1e-6);
  EXPECT_EQ(o.regularization, RegularizationScheme::kEigenClamp);
}

TEST(SolverOptions, RejectsBadValues) {
  auto bad = [](auto mutate) {
    SolverOptions o;
    mutate(o);
    EXPECT_THROW(o.validate(), Error);
  };
  bad([](SolverOptions& o) { o.convergence_threshold = 0.0; });
  bad([](SolverOptions& o) { o.max_iterations = 0; });
  bad([](SolverOptions& o) { o.initial_regularization = -1.0; });
  bad([](SolverOptions& o) { o.max_regularization = 1e-9; });
  bad([](SolverOptions& o) { o.regularization_increase = 1.0; });
  bad([](SolverOptions& o) { o.line_search_shrink = 1.0; });
  bad([](SolverOptions& o) { o.min_step = 0.0; });
  bad([](SolverOptions& o) { o.min_ratio = -0.1; });
}

TEST(GamePolicy, AccessorsAreOffsetByOne) {
  GamePolicy p;
  for (int i = 0; i < 3; ++i) {
    p.ff_u.push_back(Vector::Constant(1, i));
    p.fb_u.push_back(Matrix::Constant(1, 2, i));
    p.ff_v.push_back(Vector::Constant(1, 10 + i));
    p.fb_v.push_back(Matrix::Constant(1, 2, 10 + i));
  }
  EXPECT_EQ(p.size(), 3);
  EXPECT_TRUE(p.has_max_player());
  EXPECT_DOUBLE_EQ(p.k_u(1)[0], 0.0);
  EXPECT_DOUBLE_EQ(p.K_u(3)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(p.k_v(2)[0], 11.0);
  EXPECT_THROW(p.k_u(0), std::out_of_range);
  EXPECT_THROW(p.k_u(4), std::out_of_range);
}

TEST(GamePolicy, ZeroSizedMaxGainsMeanNoMaxPlayer) {
  GamePolicy p;
  p.ff_u.push_back(Vector::Zero(1));
  p.fb_u.push_back(Matrix::Zero(1, 2));
  p.ff_v.push_back(Vector(0));
  p.fb_v.push_back(Matrix(0, 2));
  EXPECT_FALSE(p.has_max_player());
}

}  // namespace
}  // namespace safegame
