// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "subthz/simplex.hpp"

using namespace subthz;

TEST(Simplex, Quadratic1D) {
  const auto r = minimize_simplex([](const std::vector<double>& x) { return (x[0] - 2.0) * (x[0] - 2.0); }, {0.0});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
}

TEST(Simplex, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const auto r = minimize_simplex_restarted(f, {-1.2, 1.0}, {1e-12, 5000});
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Simplex, RestartIsFixedPoint) {
  auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 1.0, 2) + 3.0 * std::pow(x[1] + 2.0, 2); };
  const SimplexOptions opt{1e-10, 4000};
  const auto r = minimize_simplex(f, {5.0, 5.0}, opt);
  const auto again = minimize_simplex(f, r.x, opt);
  EXPECT_LT(r.value - again.value, opt.tolerance);
}

TEST(Simplex, NonFiniteStartIsDomainError) {
  auto f = [](const std::vector<double>&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(minimize_simplex(f, {1.0}), DomainError);
}

TEST(Simplex, InvalidRegionTreatedAsInfinite) {
  // log barrier: undefined for x <= 0
  auto f = [](const std::vector<double>& x) { return x[0] - std::log(x[0]); };
  const auto r = minimize_simplex(f, {3.0});
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
}

TEST(Simplex, MaxIterFlagged) {
  auto f = [](const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; };
  const auto r = minimize_simplex(f, {100.0, 100.0}, {1e-14, 5});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 5);
}
