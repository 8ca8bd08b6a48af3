#include "marginlab/lp.hpp"
#include "marginlab/random.hpp"

#include <gtest/gtest.h>

#include <optional>

namespace ml = marginlab;
using R = ml::Rational;

namespace {

// Oracle: enumerate every basis of {A x <= b, x >= 0} (slack form), solve the
// square system by Gaussian elimination and keep the best feasible vertex.
std::optional<double> vertex_enumeration(const ml::Matrix& a, const ml::Vector& b, const ml::Vector& c) {
  const std::size_t m = a.size(), n = c.size();
  const std::size_t cols = n + m;
  auto column = [&](std::size_t j, std::size_t i) {
    if (j < n) return a[i][j];
    return j - n == i ? 1.0 : 0.0;
  };
  std::optional<double> best;
  std::vector<std::size_t> pick(m);
  // Iterate over m-subsets of the n+m columns.
  std::vector<bool> mask(cols, false);
  std::fill(mask.end() - static_cast<std::ptrdiff_t>(m), mask.end(), true);
  do {
    std::size_t k = 0;
    for (std::size_t j = 0; j < cols; ++j)
      if (mask[j]) pick[k++] = j;
    ml::Matrix sys(m, ml::Vector(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t r = 0; r < m; ++r) sys[i][r] = column(pick[r], i);
      sys[i][m] = b[i];
    }
    bool singular = false;
    for (std::size_t col = 0; col < m && !singular; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r)
        if (std::abs(sys[r][col]) > std::abs(sys[piv][col])) piv = r;
      if (std::abs(sys[piv][col]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(sys[piv], sys[col]);
      for (std::size_t r = 0; r < m; ++r) {
        if (r == col) continue;
        const double f = sys[r][col] / sys[col][col];
        for (std::size_t q = col; q <= m; ++q) sys[r][q] -= f * sys[col][q];
      }
    }
    if (singular) continue;
    ml::Vector x(cols, 0.0);
    bool feasible = true;
    for (std::size_t r = 0; r < m; ++r) {
      x[pick[r]] = sys[r][m] / sys[r][r];
      if (x[pick[r]] < -1e-9) feasible = false;
    }
    if (!feasible) continue;
    double val = 0.0;
    for (std::size_t j = 0; j < n; ++j) val += c[j] * x[j];
    if (!best || val > *best) best = val;
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace

TEST(LpSolve, SingleConstraint) {
  ml::LinearProgram<double> lp;
  lp.objective = {1.0};
  lp.a_ub = {{1.0}};
  lp.b_ub = {1.0};
  lp.bounds = {ml::Bound<double>::free()};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Optimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(LpSolve, SimplexFace) {
  ml::LinearProgram<R> lp;
  lp.objective = {1, 1};
  lp.a_ub = {{1, 1}};
  lp.b_ub = {1};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Optimal);
  EXPECT_EQ(r.value, 1);
  auto sf = ml::standardize(lp);
  EXPECT_EQ(r.dual_value(sf), r.value);
  EXPECT_EQ(ml::lp_residuals(sf, r).worst(), 0);
}

TEST(LpSolve, InfeasibleWithFarkas) {
  for (int exact = 0; exact < 2; ++exact) {
    // x1 + x2 <= 1, x1 + x2 >= 3 (written as -x1 - x2 <= -3).
    if (exact) {
      ml::LinearProgram<R> lp{{1, 0}, {{1, 1}, {-1, -1}}, {1, -3}, {}, {}, {}};
      auto r = ml::lp_solve(lp);
      ASSERT_EQ(r.status, ml::LpStatus::Infeasible);
      EXPECT_TRUE(ml::verify_farkas(ml::standardize(lp), r.farkas_ub, r.farkas_eq));
    } else {
      ml::LinearProgram<double> lp{{1, 0}, {{1, 1}, {-1, -1}}, {1, -3}, {}, {}, {}};
      auto r = ml::lp_solve(lp);
      ASSERT_EQ(r.status, ml::LpStatus::Infeasible);
      EXPECT_TRUE(ml::verify_farkas(ml::standardize(lp), r.farkas_ub, r.farkas_eq));
    }
  }
  // Equality-constrained: x1 + x2 = -1 with x >= 0.
  ml::LinearProgram<R> lp;
  lp.objective = {0, 0};
  lp.a_eq = {{1, 1}};
  lp.b_eq = {-1};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Infeasible);
  EXPECT_TRUE(ml::verify_farkas(ml::standardize(lp), r.farkas_ub, r.farkas_eq));
}

TEST(LpSolve, UnboundedRay) {
  ml::LinearProgram<R> lp;
  lp.objective = {1, -1};
  lp.a_ub = {{-1, 1}};
  lp.b_ub = {2};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Unbounded);
  ASSERT_EQ(r.ray.size(), 2u);
  EXPECT_GT(r.ray[0] - r.ray[1], 0);        // improves the objective
  EXPECT_LE(-r.ray[0] + r.ray[1], 0);       // keeps the constraint
  EXPECT_GE(r.ray[0], 0);
  EXPECT_GE(r.ray[1], 0);
}

TEST(LpSolve, BoundsAndEqualities) {
  // max x - y s.t. x + y = 1, -2 <= x <= 0.5, y free.
  ml::LinearProgram<R> lp;
  lp.objective = {1, -1};
  lp.a_eq = {{1, 1}};
  lp.b_eq = {1};
  lp.bounds = {ml::Bound<R>::box(-2, R(1, 2)), ml::Bound<R>::free()};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Optimal);
  EXPECT_EQ(r.x[0], R(1, 2));
  EXPECT_EQ(r.x[1], R(1, 2));
  EXPECT_EQ(r.value, 0);
  auto sf = ml::standardize(lp);
  EXPECT_EQ(r.dual_value(sf), r.value);
}

TEST(LpSolve, DimensionMismatch) {
  ml::LinearProgram<double> lp;
  lp.objective = {1, 1};
  lp.a_ub = {{1}};
  lp.b_ub = {1};
  EXPECT_THROW(ml::lp_solve(lp), ml::InputError);
}

TEST(LpSolve, RandomAgainstVertexEnumeration) {
  ml::SplitMix64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 5, n = 8;
    ml::Matrix a(m, ml::Vector(n));
    ml::Vector b(m), c(n);
    for (auto& row : a)
      for (double& x : row) x = std::round(rng.uniform(-4.0, 6.0));
    for (double& x : b) x = std::round(rng.uniform(1.0, 10.0));  // x = 0 is feasible
    for (double& x : c) x = std::round(rng.uniform(-3.0, 5.0));
    // Bound the region so the oracle sees a polytope.
    for (std::size_t j = 0; j < n; ++j) a[trial % m][j] = std::abs(a[trial % m][j]) + 1.0;
    auto oracle = vertex_enumeration(a, b, c);
    ASSERT_TRUE(oracle);

    ml::LinearProgram<double> lpf{c, a, b, {}, {}, {}};
    auto rf = ml::lp_solve(lpf);
    ASSERT_EQ(rf.status, ml::LpStatus::Optimal);
    EXPECT_NEAR(rf.value, *oracle, 1e-7);

    ml::LinearProgram<R> lpr;
    lpr.objective.assign(c.begin(), c.end());
    lpr.b_ub.assign(b.begin(), b.end());
    for (auto& row : a) lpr.a_ub.emplace_back(row.begin(), row.end());
    auto rr = ml::lp_solve(lpr);
    ASSERT_EQ(rr.status, ml::LpStatus::Optimal);
    EXPECT_NEAR(ml::to_double(rr.value), *oracle, 1e-9);
    auto sf = ml::standardize(lpr);
    EXPECT_EQ(rr.dual_value(sf), rr.value);  // strong duality, exactly
    EXPECT_EQ(ml::lp_residuals(sf, rr).worst(), 0);
  }
}

TEST(LpSolve, DegenerateCyclingExample) {
  // Beale's classic cycling instance; Bland's rule must terminate.
  ml::LinearProgram<R> lp;
  lp.objective = {R(3, 4), -150, R(1, 50), -6};
  lp.a_ub = {{R(1, 4), -60, R(-1, 25), 9}, {R(1, 2), -90, R(-1, 50), 3}, {0, 0, 1, 0}};
  lp.b_ub = {0, 0, 1};
  auto r = ml::lp_solve(lp);
  ASSERT_EQ(r.status, ml::LpStatus::Optimal);
  EXPECT_EQ(r.value, R(1, 20));
}
