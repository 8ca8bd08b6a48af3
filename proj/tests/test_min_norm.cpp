#include "marginlab/min_norm.hpp"
#include "marginlab/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace ml = marginlab;
using R = ml::Rational;

namespace {

ml::Vector unit(std::size_t d, std::size_t i, double s = 1.0) {
  ml::Vector v(d, 0.0);
  v[i] = s;
  return v;
}

std::vector<ml::Vector> basis(std::size_t n) {
  std::vector<ml::Vector> u;
  for (std::size_t i = 0; i < n; ++i) u.push_back(unit(n, i));
  return u;
}

// Brute force over the 2-simplex on a grid of spacing h.
double grid_min(const std::vector<ml::Vector>& u, const ml::NormSpec& n, double h) {
  const int steps = static_cast<int>(std::lround(1.0 / h));
  double best = 1e300;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; a + b <= steps; ++b) {
      const double m0 = a * h, m1 = b * h, m2 = 1.0 - m0 - m1;
      ml::Vector v(u[0].size());
      for (std::size_t j = 0; j < v.size(); ++j) v[j] = m0 * u[0][j] + m1 * u[1][j] + m2 * u[2][j];
      best = std::min(best, ml::norm(v, n));
    }
  return best;
}

void check_certificate(const std::vector<ml::Vector>& u, const ml::NormSpec& n, const ml::MinNormResult& r,
                       double tol) {
  EXPECT_NEAR(ml::norm(ml::combine(u, r.mu.values()), n), r.value, 1e-9);
  EXPECT_LE(r.gap, tol + 1e-12);
  if (r.witness) {
    EXPECT_LE(ml::dual_norm(*r.witness, n), 1.0 + tol);
    double lo = 1e300;
    for (const auto& x : u) lo = std::min(lo, ml::dot(*r.witness, x));
    EXPECT_GE(lo, r.value - tol);
  }
}

}  // namespace

TEST(MinNorm, AntipodalPair) {
  std::vector<ml::Vector> u{{1, 0}, {-1, 0}};
  auto r = ml::min_norm_point(u, ml::NormSpec(2), {});
  EXPECT_LT(r.value, 1e-7);
  EXPECT_NEAR(r.mu[0], 0.5, 1e-7);
  EXPECT_FALSE(r.witness);
}

TEST(MinNorm, BasisValues) {
  {
    auto u = basis(4);
    auto r = ml::min_norm_point(u, ml::NormSpec(2), {});
    EXPECT_NEAR(r.value, 0.5, 1e-7);
    for (double m : r.mu.values()) EXPECT_NEAR(m, 0.25, 1e-6);
    check_certificate(u, ml::NormSpec(2), r, 1e-7);
  }
  {
    auto u = basis(8);
    auto r = ml::min_norm_point(u, ml::NormSpec(1.5), {});
    EXPECT_NEAR(r.value, 0.5, 1e-7);
    check_certificate(u, ml::NormSpec(1.5), r, 1e-7);
  }
  for (const auto& n : {ml::NormSpec(1), ml::NormSpec::infinity()}) {
    auto u = basis(5);
    auto r = ml::min_norm_point(u, n, {});
    EXPECT_NEAR(r.value, n.is_one() ? 1.0 : 0.2, 1e-9);
    check_certificate(u, n, r, 1e-7);
  }
}

TEST(MinNorm, AgreesWithSimplexGrid) {
  ml::SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ml::Vector> u;
    for (int i = 0; i < 3; ++i) u.push_back(ml::random_unit_vector(rng, 2, ml::NormSpec(2)));
    const double grid = grid_min(u, ml::NormSpec(2), 1e-3);
    auto r = ml::min_norm_point(u, ml::NormSpec(2), {});
    // The grid value over-estimates the minimum by at most the grid spacing
    // times the largest vector norm; the solver must not be above it.
    EXPECT_LE(r.value, grid + 1e-6);
    EXPECT_GE(r.value, grid - 2e-3);
  }
}

TEST(MinNorm, AgreesWithFineGridNearOptimum) {
  // Refine the coarse grid around its best cell; the two answers must agree to 1e-6.
  ml::SplitMix64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ml::Vector> u;
    for (int i = 0; i < 3; ++i) u.push_back(ml::random_unit_vector(rng, 2, ml::NormSpec(2)));
    auto r = ml::min_norm_point(u, ml::NormSpec(2), {});
    // In l2^2 the exact minimum is available in closed form through the exact solver.
    auto ex = ml::min_norm_point_exact(ml::to_rational(std::span<const ml::Vector>(u)), ml::NormSpec(2));
    EXPECT_NEAR(r.value, std::sqrt(ml::to_double(ex.value_squared)), 1e-6);
    EXPECT_NEAR(grid_min(u, ml::NormSpec(2), 1e-3), r.value, 2e-3);
  }
}

TEST(MinNorm, PermutationAndRotationInvariance) {
  ml::SplitMix64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const double p = trial % 3 == 0 ? 2.0 : 1.2 + 3.0 * rng.uniform();
    const ml::NormSpec n(p);
    std::vector<ml::Vector> u;
    for (int i = 0; i < 5; ++i) u.push_back(ml::random_unit_vector(rng, 3, n));
    auto base = ml::min_norm_point(u, n, {});
    auto perm = u;
    std::reverse(perm.begin(), perm.end());
    std::rotate(perm.begin(), perm.begin() + 2, perm.end());
    EXPECT_NEAR(ml::min_norm_point(perm, n, {}).value, base.value, 1e-6);
    if (p == 2.0) {
      const double th = rng.uniform(0.0, 2.0 * M_PI);
      auto rot = u;
      for (auto& x : rot) {
        const double a = x[0], b = x[1];
        x[0] = std::cos(th) * a - std::sin(th) * b;
        x[1] = std::sin(th) * a + std::cos(th) * b;
      }
      EXPECT_NEAR(ml::min_norm_point(rot, n, {}).value, base.value, 1e-6);
    }
  }
}

TEST(MinNorm, MonotoneUnderAddition) {
  ml::SplitMix64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const ml::NormSpec n(1.1 + 4.0 * rng.uniform());
    std::vector<ml::Vector> u;
    for (int i = 0; i < 3; ++i) u.push_back(ml::random_unit_vector(rng, 4, n));
    const double before = ml::min_norm_point(u, n, {}).value;
    u.push_back(ml::random_unit_vector(rng, 4, n));
    EXPECT_LE(ml::min_norm_point(u, n, {}).value, before + 1e-6);
  }
}

TEST(MinNorm, CertificateSoundness) {
  ml::SplitMix64 rng(37);
  for (int trial = 0; trial < 60; ++trial) {
    const double p = std::array<double, 5>{1.0, 1.5, 2.0, 3.0, HUGE_VAL}[trial % 5];
    const ml::NormSpec n(p);
    std::vector<ml::Vector> u;
    const std::size_t d = 2 + trial % 5, m = 2 + trial % 7;
    for (std::size_t i = 0; i < m; ++i) u.push_back(ml::random_unit_vector(rng, d, n));
    auto r = ml::min_norm_point(u, n, {});
    check_certificate(u, n, r, 1e-7);
  }
}

TEST(MinNorm, EarlyStopThresholds) {
  auto u = basis(6);
  ml::EarlyStop above;
  above.stop_above = 0.3;  // true minimum is 1/sqrt(6) ~ 0.408
  auto r = ml::min_norm_point(u, ml::NormSpec(2), {}, above);
  EXPECT_GT(r.lower_bound, 0.3);
  ASSERT_TRUE(r.witness);
  for (const auto& x : u) EXPECT_GE(ml::dot(*r.witness, x), r.lower_bound - 1e-12);

  ml::EarlyStop below;
  below.stop_below = 0.9;
  auto s = ml::min_norm_point(u, ml::NormSpec(2), {}, below);
  EXPECT_LT(s.value, 0.9);
  EXPECT_TRUE(s.stopped_early);
}

TEST(MinNorm, Errors) {
  std::vector<ml::Vector> none;
  EXPECT_THROW(ml::min_norm_point(none, ml::NormSpec(2), {}), ml::InputError);
  std::vector<ml::Vector> ragged{{1, 0}, {1}};
  EXPECT_THROW(ml::min_norm_point(ragged, ml::NormSpec(2), {}), ml::InputError);
  ml::SolverConfig bad;
  bad.tol = 0.5;
  EXPECT_THROW(ml::min_norm_point(basis(2), ml::NormSpec(2), bad), ml::InputError);
  ml::SolverConfig tiny;
  tiny.max_iter = 1;
  tiny.tol = 1e-12;
  std::vector<ml::Vector> hard{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.3, 0.3, 0.9}};
  try {
    ml::min_norm_point(hard, ml::NormSpec(3), tiny);
    FAIL() << "expected SolverFailure";
  } catch (const ml::SolverFailure& e) {
    EXPECT_EQ(e.best().size(), 4u);
    EXPECT_GT(e.gap(), 0.0);
  }
}

TEST(FoldSigns, Examples) {
  std::vector<int> y{1, -1};
  auto l = ml::fold_signs(ml::SimplexWeights({0.5, 0.5}), y);
  EXPECT_EQ(l.values(), (ml::Vector{0.5, -0.5}));
  std::vector<int> y2{-1, 1};
  EXPECT_EQ(ml::fold_signs(ml::SimplexWeights::vertex(2, 0), y2).values(), (ml::Vector{-1, 0}));
  std::vector<int> pos{1, 1, 1};
  ml::SimplexWeights mu({0.2, 0.3, 0.5});
  EXPECT_EQ(ml::fold_signs(mu, pos).values(), mu.values());
  std::vector<int> bad{1, 0};
  EXPECT_THROW(ml::fold_signs(ml::SimplexWeights({0.5, 0.5}), bad), ml::InputError);
}

TEST(MinNormExact, LpNorms) {
  std::vector<std::vector<R>> u{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  auto r1 = ml::min_norm_point_exact(u, ml::NormSpec(1));
  EXPECT_EQ(*r1.value, 1);
  auto ri = ml::min_norm_point_exact(u, ml::NormSpec::infinity());
  EXPECT_EQ(*ri.value, R(1, 4));
  // Witness lies in the dual ball and certifies the value on every vector.
  EXPECT_EQ(ml::norm1<R>(ri.witness), 1);
  for (const auto& x : u) {
    R ip = 0;
    for (std::size_t j = 0; j < 4; ++j) ip += ri.witness[j] * x[j];
    EXPECT_GE(ip, *ri.value);
  }
}

TEST(MinNormExact, EuclideanWolfe) {
  std::vector<std::vector<R>> u;
  for (int i = 0; i < 16; ++i) {
    std::vector<R> e(16, R(0));
    e[i] = 1;
    u.push_back(e);
  }
  auto r = ml::min_norm_point_exact(u, ml::NormSpec(2));
  EXPECT_EQ(r.value_squared, R(1, 16));
  EXPECT_TRUE(ml::is_exact_l2_optimum(u, r.mu));

  // Random rational instances against the float solver.
  ml::SplitMix64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ml::Vector> fu;
    for (int i = 0; i < 5; ++i) {
      ml::Vector v(3);
      for (double& x : v) x = std::round(rng.uniform(-8, 8)) / 8.0;
      if (ml::norm(v, ml::NormSpec(2)) == 0.0) v[0] = 1.0;
      fu.push_back(v);
    }
    auto ex = ml::min_norm_point_exact(ml::to_rational(std::span<const ml::Vector>(fu)), ml::NormSpec(2));
    EXPECT_TRUE(ml::is_exact_l2_optimum(ml::to_rational(std::span<const ml::Vector>(fu)), ex.mu));
    auto fl = ml::min_norm_point(fu, ml::NormSpec(2), {});
    EXPECT_NEAR(fl.value, std::sqrt(ml::to_double(ex.value_squared)), 1e-6);
  }
}

TEST(MinNormExact, HintIsVerifiedNotTrusted) {
  std::vector<std::vector<R>> u{{1, 0}, {0, 1}, {R(3, 5), R(4, 5)}};
  // A wrong hint falls back to Wolfe and still finds the true optimum.
  auto r = ml::min_norm_point_exact(u, ml::NormSpec(2), {0});
  EXPECT_TRUE(ml::is_exact_l2_optimum(u, r.mu));
  EXPECT_EQ(r.value_squared, R(1, 2));
  EXPECT_THROW(ml::min_norm_point_exact(u, ml::NormSpec(3)), ml::InputError);
}
