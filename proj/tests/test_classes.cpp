#include "marginlab/classes.hpp"
#include "marginlab/constructions.hpp"
#include "marginlab/lp.hpp"
#include "marginlab/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace ml = marginlab;
using R = ml::Rational;

namespace {

ml::SimplexWeights random_weights(ml::SplitMix64& rng, std::size_t n) {
  ml::Vector mu(n);
  for (double& x : mu) x = rng.uniform() + 1e-3;
  return ml::SimplexWeights::normalized(mu);
}

std::vector<int> random_labels(ml::SplitMix64& rng, std::size_t n) {
  std::vector<int> y(n);
  for (int& s : y) s = rng.below(2) ? 1 : -1;
  return y;
}

ml::MetricSpace constant_space(std::size_t n, double d) {
  ml::DistanceMatrix<double> m(n, std::vector<double>(n, d));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 0.0;
  return ml::MetricSpace(m);
}

// Naive ||sum mu_i y_i x_i||_p.
double naive_norm(const std::vector<ml::Vector>& x, const ml::SimplexWeights& mu, const std::vector<int>& y, double p) {
  ml::Vector s(x.front().size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += mu[i] * y[i] * x[i][j];
  double t = 0.0;
  for (double v : s) t += std::pow(std::abs(v), p);
  return std::pow(t, 1.0 / p);
}

// LP oracle for Lipschitz realizability: variables f = u - v, constraints
// |f_i - f_j| <= d_ij over all pairs of the space, y_i f_i >= gamma.
bool lip_lp_feasible(const ml::MetricSpace& s, const ml::LabeledSample& sample, double gamma) {
  const std::size_t n = s.size();
  ml::LinearProgram<double> lp;
  lp.objective.assign(n, 0.0);
  lp.bounds.assign(n, ml::Bound<double>::free());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> row(n, 0.0);
      row[i] = 1.0;
      row[j] = -1.0;
      lp.a_ub.push_back(row);
      lp.b_ub.push_back(s(i, j));
    }
  for (std::size_t k = 0; k < sample.size(); ++k) {
    std::vector<double> row(n, 0.0);
    row[sample.points[k]] = -sample.labels[k];
    lp.a_ub.push_back(row);
    lp.b_ub.push_back(-gamma);
  }
  return ml::lp_solve(lp).status == ml::LpStatus::Optimal;
}

}  // namespace

TEST(SupportDualBall, Examples) {
  const std::vector<ml::Vector> e = {{1.0, 0.0}, {0.0, 1.0}};
  const auto v = ml::support_dual_ball(e, ml::NormSpec(2.0), ml::SimplexWeights({0.5, 0.5}), std::vector<int>{1, 1});
  EXPECT_NEAR(v.value, 1.0 / std::sqrt(2.0), 1e-12);

  const auto h = ml::hadamard_shattered_set(2, 2.0);
  const auto& pts = h.vectors().points;
  for (std::uint64_t k = 0; k < 16; ++k) {
    const auto y = ml::sign_pattern(4, k);
    EXPECT_GE(ml::support_dual_ball(pts, ml::NormSpec(2.0), ml::SimplexWeights::uniform(4), y).value, 0.5 - 1e-12);
  }
}

TEST(SupportDualBall, AgreesWithNaiveSummation) {
  ml::SplitMix64 rng(11);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    for (int t = 0; t < 20; ++t) {
      const std::size_t n = 1 + rng.below(6), d = 1 + rng.below(5);
      std::vector<ml::Vector> x;
      for (std::size_t i = 0; i < n; ++i) {
        auto u = ml::random_unit_vector(rng, d, ml::NormSpec(p));
        for (double& c : u) c *= rng.uniform();
        x.push_back(u);
      }
      const auto mu = random_weights(rng, n);
      const auto y = random_labels(rng, n);
      const auto v = ml::support_dual_ball(x, ml::NormSpec(p), mu, y);
      EXPECT_NEAR(v.value, naive_norm(x, mu, y, p), 1e-9);
      // Maximizer soundness: the functional reproduces the value.
      if (v.maximizer) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) s += mu[i] * y[i] * (*v.maximizer)[j] * x[i][j];
        EXPECT_NEAR(s, v.value, 1e-9);
      }
    }
  }
}

TEST(SupportDualBall, RejectsPointOutsideUnitBall) {
  EXPECT_THROW(ml::DualBallClass(std::vector<ml::Vector>{{0.5, 0.0}, {1.0, 0.5}}, ml::NormSpec(2.0)), ml::InputError);
  try {
    ml::DualBallClass(std::vector<ml::Vector>{{0.5, 0.0}, {1.0, 0.5}}, ml::NormSpec(2.0));
  } catch (const ml::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(SupportDistanceCombination, ConstantSpaceFactorsOut) {
  const auto s = constant_space(5, 2.0 / 3.0);
  ml::SplitMix64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto mu = random_weights(rng, 4);
    const auto y = random_labels(rng, 4);
    const auto sample = ml::make_sample({0, 1, 2, 3}, y);
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) sum += mu[i] * y[i];
    // Centers off the sample, where every distance is 2/3. A center inside
    // the sample sees a zero distance and can do better.
    const auto v = ml::support_distance_combination(s, {4}, sample, mu, ml::DistanceVariant::Full);
    EXPECT_NEAR(v.value, 2.0 / 3.0 * std::abs(sum), 1e-12);
  }
}

TEST(SupportDistanceCombination, GammaSpaceWitnessAttainsMinusGamma) {
  const auto b = ml::gamma_counterexample_space(2, R(3, 10));
  const auto space = b.metric().exact_space();
  const auto& w = b.witnesses.at(3);  // A' = {a1, a2}
  EXPECT_EQ(w.labels, (std::vector<int>{-1, -1}));
  const auto form = ml::polyhedral_form<R>(space, ml::iota_points(space.size()), ml::DistanceVariant::Pos, {0, 1});
  const auto vals = form.evaluate(w.witness.exact);
  EXPECT_EQ(vals[0], R(-3, 10));
  EXPECT_EQ(vals[1], R(-3, 10));
  // The coefficients lie in D^>: sum |a| <= 1 and sum a+ >= 1/2.
  R total = 0, pos = 0;
  for (std::size_t k = 0; k < space.size(); ++k) {
    total += w.witness.exact[k] + w.witness.exact[space.size() + k];
    pos += w.witness.exact[k];
  }
  EXPECT_LE(total, R(1));
  EXPECT_GE(pos, R(1, 2));
}

TEST(SupportDistanceCombination, PosVariantAgainstSparseGrid) {
  // Vertices of {sum |a| <= 1, sum a+ >= 1/2} in (a+, a-) space have at most
  // two nonzero entries, so a 1e-2 grid over 2-sparse vectors is an oracle.
  ml::SplitMix64 rng(5);
  for (int t = 0; t < 3; ++t) {
    const auto s = ml::random_metric_space(rng, 5);
    const auto mu = random_weights(rng, 5);
    const auto y = random_labels(rng, 5);
    const auto sample = ml::make_sample(ml::iota_points(5), y);
    std::vector<double> g(5, 0.0);
    for (std::size_t c = 0; c < 5; ++c)
      for (std::size_t i = 0; i < 5; ++i) g[c] += mu[i] * y[i] * s(c, i);
    double grid = -1e300, gmax = 0.0;
    for (double x : g) gmax = std::max(gmax, std::abs(x));
    for (std::size_t k = 0; k < 5; ++k)
      for (std::size_t l = 0; l < 5; ++l)
        for (int u = -100; u <= 100; ++u)
          for (int v = -100; v <= 100; ++v) {
            if (k == l && v != 0) continue;
            const double ak = u / 100.0, al = v / 100.0;
            if (std::abs(ak) + std::abs(al) > 1.0 + 1e-12) continue;
            const double pos = std::max(ak, 0.0) + std::max(al, 0.0);
            if (pos < 0.5 - 1e-12) continue;
            grid = std::max(grid, ak * g[k] + al * g[l]);
          }
    const auto lp = ml::support_distance_combination(s, ml::iota_points(5), sample, mu, ml::DistanceVariant::Pos);
    EXPECT_GE(lp.value, grid - 1e-9);
    EXPECT_LE(lp.value, grid + 0.02 * gmax + 1e-9);
  }
}

TEST(SupportDistanceCombination, FullIsMaxOfClosedVariants) {
  ml::SplitMix64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(6);
    const auto s = ml::random_metric_space(rng, n);
    const auto mu = random_weights(rng, n);
    const auto sample = ml::make_sample(ml::iota_points(n), random_labels(rng, n));
    const auto c = ml::iota_points(n);
    const double full = ml::support_distance_combination(s, c, sample, mu, ml::DistanceVariant::Full).value;
    const double pos = ml::support_distance_combination(s, c, sample, mu, ml::DistanceVariant::Pos).value;
    const double neg = ml::support_distance_combination(s, c, sample, mu, ml::DistanceVariant::Neg).value;
    EXPECT_GE(full, std::max(pos, neg) - 1e-9);
    EXPECT_NEAR(full, std::max(pos, neg), 1e-9);
  }
}

TEST(SupportDistanceCombination, MaximizerReproducesValue) {
  ml::SplitMix64 rng(8);
  for (auto variant : {ml::DistanceVariant::Full, ml::DistanceVariant::Pos, ml::DistanceVariant::Neg}) {
    for (int t = 0; t < 10; ++t) {
      const std::size_t n = 2 + rng.below(5);
      const auto s = ml::random_metric_space(rng, n);
      const auto mu = random_weights(rng, n);
      const auto sample = ml::make_sample(ml::iota_points(n), random_labels(rng, n));
      const auto v = ml::support_distance_combination(s, ml::iota_points(n), sample, mu, variant);
      double re = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        re += mu[i] * sample.labels[i] * ml::evaluate_distance_combination(s, ml::iota_points(n), *v.maximizer, i);
      EXPECT_NEAR(re, v.value, 1e-9);
    }
  }
}

TEST(SupportDistanceCombination, EmptyCentersRejected) {
  const auto s = constant_space(3, 1.0);
  EXPECT_THROW(ml::support_distance_combination(s, {}, ml::make_sample({0}, {1}), ml::SimplexWeights::uniform(1),
                                                ml::DistanceVariant::Full),
               ml::InputError);
}

TEST(Support, ConvexInWeights) {
  ml::SplitMix64 rng(9);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.below(5);
    const auto y = random_labels(rng, n);
    const auto m1 = random_weights(rng, n), m2 = random_weights(rng, n);
    const double a = rng.uniform();
    ml::Vector mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * m1[i] + (1 - a) * m2[i];
    const auto mm = ml::SimplexWeights::normalized(mix);
    const auto sample = ml::make_sample(ml::iota_points(n), y);

    std::vector<ml::Vector> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(ml::random_unit_vector(rng, 3, ml::NormSpec(1.5)));
    auto db = [&](const ml::SimplexWeights& m) { return ml::support_dual_ball(x, ml::NormSpec(1.5), m, y).value; };
    EXPECT_LE(db(mm), a * db(m1) + (1 - a) * db(m2) + 1e-9);

    const auto s = ml::random_metric_space(rng, n);
    for (auto var : {ml::DistanceVariant::Full, ml::DistanceVariant::Pos}) {
      auto dc = [&](const ml::SimplexWeights& m) {
        return ml::support_distance_combination(s, ml::iota_points(n), sample, m, var).value;
      };
      EXPECT_LE(dc(mm), a * dc(m1) + (1 - a) * dc(m2) + 1e-9);
    }
    const ml::PhiSpec phi = ml::PhiSpec::inverse_power(1, 50);
    auto ph = [&](const ml::SimplexWeights& m) { return ml::support_phi(phi, sample, m); };
    EXPECT_LE(ph(mm), a * ph(m1) + (1 - a) * ph(m2) + 1e-9);
  }
}

TEST(LipRealizable, Examples) {
  const auto s = constant_space(2, 1.0);
  EXPECT_TRUE(ml::lip_realizable(s, ml::make_sample({0, 1}, {1, -1}), 0.5).realizable);
  const auto no = ml::lip_realizable(s, ml::make_sample({0, 1}, {1, -1}), 0.51);
  EXPECT_FALSE(no.realizable);
  EXPECT_DOUBLE_EQ(no.distance, 1.0);
  EXPECT_EQ(no.pos, 0u);
  EXPECT_EQ(no.neg, 1u);
  const auto s3 = constant_space(3, 0.1);
  EXPECT_TRUE(ml::lip_realizable(s3, ml::make_sample({0, 1, 2}, {1, 1, 1}), 100.0).realizable);
}

TEST(LipRealizable, AgreesWithLpOracleAndIsMonotone) {
  ml::SplitMix64 rng(13);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + rng.below(6);
    const auto s = ml::random_metric_space(rng, n);
    const auto sample = ml::make_sample(ml::iota_points(n), random_labels(rng, n));
    const double gamma = rng.uniform(0.01, 0.6);
    const bool yes = ml::lip_realizable(s, sample, gamma).realizable;
    EXPECT_EQ(yes, lip_lp_feasible(s, sample, gamma)) << "instance " << t;
    if (yes) {
      EXPECT_TRUE(ml::lip_realizable(s, sample, gamma * rng.uniform()).realizable);
    }
  }
}

TEST(LipExtension, ExamplesAndLipschitzConstant) {
  const auto s = constant_space(2, 1.0);
  EXPECT_DOUBLE_EQ(ml::lip_extension_eval(s, ml::make_sample({0, 1}, {1, -1}), 0), 0.5);
  ml::DistanceMatrix<double> m = {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
  EXPECT_DOUBLE_EQ(ml::lip_extension_eval(ml::MetricSpace(m), ml::make_sample({0, 2}, {1, -1}), 1), 0.0);
  EXPECT_THROW(ml::lip_extension_eval(s, ml::LabeledSample{}, 0), ml::DegenerateInputError);

  ml::SplitMix64 rng(17);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 2 + rng.below(8);
    const auto sp = ml::random_metric_space(rng, n);
    const std::size_t k = 1 + rng.below(n);
    std::vector<std::size_t> pts = ml::iota_points(n);
    pts.resize(k);
    const auto sample = ml::make_sample(pts, random_labels(rng, k));
    std::vector<double> f(n);
    for (std::size_t x = 0; x < n; ++x) f[x] = ml::lip_extension_eval(sp, sample, x);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) EXPECT_LE(std::abs(f[a] - f[b]), sp(a, b) + 1e-12);
    for (std::size_t i = 0; i < k; ++i) EXPECT_GE(sample.labels[i] * f[pts[i]], 0.0);
  }
}

TEST(BallPair, Examples) {
  // Intro space r = 1/4, R = 3/4: a1, a2 at distance (r + R)/2 = 1/2 = 2r,
  // but b_{12} is within r of both, so pick a pair farther than 2r.
  ml::DistanceMatrix<double> m = {{0, 0.6, 0.3}, {0.6, 0, 0.3}, {0.3, 0.3, 0}};
  const ml::MetricSpace s(m);
  EXPECT_FALSE(ml::ball_pair_realizable(s, ml::make_sample({0, 1}, {1, 1}), {0.25, 0.75}).has_value());
  EXPECT_EQ(ml::ball_pair_realizable(s, ml::make_sample({0}, {1}), {0.25, 0.75}), std::optional<std::size_t>(0));

  const auto b = ml::intro_counterexample_space(3, R(1, 5), R(11, 20));
  const auto space = b.metric().space();
  for (std::uint64_t mask = 1; mask < 8; ++mask) {
    std::vector<int> y;
    for (unsigned i = 0; i < 3; ++i) y.push_back((mask >> i & 1U) ? 1 : -1);
    const auto c = ml::ball_pair_realizable(space, ml::make_sample({0, 1, 2}, y), {0.2, 0.55});
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(space.ids()[*c], "b" + std::to_string(mask));
  }
}

TEST(BallPair, RejectsBadParams) {
  const auto s = constant_space(2, 1.0);
  EXPECT_THROW(ml::ball_pair_realizable(s, ml::make_sample({0}, {1}), {0.5, 0.5}), ml::InputError);
  EXPECT_THROW(ml::ball_pair_realizable(s, ml::make_sample({0}, {1}), {-0.1, 0.5}), ml::InputError);
}

TEST(Phi, Examples) {
  const auto e = ml::PhiSpec::exponential(1000);
  EXPECT_EQ(e(0.5), 7u);
  std::vector<std::size_t> first7 = ml::iota_points(7);
  ml::SplitMix64 rng(1);
  EXPECT_TRUE(ml::phi_realizable(e, ml::make_sample(first7, random_labels(rng, 7)), 0.5).realizable);
  const auto no = ml::phi_realizable(e, ml::make_sample({7}, {1}), 0.5);
  EXPECT_FALSE(no.realizable);
  EXPECT_EQ(no.violating, 8u);

  const auto inv = ml::PhiSpec::inverse_power(1, 10);
  EXPECT_TRUE(ml::phi_realizable(inv, ml::make_sample({0}, {-1}), 0.9).realizable);
  EXPECT_FALSE(ml::phi_realizable(inv, ml::make_sample({1}, {1}), 0.9).realizable);
}

TEST(Phi, MonotoneOnGrid) {
  for (const auto& spec : {ml::PhiSpec::exponential(1000000), ml::PhiSpec::inverse_power(1, 1000000),
                           ml::PhiSpec::inverse_power(3, 1000000)}) {
    std::uint64_t prev = 0;
    for (int k = 99; k >= 5; --k) {
      const std::uint64_t v = spec(k / 100.0);
      EXPECT_GE(v, prev) << spec.name() << " at " << k;
      prev = v;
    }
  }
}

TEST(Phi, FloorsAtExactIntegers) {
  // floor(1/gamma^k) at gamma = 1/m must not lose one to rounding.
  const auto inv = ml::PhiSpec::inverse_power(2, 1000000);
  for (int m = 2; m <= 30; ++m) EXPECT_EQ(inv(1.0 / m), static_cast<std::uint64_t>(m * m));
}

TEST(ClassDescriptors, KindsAndSymmetry) {
  const auto s = constant_space(3, 1.0);
  const ml::ConceptClassOracle full = ml::DistanceCombinationClass::all_centers(s, ml::DistanceVariant::Full);
  const ml::ConceptClassOracle pos = ml::DistanceCombinationClass::all_centers(s, ml::DistanceVariant::Pos);
  const ml::ConceptClassOracle bp = ml::BallPairClass(s, {0.1, 0.5});
  EXPECT_EQ(ml::kind_name(full), "DistanceCombination");
  EXPECT_EQ(ml::kind_name(pos), "DistanceCombinationPos");
  EXPECT_TRUE(ml::is_symmetric(full));
  EXPECT_FALSE(ml::is_symmetric(pos));
  EXPECT_FALSE(ml::is_symmetric(bp));
  EXPECT_EQ(ml::ground_size(bp), 3u);
}

TEST(LabeledSample, Validation) {
  EXPECT_THROW(ml::make_sample({0, 1}, {1}).validate(3), ml::InputError);
  EXPECT_THROW(ml::make_sample({0}, {0}).validate(3), ml::InputError);
  EXPECT_THROW(ml::make_sample({5}, {1}).validate(3), ml::InputError);
  EXPECT_THROW(ml::LabeledSample{}.validate(3), ml::InputError);
  EXPECT_NO_THROW(ml::LabeledSample{}.validate(3, true));
  EXPECT_EQ(ml::sign_pattern(3, 0b101), (std::vector<int>{-1, 1, -1}));
}
