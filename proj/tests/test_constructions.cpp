#include "marginlab/analysis.hpp"
#include "marginlab/constructions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace ml = marginlab;
using R = ml::Rational;

namespace {

const ml::SolverConfig kCfg{};

ml::ShatterOptions with_fallback() {
  ml::ShatterOptions o;
  o.realize.exact_fallback = true;
  return o;
}

// The exact margin when the bundle knows gamma^2, else gamma - 1e-6.
ml::Margin golden_margin(const ml::ConstructionBundle& b) {
  if (b.predicted_gamma_squared && b.vectors().exact) return ml::Margin::sqrt_of(*b.predicted_gamma_squared);
  return ml::Margin(*b.predicted_gamma - 1e-6);
}

}  // namespace

// ---------------------------------------------------------------------------
// Hadamard matrices

TEST(Sylvester, SmallOrders) {
  EXPECT_EQ(ml::sylvester_hadamard(0).entries, (std::vector<std::vector<int>>{{1}}));
  EXPECT_EQ(ml::sylvester_hadamard(1).entries, (std::vector<std::vector<int>>{{1, 1}, {1, -1}}));
  const auto h = ml::sylvester_hadamard(3);
  EXPECT_EQ(h.order, 8u);
  const auto g = ml::gram_matrix(h);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(g[i][j], i == j ? 8 : 0);
}

TEST(Sylvester, OrthogonalUpToOrder256) {
  for (unsigned m = 0; m <= 8; ++m) {
    const auto h = ml::sylvester_hadamard(m);
    const auto g = ml::gram_matrix(h);
    bool ok = true;
    for (std::size_t i = 0; i < h.order; ++i)
      for (std::size_t j = 0; j < h.order; ++j) {
        ok = ok && g[i][j] == (i == j ? static_cast<std::int64_t>(h.order) : 0);
        ok = ok && (h.entries[i][j] == 1 || h.entries[i][j] == -1);
      }
    EXPECT_TRUE(ok) << "m = " << m;
  }
  EXPECT_THROW(ml::sylvester_hadamard(14), ml::InputError);
}

TEST(HadamardSet, EllFourEntriesAndNorms) {
  const auto b = ml::hadamard_shattered_set(2, 4.0);
  const auto& v = b.vectors();
  ASSERT_EQ(v.points.size(), 4u);
  for (const auto& x : v.points) {
    for (double t : x) EXPECT_NEAR(std::abs(t), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(ml::norm(x, v.norm), 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(*b.predicted_gamma, 0.5);
  EXPECT_EQ(b.predicted_status, ml::PredictedStatus::Shattered);
  EXPECT_TRUE(b.notices.empty());
}

TEST(HadamardSet, EllTwoRowsAreOrthonormal) {
  const auto b = ml::hadamard_shattered_set(2, 2.0);
  ASSERT_TRUE(b.vectors().exact);
  const auto& x = *b.vectors().exact;
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& t : x[i]) EXPECT_EQ(abs(t), R(1, 2));
    for (std::size_t j = 0; j < 4; ++j) {
      R dot = 0;
      for (std::size_t k = 0; k < 4; ++k) dot += x[i][k] * x[j][k];
      EXPECT_EQ(dot, R(i == j ? 1 : 0));
    }
  }
  EXPECT_DOUBLE_EQ(*b.predicted_gamma, 0.5);
  EXPECT_FALSE(b.notices.empty());  // p = 2 is not the tight rate
}

TEST(HadamardSet, PairShatteredForPAtLeastTwo) {
  for (double p : {2.0, 3.0, 5.0, std::numeric_limits<double>::infinity()}) {
    const auto b = ml::hadamard_shattered_set(1, p);
    auto v = ml::is_shattered(b.vectors().oracle(), {0, 1}, 1.0 / std::sqrt(2.0) - 1e-6, kCfg);
    EXPECT_EQ(v.status, ml::ShatterStatus::Shattered) << "p = " << p;
  }
  // Below p = 2 uniform weights give 2^(-1/p) < 1/sqrt(2).
  const auto b = ml::hadamard_shattered_set(1, 1.5);
  auto v = ml::is_shattered(b.vectors().oracle(), {0, 1}, 1.0 / std::sqrt(2.0) - 1e-6, kCfg);
  ASSERT_EQ(v.status, ml::ShatterStatus::NotShattered);
  EXPECT_NEAR(v.counterexample->value, std::pow(2.0, -1.0 / 1.5), 1e-6);
  EXPECT_THROW(ml::hadamard_shattered_set(0, 3.0), ml::InputError);
}

// ---------------------------------------------------------------------------
// Standard basis

TEST(BasisSet, PredictedMargins) {
  EXPECT_NEAR(*ml::standard_basis_set(8, 1.5).predicted_gamma, 0.5, 1e-12);
  const auto b16 = ml::standard_basis_set(16, 2.0);
  EXPECT_NEAR(*b16.predicted_gamma, 0.25, 1e-15);
  EXPECT_EQ(*b16.predicted_gamma_squared, R(1, 16));
  EXPECT_DOUBLE_EQ(*ml::standard_basis_set(5, 1.0).predicted_gamma, 1.0);
  const auto b5 = ml::standard_basis_set(5, 1.0);
  EXPECT_EQ(ml::is_shattered(b5.vectors().oracle(), ml::iota_points(5), 0.99, kCfg).status,
            ml::ShatterStatus::Shattered);
}

// ---------------------------------------------------------------------------
// Golden contract on vector-set bundles

TEST(Golden, VectorBundlesReproducePredictions) {
  std::vector<ml::ConstructionBundle> bundles;
  for (unsigned m = 1; m <= 3; ++m)
    for (double p : {2.0, 3.0, 4.0}) bundles.push_back(ml::hadamard_shattered_set(m, p));
  for (std::size_t n : {4u, 8u})
    for (double p : {1.0, 1.5, 2.0, std::numeric_limits<double>::infinity()})
      bundles.push_back(ml::standard_basis_set(n, p));
  for (const auto& b : bundles) {
    const auto& vs = b.vectors();
    const auto pts = ml::iota_points(vs.points.size());
    const auto c = vs.oracle();
    auto at = ml::is_shattered(c, pts, golden_margin(b), kCfg, with_fallback());
    EXPECT_EQ(at.status, ml::ShatterStatus::Shattered) << b.name << " " << b.params.at("p");
    auto above = ml::is_shattered(c, pts, *b.predicted_gamma + 1e-4, kCfg, with_fallback());
    if (b.name == "basis") {
      ASSERT_EQ(above.status, ml::ShatterStatus::NotShattered) << b.params.at("n") << " " << b.params.at("p");
      EXPECT_NEAR(above.counterexample->value, *b.predicted_gamma, 1e-6);
    } else {
      EXPECT_NE(above.status, ml::ShatterStatus::Marginal);
    }
  }
}

// ---------------------------------------------------------------------------
// Intro space

TEST(IntroSpace, ValidAtThreeToOneAndLabelings) {
  for (bool include_empty : {false, true}) {
    const auto b = ml::intro_counterexample_space(3, R(1, 4), R(3, 4), include_empty);
    EXPECT_EQ(b.predicted_status, ml::PredictedStatus::MetricValid);
    EXPECT_FALSE(b.metric().validate());
    EXPECT_EQ(b.metric().size(), include_empty ? 11u : 10u);
    const ml::BallPairClass c(b.metric().space(), {0.25, 0.75});
    int realized = 0;
    for (std::uint64_t k = 0; k < 8; ++k)
      if (ml::realize(c, ml::make_sample(b.focus, ml::sign_pattern(3, k)), 0.5, kCfg).status ==
          ml::Verdict::Realized)
        ++realized;
    // All-negative needs the center b0, which only include_empty provides.
    EXPECT_EQ(realized, include_empty ? 8 : 7);
  }
}

TEST(IntroSpace, CentersRealizeTheirSubsets) {
  const auto b = ml::intro_counterexample_space(3, R(1, 4), R(3, 4), true);
  const auto space = b.metric().space();
  for (std::uint64_t s = 0; s < 8; ++s) {
    const std::size_t center = b.metric().index_of("b" + std::to_string(s));
    for (std::size_t i = 0; i < 3; ++i) {
      const double d = space(center, i);
      if (s >> i & 1U) EXPECT_LE(d, 0.25);
      else EXPECT_GE(d, 0.75);
    }
  }
}

TEST(IntroSpace, InvalidPastThreeToOne) {
  const auto b = ml::intro_counterexample_space(2, 0.2, 0.7);
  EXPECT_EQ(b.predicted_status, ml::PredictedStatus::MetricInvalid);
  auto v = b.metric().validate();
  ASSERT_TRUE(v);
  ASSERT_EQ(v->kind, ml::MetricAxiom::Triangle);
  const auto& d = b.metric().dist;
  EXPECT_GT(d[v->i][v->k], d[v->i][v->j] + d[v->j][v->k]);
  // Exactly at R = 3r it is still a metric.
  EXPECT_FALSE(ml::intro_counterexample_space(2, R(1, 5), R(3, 5)).metric().validate());
}

TEST(IntroSpace, SinglePoint) {
  const auto b = ml::intro_counterexample_space(1, R(1, 4), R(1, 2));
  EXPECT_EQ(b.metric().ids, (std::vector<std::string>{"a1", "b1"}));
  EXPECT_FALSE(b.metric().validate());
  EXPECT_THROW(ml::intro_counterexample_space(13, 0.25, 0.5), ml::InputError);
}

// ---------------------------------------------------------------------------
// Gamma space

TEST(GammaSpace, ValidAndWitnessValues) {
  const R gamma(3, 10);
  const auto b = ml::gamma_counterexample_space(2, gamma);
  EXPECT_EQ(b.predicted_status, ml::PredictedStatus::MetricValid);
  EXPECT_FALSE(b.metric().validate());
  const auto& m = b.metric();
  R diam = 0;
  for (const auto& row : m.dist)
    for (const auto& x : row) diam = std::max(diam, x);
  EXPECT_LE(diam, R(1));
  // delta_{a1} = d(b1_1, .)/2 - d(b2_1, .)/2 on (a1, a2).
  const std::size_t b1 = m.index_of("b11"), b2 = m.index_of("b21");
  auto delta = [&](std::size_t x) { return m.dist[b1][x] / 2 - m.dist[b2][x] / 2; };
  EXPECT_EQ(delta(m.index_of("a1")), -gamma);
  EXPECT_EQ(delta(m.index_of("a2")), gamma);
}

TEST(GammaSpace, NamedWitnessesVerify) {
  const auto b = ml::gamma_counterexample_space(3, R(1, 4));
  const ml::DistanceCombinationClass c(b.metric().exact_space(), ml::iota_points(b.metric().size()),
                                       ml::DistanceVariant::Pos);
  ASSERT_EQ(b.witnesses.size(), 8u);
  for (const auto& w : b.witnesses)
    EXPECT_TRUE(ml::verify_witness(c, ml::make_sample(w.points, w.labels), w.witness, 0.25)) << w.name;
}

TEST(GammaSpace, InvalidAboveOneThirdAndBoundary) {
  const auto bad = ml::gamma_counterexample_space(2, 0.34);
  EXPECT_EQ(bad.predicted_status, ml::PredictedStatus::MetricInvalid);
  EXPECT_TRUE(bad.metric().validate());
  const auto edge = ml::gamma_counterexample_space(1, R(1, 3));
  EXPECT_EQ(edge.predicted_status, ml::PredictedStatus::MetricValid);
  EXPECT_FALSE(edge.metric().validate());
}

TEST(GammaSpace, CubeCornersForAllPatterns) {
  for (unsigned k = 1; k <= 6; ++k) {
    const auto b = ml::gamma_counterexample_space(k, R(1, 4));
    const auto c = ml::DistanceCombinationClass::all_centers(b.metric().space(), ml::DistanceVariant::Pos);
    int yes = 0;
    for (std::uint64_t p = 0; p < (std::uint64_t{1} << k); ++p) {
      std::vector<double> y;
      for (int s : ml::sign_pattern(k, p)) y.push_back(0.25 * s);
      if (ml::check_cube_condition(c, b.focus, 0.25, y, kCfg).yes) ++yes;
    }
    EXPECT_EQ(yes, 1 << k) << "k = " << k;
  }
}

TEST(GammaSpace, FocusShatteredByPos) {
  const auto b = ml::gamma_counterexample_space(3, R(1, 4));
  const ml::DistanceCombinationClass c(b.metric().exact_space(), ml::iota_points(b.metric().size()),
                                       ml::DistanceVariant::Pos);
  EXPECT_EQ(ml::is_shattered(c, b.focus, ml::Margin::exact(R(1, 4)), kCfg, with_fallback()).status,
            ml::ShatterStatus::Shattered);
}

// ---------------------------------------------------------------------------
// Phi truncation

TEST(PhiTruncation, PredictedDims) {
  const auto spec = ml::PhiSpec::exponential(100);
  const auto b = ml::phi_class_truncation(spec);
  EXPECT_EQ(b.phi().N, 100u);
  EXPECT_EQ(ml::predicted_dims(spec, {0.5, 0.25}), (std::vector<std::uint64_t>{7, 54}));
  EXPECT_EQ(ml::predicted_dims(ml::PhiSpec::inverse_power(1, 100), {0.5}), (std::vector<std::uint64_t>{2}));
  // Truncation caps at N.
  EXPECT_EQ(ml::predicted_dims(spec, {0.2}), (std::vector<std::uint64_t>{100}));
}

TEST(PhiTruncation, GoldenAgainstCertifiedDims) {
  for (const auto& spec : {ml::PhiSpec::exponential(200), ml::PhiSpec::inverse_power(2, 200)}) {
    const ml::PhiClass c(spec);
    const std::vector<double> grid = {0.9, 0.5, 1.0 / 3.0, 0.25, 0.2, 0.1};
    const auto pred = ml::predicted_dims(spec, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      EXPECT_EQ(ml::phi_dimension(c, grid[i], kCfg).dim, pred[i]) << spec.name() << " " << grid[i];
  }
}
