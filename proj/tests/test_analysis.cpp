#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace fcm;

namespace {

CognitiveMap triangle() {
  return build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}, {"c", "", FactorKind::general, {}}},
                   {{"a", "b", 0.5}, {"b", "c", -0.6}, {"a", "c", 0.8}});
}

}  // namespace

TEST(TransitiveClosure, WorkedTriangle) {
  const auto cl = transitive_closure(triangle());
  EXPECT_EQ(cl.positive(0, 2), 0.8);
  EXPECT_EQ(cl.negative(0, 2), 0.5 * 0.6);
  EXPECT_EQ(cl.positive(0, 1), 0.5);
  EXPECT_EQ(cl.negative(1, 2), 0.6);
  EXPECT_EQ(cl.positive(2, 0), 0.0);
}

TEST(TransitiveClosure, SingleNegativeEdge) {
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}}, {{"a", "b", -0.4}});
  const auto cl = transitive_closure(m);
  EXPECT_EQ(cl.positive(0, 1), 0.0);
  EXPECT_EQ(cl.negative(0, 1), 0.4);
}

TEST(TransitiveClosure, EdgelessIsZero) {
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}}, {});
  const auto cl = transitive_closure(m);
  EXPECT_TRUE(cl.positive.is_zero());
  EXPECT_TRUE(cl.negative.is_zero());
}

TEST(TransitiveClosure, SignFlippingCycleIsNotASimplePath) {
  // a -> b -> b would give a negative walk a ~> b; it is not a simple path.
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}},
                           {{"a", "b", 0.9}, {"b", "b", -1.0}});
  const auto cl = transitive_closure(m);
  EXPECT_EQ(cl.positive(0, 1), 0.9);
  EXPECT_EQ(cl.negative(0, 1), 0.0);
  EXPECT_EQ(cl.negative(1, 1), 1.0);  // the loop itself is a cycle through b
}

TEST(TransitiveClosure, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto m = fcm::testing::random_map(rng, {1, 6, 0.45, 1});
    const auto cl = transitive_closure(m);
    const auto ref = oracle::enumerate_simple_paths(m);
    EXPECT_EQ(cl.positive, ref.positive);
    EXPECT_EQ(cl.negative, ref.negative);
  }
}

TEST(TransitiveClosure, MagnitudeClosureBoundsSignedClosure) {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 50; ++rep) {
    const auto m = fcm::testing::random_map(rng, {1, 7, 0.4, 1});
    const auto cl = transitive_closure(m);
    const auto mag = magnitude_closure(m);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) {
        EXPECT_EQ(mag(i, j), std::max(cl.positive(i, j), cl.negative(i, j)));
      }
  }
}

TEST(TransitiveClosure, RaisingPositiveEdgeNeverLowersPositiveClosure) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto m = fcm::testing::random_map(rng, {2, 6, 0.45, 1});
    auto edges = m.edges();
    std::vector<std::size_t> positive;
    for (std::size_t k = 0; k < edges.size(); ++k)
      if (edges[k].weight > 0) positive.push_back(k);
    if (positive.empty()) continue;
    auto& e = edges[positive[rng() % positive.size()]];
    e.weight = e.weight + (1.0 - e.weight) * u(rng);
    const auto before = transitive_closure(m);
    const auto after = transitive_closure(m.with_edges(edges));
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) EXPECT_GE(after.positive(i, j), before.positive(i, j));
  }
}

TEST(InfluenceReport, WorkedEntry) {
  const auto r = influence_report(transitive_closure(triangle()));
  EXPECT_NEAR(r.influence(0, 2), 0.8, 1e-12);
  EXPECT_NEAR(r.consonance(0, 2), 0.5 / 1.1, 1e-12);
  EXPECT_NEAR(r.dissonance(0, 2), 1.0 - 0.5 / 1.1, 1e-12);
}

TEST(InfluenceReport, FullyConsonantAndBalanced) {
  ClosurePair cl{Matrix(1, 1), Matrix(1, 1)};
  cl.positive(0, 0) = 0.7;
  auto r = influence_report(cl);
  EXPECT_EQ(r.consonance(0, 0), 1.0);
  EXPECT_EQ(r.influence(0, 0), 0.7);
  cl.negative(0, 0) = 0.7;
  r = influence_report(cl);
  EXPECT_EQ(r.influence(0, 0), 0.0);
  EXPECT_EQ(r.consonance(0, 0), 0.0);
  EXPECT_EQ(r.dissonance(0, 0), 1.0);
}

TEST(InfluenceReport, ZeroClosureIsConsonant) {
  const auto r = influence_report({Matrix(2, 2), Matrix(2, 2)});
  EXPECT_EQ(r.consonance(0, 1), 1.0);
  EXPECT_EQ(r.influence(0, 1), 0.0);
}

TEST(InfluenceReport, ShapeMismatch) {
  EXPECT_THROW(influence_report({Matrix(2, 2), Matrix(3, 3)}), Error);
}

TEST(InfluenceReport, AggregatesAreRowAndColumnMeans) {
  const auto r = influence_report(transitive_closure(triangle()));
  // P row a = [0, 0.5, 0.8]; column c = [0.8, -0.6, 0].
  EXPECT_NEAR(r.per_factor[0].influence_on_system, 1.3 / 3, 1e-15);
  EXPECT_NEAR(r.per_factor[2].susceptibility, 0.2 / 3, 1e-15);
}

TEST(InfluenceReport, MatchesEntrywiseOracle) {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const auto m = fcm::testing::random_map(rng, {1, 6, 0.45, 1});
    const auto cl = transitive_closure(m);
    const auto r = influence_report(cl);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) {
        const auto e = oracle::influence_entry(cl.positive(i, j), cl.negative(i, j));
        EXPECT_EQ(r.influence(i, j), e.p);
        EXPECT_NEAR(r.consonance(i, j), e.c, 1e-15);
        EXPECT_GE(r.consonance(i, j), 0.0);
        EXPECT_LE(r.consonance(i, j), 1.0);
        EXPECT_EQ(r.dissonance(i, j), 1.0 - r.consonance(i, j));
      }
  }
}

TEST(SpectralRadius, EdgelessIsZeroAndStable) {
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}}, {});
  const auto r = stability_report(m, 1e-6);
  EXPECT_EQ(r.spectral_radius, 0.0);
  EXPECT_EQ(r.classification, Stability::stable);
}

TEST(SpectralRadius, ChainIsNilpotent) {
  EXPECT_EQ(stability_report(fcm::testing::chain_fixture(), 1e-6).spectral_radius, 0.0);
}

TEST(SpectralRadius, TwoCycle) {
  const auto r = stability_report(fcm::testing::two_cycle(0.8, 0.9), 1e-6);
  EXPECT_NEAR(r.spectral_radius, std::sqrt(0.72), 1e-6);
  EXPECT_EQ(r.classification, Stability::stable);
}

TEST(SpectralRadius, UnitSelfLoopIsMarginal) {
  const auto r = stability_report(fcm::testing::self_loop(1.0), 1e-6);
  EXPECT_NEAR(r.spectral_radius, 1.0, 1e-6);
  EXPECT_EQ(r.classification, Stability::marginal);
}

TEST(SpectralRadius, JordanBlockConvergesToOne) {
  // Defective eigenvalue 1: ||M^k|| grows linearly, rho is still 1.
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}},
                           {{"a", "a", 1.0}, {"b", "b", 1.0}, {"a", "b", 1.0}});
  const auto r = stability_report(m, 1e-6);
  EXPECT_NEAR(r.spectral_radius, 1.0, 1e-6);
  EXPECT_EQ(r.classification, Stability::marginal);
}

TEST(SpectralRadius, MatchesTriangularDiagonal) {
  // Upper triangular: eigenvalues are the diagonal.
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> w(-1, 1);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<Factor> f;
    std::vector<WeightedEdge> e;
    double rho = 0;
    for (std::size_t i = 0; i < n; ++i) f.push_back({"f" + std::to_string(i), "", FactorKind::general, {}});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double x = w(rng);
        if (i == j) rho = std::max(rho, std::abs(x));
        e.push_back({f[i].id, f[j].id, x});
      }
    EXPECT_NEAR(stability_report(build_map(f, e), 1e-8).spectral_radius, rho, 1e-6);
  }
}

TEST(SpectralRadius, RejectsNonPositiveTolerance) {
  EXPECT_THROW(stability_report(fcm::testing::chain_fixture(), 0.0), Error);
}

TEST(DecayStepBound, StableMapsDecayWithinBound) {
  std::mt19937_64 rng(53);
  int checked = 0;
  for (int rep = 0; rep < 200 && checked < 40; ++rep) {
    const auto m = fcm::testing::random_map(rng);
    if (stability_report(m, 1e-6).classification != Stability::stable) continue;
    const auto bound = decay_step_bound(m, 1e-6);
    ASSERT_TRUE(bound.has_value());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto traj = simulate(m, StateVector{std::vector<double>(m.size(), 0.0)},
                                 {{0, fcm::testing::unit_impulse(m.size(), i)}}, {static_cast<int>(*bound), false});
      for (double v : traj.impulses.back().values) EXPECT_LT(std::abs(v), 1e-6);
    }
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(StronglyConnectedComponents, SplitsCyclesFromTails) {
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}, {"c", "", FactorKind::general, {}}},
                           {{"a", "b", 0.5}, {"b", "a", 0.5}, {"b", "c", 0.5}});
  auto comps = strongly_connected_components(m.weight_matrix());
  std::sort(comps.begin(), comps.end());
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(comps[1], (std::vector<std::size_t>{2}));
}

TEST(StabilizeSearch, UnitSelfLoopHalvesOnce) {
  const auto plan = stabilize_search(fcm::testing::self_loop(1.0), {}, 1e-6);
  ASSERT_EQ(plan.modifications.size(), 1u);
  EXPECT_EQ(plan.modifications[0].old_weight, 1.0);
  EXPECT_EQ(plan.modifications[0].new_weight, 0.5);
  EXPECT_NEAR(plan.resulting_radius, 0.5, 1e-6);
  EXPECT_TRUE(plan.success);
}

TEST(StabilizeSearch, StableMapIsNoOp) {
  const auto m = fcm::testing::two_cycle(0.8, 0.9);
  const auto plan = stabilize_search(m, {}, 1e-6);
  EXPECT_TRUE(plan.modifications.empty());
  EXPECT_NEAR(plan.resulting_radius, stability_report(m, 1e-6).spectral_radius, 1e-15);
  EXPECT_TRUE(plan.success);
}

TEST(StabilizeSearch, AllLocked) {
  try {
    stabilize_search(fcm::testing::two_cycle(1.0, 1.0), {{"a", "b"}, {"b", "a"}}, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::locked);
    EXPECT_NE(std::string(e.what()).find("all edges locked"), std::string::npos);
  }
}

TEST(StabilizeSearch, RespectsLocks) {
  const auto plan = stabilize_search(fcm::testing::two_cycle(1.0, 1.0), {{"a", "b"}}, 1e-6);
  ASSERT_TRUE(plan.success);
  for (const auto& m : plan.modifications) EXPECT_EQ(m.source, "b");
}

TEST(StabilizeSearch, EqualDisjointCyclesAreBothReduced) {
  // Halving either loop alone leaves rho = 1; the sum tie-break continues.
  const auto m = build_map({{"a", "", FactorKind::general, {}}, {"b", "", FactorKind::general, {}}},
                           {{"a", "a", 1.0}, {"b", "b", 1.0}});
  const auto plan = stabilize_search(m, {}, 1e-6);
  EXPECT_TRUE(plan.success);
  EXPECT_EQ(plan.modifications.size(), 2u);
}

TEST(StabilizeSearch, FirstMoveIsBestSingleMove) {
  // Oracle: try every single halving exhaustively on the full map.
  std::mt19937_64 rng(59);
  int checked = 0;
  for (int rep = 0; rep < 300 && checked < 20; ++rep) {
    const auto m = fcm::testing::random_map(rng, {2, 5, 0.5, 1});
    if (stability_report(m, 1e-6).classification == Stability::stable) continue;
    const auto plan = stabilize_search(m, {}, 1e-6);
    ASSERT_FALSE(plan.modifications.empty());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m.edges().size(); ++k) {
      auto edges = m.edges();
      edges[k].weight = halved(edges[k].weight);
      best = std::min(best, stability_report(m.with_edges(edges), 1e-9).spectral_radius);
    }
    StabilizationPlan first{{plan.modifications[0]}, 0, false};
    EXPECT_NEAR(stability_report(apply_plan(m, first), 1e-9).spectral_radius, best, 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 5);
}
