#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace cce;

namespace {

JointDistribution diagonal_figure2(const GameTree& t) {
  JointDistribution x(t);
  const std::vector<NormalFormPlan> ll{{0, {0}}, {1, {0}}}, rr{{0, {1}}, {1, {1}}};
  x.add(ll, 0.5);
  x.add(rr, 0.5);
  x.close_step();
  return x;
}

JointDistribution expanded_product(const GameTree& t, const std::vector<BehavioralStrategy>& profile) {
  JointDistribution x(t);
  std::vector<NormalFormStrategy> parts;
  for (const auto& s : profile) parts.push_back(nf_strategy_reconstruction(t, s));
  joint_accumulate(x, parts);
  return x;
}

}  // namespace

TEST(PayoffRange, Examples) {
  EXPECT_DOUBLE_EQ(payoff_range(figure2_game()), 1.0);
  EXPECT_DOUBLE_EQ(payoff_range(shapley_efg()), 2.0);
  const GameTree flat = matrix_game({2, 2}, {{3, 3}, {3, 3}, {3, 3}, {3, 3}});
  EXPECT_DOUBLE_EQ(payoff_range(flat), 0.0);
  const auto g = cce_gap(flat, diagonal_figure2(flat));
  EXPECT_DOUBLE_EQ(g.alpha, 0.0);
  EXPECT_FALSE(g.degenerate);
}

TEST(OpponentReach, PureJointIsFootprint) {
  const GameTree t = figure2_game();
  JointDistribution x(t);
  const std::vector<NormalFormPlan> lr{{0, {0}}, {1, {1}}};
  x.add(lr, 1.0);
  x.close_step();
  EXPECT_EQ(opponent_reach(t, 0, x), (std::vector<double>{0.0, 1.0, 0.0, 1.0}));
  EXPECT_EQ(opponent_reach(t, 1, x), (std::vector<double>{1.0, 1.0, 0.0, 0.0}));
}

TEST(OpponentReach, UniformOpponent) {
  const GameTree t = figure2_game();
  JointDistribution x(t);
  const std::vector<NormalFormPlan> a{{0, {0}}, {1, {0}}}, b{{0, {0}}, {1, {1}}};
  x.add(a, 0.5);
  x.add(b, 0.5);
  x.close_step();
  for (double v : opponent_reach(t, 0, x)) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(OpponentReach, MatchesSupportSumOnK33) {
  const GameTree t = make_game("K3-3");
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = cce::testing::random_joint(t, 40, rng);
    for (PlayerId p = 0; p < 3; ++p) {
      const auto got = opponent_reach(t, p, x);
      for (int z = 0; z < t.num_terminals(); ++z) {
        double want = 0.0;
        for (int e = 0; e < x.support(); ++e) {
          const auto plans = x.plans(e);
          bool ok = true;
          for (PlayerId q = 0; q < 3; ++q) ok = ok && (q == p || plan_allows(t, plans[q], z));
          if (ok) want += x.weight(e);
        }
        EXPECT_NEAR(got[z], want * t.chance_reach(z), 1e-12);
      }
    }
  }
}

TEST(BestResponse, Figure2Examples) {
  const GameTree t = figure2_game();
  const auto uni = best_response(t, 0, std::vector<double>{0.5, 0.5, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(uni.value, 1.0);
  EXPECT_EQ(uni.plan.choice, (std::vector<int>{0}));
  // Opponent plays R: both plans are worth 1, the lower index wins.
  const auto r = best_response(t, 0, std::vector<double>{0.0, 1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_EQ(r.plan.choice, (std::vector<int>{0}));
}

TEST(BestResponse, MatchesEnumerationOnK33) {
  const GameTree t = make_game("K3-3");
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = cce::testing::random_joint(t, 30, rng);
    for (PlayerId p = 0; p < 3; ++p) {
      const auto opp = opponent_reach(t, p, x);
      const auto br = best_response(t, p, opp);
      EXPECT_NEAR(br.value, brute_force_best_response(t, p, opp), 1e-12);
      double v = 0.0;
      for (int z : plan_terminals(t, br.plan)) v += opp[z] * t.payoff(z, p);
      EXPECT_NEAR(v, br.value, 1e-12);
    }
  }
}

TEST(CceGap, Figure2UniformProductAndDiagonal) {
  const GameTree t = figure2_game();
  const std::vector<BehavioralStrategy> uniform{BehavioralStrategy::uniform(t, 0), BehavioralStrategy::uniform(t, 1)};
  const auto g = cce_gap(t, expanded_product(t, uniform));
  EXPECT_NEAR(g.epsilon_i[0], 0.25, 1e-12);
  EXPECT_NEAR(g.epsilon_i[1], 0.25, 1e-12);
  EXPECT_NEAR(g.social_welfare, 1.5, 1e-12);
  EXPECT_NEAR(cce_gap(t, diagonal_figure2(t)).epsilon, 0.0, 1e-12);
  EXPECT_NEAR(cce_gap(t, diagonal_figure2(t)).social_welfare, 2.0, 1e-12);
}

TEST(CceGap, MatchesBruteForce) {
  Rng rng(31);
  std::vector<GameTree> games{figure2_game(), shapley_efg(), make_game("K3-3")};
  for (auto& g : cce::testing::random_corpus(5, 2, 3)) games.push_back(std::move(g));
  for (auto& g : cce::testing::random_corpus(3, 3, 3)) games.push_back(std::move(g));
  for (const auto& t : games) {
    const auto x = cce::testing::random_joint(t, 12, rng);
    const auto a = cce_gap(t, x), b = brute_force_cce_gap(t, x);
    for (PlayerId p = 0; p < t.num_players(); ++p) {
      EXPECT_NEAR(a.best_response[p], b.best_response[p], 1e-9);
      EXPECT_NEAR(a.on_path[p], b.on_path[p], 1e-9);
    }
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-9);
    EXPECT_GE(a.epsilon, -1e-12);
  }
}

TEST(ProductGap, HandpickedAlternationOnFigure2) {
  const GameTree t = figure2_game();
  AverageState a0 = AverageState::zeros(t, 0), a1 = AverageState::zeros(t, 1);
  for (int i = 0; i < 10; ++i) {
    const BehavioralStrategy s0{0, {{i % 2 == 0 ? 1.0 : 0.0, i % 2 == 0 ? 0.0 : 1.0}}};
    const BehavioralStrategy s1{1, s0.dist};
    a0.add(t, s0);
    a1.add(t, s1);
  }
  const std::vector<BehavioralStrategy> avg{average_behavioral(a0), average_behavioral(a1)};
  EXPECT_NEAR(product_gap(t, avg).epsilon, 0.25, 1e-12);
}

TEST(ProductGap, PureNashHasZeroGap) {
  const GameTree t = matrix_game({2, 2}, {{3, 3}, {0, 0}, {0, 0}, {1, 1}});
  const std::vector<BehavioralStrategy> ne{{0, {{1.0, 0.0}}}, {1, {{1.0, 0.0}}}};
  EXPECT_NEAR(product_gap(t, ne).epsilon, 0.0, 1e-15);
}

TEST(ProductGap, MatchesExpandedProductOnK33) {
  const GameTree t = make_game("K3-3");
  Rng rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<BehavioralStrategy> profile;
    for (PlayerId p = 0; p < 3; ++p) profile.push_back(random_strategy(t, p, rng, 0.2));
    const auto a = product_gap(t, profile);
    const auto b = cce_gap(t, expanded_product(t, profile));
    EXPECT_NEAR(a.epsilon, b.epsilon, 1e-9);
    for (PlayerId p = 0; p < 3; ++p) EXPECT_NEAR(a.on_path[p], b.on_path[p], 1e-9);
  }
}

TEST(SocialWelfare, UpperBoundExamples) {
  EXPECT_DOUBLE_EQ(sw_upper_bound(figure2_game()), 2.0);
  EXPECT_DOUBLE_EQ(sw_upper_bound(make_game("K3-4")), 0.0);
  EXPECT_TRUE(std::isnan(sw_ratio(0.0, 0.0)));
  EXPECT_DOUBLE_EQ(sw_ratio(1.5, 2.0), 0.75);
}

TEST(SocialWelfare, UpperBoundDominatesEveryJointPlan) {
  for (const auto& t : cce::testing::random_corpus(10, 2, 3)) {
    const double ub = sw_upper_bound(t);
    for (const auto& a : enumerate_plans(t, 0)) {
      for (const auto& b : enumerate_plans(t, 1)) {
        const std::vector<NormalFormPlan> jp{a, b};
        const auto u = joint_plan_value(t, jp);
        EXPECT_LE(u[0] + u[1], ub + 1e-12);
      }
    }
  }
}

TEST(RegretTracker, BoundHoldsForCfrJrOnRandomGames) {
  for (const auto& t : cce::testing::random_corpus(5, 2, 4)) {
    const auto run = run_cfr_jr(t, 200, 20);
    for (const auto& tp : run.trace) EXPECT_LE(tp.epsilon, tp.regret_bound + 1e-9);
  }
}

TEST(RegretTracker, JsonRoundTrip) {
  const GameTree t = figure2_game();
  ExternalRegretTracker a(t), b(t);
  const std::vector<std::vector<double>> reach{{1.0, 1.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 1.0}};
  a.observe(reach);
  b.from_json(a.to_json());
  EXPECT_EQ(b.steps(), 1);
  EXPECT_DOUBLE_EQ(a.regret(0), b.regret(0));
  EXPECT_DOUBLE_EQ(a.regret(1), 1.0);
}

TEST(RealizationCheck, OwnerMismatchThrows) {
  const GameTree t = figure2_game();
  EXPECT_THROW(realization_equivalence_check(t, BehavioralStrategy::uniform(t, 0), NormalFormStrategy::pure({1, {0}})),
               InvalidArgument);
}

TEST(ReportJson, RatioNullWhenUndefined) {
  GapReport g;
  g.epsilon_i = {0.0};
  const auto j = to_json(g, 0.0);
  EXPECT_TRUE(j["sw_ratio"].is_null());
  EXPECT_DOUBLE_EQ(to_json(g, 2.0)["sw_ratio"].get<double>(), 0.0);
}
