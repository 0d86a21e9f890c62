#include <gtest/gtest.h>

#include <random>

#include "bgsp/demos.hpp"
#include "bgsp/efconstruct.hpp"
#include "bgsp/oracle.hpp"
#include "support/random_instances.hpp"

using namespace bgsp;

TEST(EfExists, EqualBudgetsHaveNoEnvyFreeAssignment) {
  const EfExistence r = ef_exists(demos::fig1());
  EXPECT_FALSE(r);
  EXPECT_GT(r.systems_checked, 0u);
}

TEST(EfExists, SlightlyLowerSecondBudgetRestoresExistence) {
  const Instance inst = demos::fig1(Rational(199, 100));
  const EfExistence r = ef_exists(inst);
  ASSERT_TRUE(r);
  EXPECT_TRUE(is_envy_free(inst, *r.witness));
}

TEST(EfExists, LonePlayerPaysNothing) {
  const EfExistence r = ef_exists(make_instance({1}, {{10, 5}}));
  ASSERT_TRUE(r);
  EXPECT_EQ(r.witness->slot[0], std::optional<std::size_t>(0));
  EXPECT_TRUE(is_envy_free(make_instance({1}, {{10, 5}}), *r.witness));
}

TEST(EfExists, RejectsLargeInstances) {
  const Instance inst = make_instance({1}, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}});
  try {
    ef_exists(inst);
    FAIL() << "expected InstanceTooLarge";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::InstanceTooLarge);
  }
}

TEST(EfExistsProperty, AgreesWithConstructorOnSmallInstances) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 150; ++t) {
    const Instance inst = test_support::random_instance(rng, {1, 3, 4, false});
    const EfExistence r = ef_exists(inst);
    ASSERT_TRUE(r) << "instance " << t;
    EXPECT_TRUE(is_envy_free(inst, *r.witness));
    EXPECT_TRUE(is_envy_free(inst, construct_envy_free(inst)));
  }
}

TEST(GridNashSearch, LonePlayerProfiles) {
  const Instance inst = make_instance({1}, {{7, 2}});
  const GridSpec grid{0, 5, Rational(1, 2), BudgetPolicy::Grid};
  for (Mechanism m : {Mechanism::Bosp, Mechanism::Bcp, Mechanism::Bcbo}) {
    const GridSearchResult r = grid_nash_search(inst, m, grid);
    EXPECT_EQ(r.evaluated, 121u);
    EXPECT_EQ(r.nash.size(), 121u) << to_string(m);
  }
  // BCB: only profiles whose value-bid passes the own-bid test, b <= g.
  const GridSearchResult bcb = grid_nash_search(inst, Mechanism::Bcb, grid);
  EXPECT_EQ(bcb.nash.size(), 66u);
  for (const auto& bids : bcb.nash) EXPECT_LE(bids[0].value_bid, bids[0].budget_bid);
}

// Offers are capped at B/ctr, so P3's huge value-bid keeps slot 3 against
// P4 and nobody can move up: an equilibrium with public budgets.
TEST(GridNashSearch, PublicBudgetBcboEquilibrium) {
  const Instance inst = demos::thm6();
  const BidProfile bids{{300, 1000}, {300, 999}, {1200, 998}, {0, 997}};
  NashOptions opts;
  opts.fixed_budget_bids = true;
  EXPECT_TRUE(check_nash(inst, Mechanism::Bcbo, bids, opts).is_nash);
  const Outcome out = run_bcbo(inst, bids);
  EXPECT_EQ(out.slot[0], std::optional<std::size_t>(0));
  EXPECT_EQ(out.price[0], Rational(999, 100));
  EXPECT_EQ(out.slot[2], std::optional<std::size_t>(2));
  EXPECT_EQ(out.price[2], Rational(0));
  EXPECT_FALSE(out.slot[3].has_value());
}

TEST(GridNashSearch, WorkersMatchSingleThread) {
  const GridSpec grid{0, 6, 1, BudgetPolicy::TrueBudgets};
  GridSearchOptions one, many;
  one.sample_every = 5;
  many.sample_every = 5;
  many.workers = 4;
  const Instance inst = make_instance({1, Rational(1, 2)}, {{5, 6}, {4, 3}});
  const GridSearchResult a = grid_nash_search(inst, Mechanism::Bcp, grid, one);
  const GridSearchResult b = grid_nash_search(inst, Mechanism::Bcp, grid, many);
  EXPECT_EQ(a.nash, b.nash);
  EXPECT_EQ(a.evaluated, b.evaluated);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t s = 0; s < a.samples.size(); ++s) EXPECT_EQ(a.samples[s].index, b.samples[s].index);
}

TEST(GridNashSearch, SampledCertificatesReplay) {
  const Instance inst = demos::fig2();
  GridSearchOptions opts;
  opts.sample_every = 3;
  const GridSearchResult r = grid_nash_search(inst, Mechanism::Bcp, {0, 10, 1, BudgetPolicy::TrueBudgets}, opts);
  ASSERT_FALSE(r.samples.empty());
  for (const auto& s : r.samples) {
    EXPECT_EQ(s.index % 3, 0u);
    const Outcome now = run_bcp(inst, s.bids);
    EXPECT_GT(replay(inst, s.bids, s.deviation), utility(s.deviation.player, now, inst));
    EXPECT_EQ(s.deviation.deviation.budget_bid, inst.players[s.deviation.player].budget);
  }
}

TEST(GridNashSearch, TooLargeGridIsRejected) {
  try {
    grid_nash_search(demos::thm6(), Mechanism::Bcb, {0, 2100, 1, BudgetPolicy::TrueBudgets});
    FAIL() << "expected GridTooLarge";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::GridTooLarge);
  }
}

TEST(GridNashSearch, InvalidGridIsRejected) {
  try {
    grid_nash_search(demos::fig2(), Mechanism::Bcp, {5, 1, 1, BudgetPolicy::TrueBudgets});
    FAIL() << "expected InvalidGrid";
  } catch (const OracleError& e) {
    EXPECT_EQ(e.kind(), OracleError::Kind::InvalidGrid);
  }
}

TEST(Demos, PublicBudgetInstanceSatisfiesThresholdChain) {
  EXPECT_NO_THROW(demos::check_threshold_chain(demos::thm6()));
  EXPECT_THROW(demos::check_threshold_chain(demos::fig4()), std::logic_error);
}
