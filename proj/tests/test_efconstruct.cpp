#include <gtest/gtest.h>

#include <random>

#include "bgsp/demos.hpp"
#include "bgsp/efconstruct.hpp"
#include "bgsp/stability.hpp"
#include "support/random_instances.hpp"

using namespace bgsp;

TEST(ConstructEnvyFree, SingleSlotStopsAtFirstBudget) {
  const Outcome out = construct_envy_free(make_instance({1}, {{10, 5}, {5, 3}}));
  EXPECT_EQ(out.slot[0], std::optional<std::size_t>(0));
  EXPECT_EQ(out.price[0], Rational(5));
  EXPECT_FALSE(out.slot[1].has_value());
}

TEST(ConstructEnvyFree, EqualBudgetsAreRejected) {
  try {
    construct_envy_free(demos::fig1());
    FAIL() << "expected DistinctBudgetsRequired";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.kind(), ConstructionError::Kind::DistinctBudgetsRequired);
  }
}

TEST(ConstructEnvyFree, InvalidInstanceIsRejected) {
  Instance bad = make_instance({1}, {{10, 5}});
  bad.ctrs = {Rational(1, 2), 1};
  try {
    construct_envy_free(bad);
    FAIL() << "expected InvalidInstance";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.kind(), ConstructionError::Kind::InvalidInstance);
  }
}

TEST(ConstructEnvyFree, TwoSlotInstanceFillsBothSlots) {
  const Instance inst = make_instance({1, Rational(1, 2)}, {{10, 6}, {8, 3}, {4, Rational(9, 10)}});
  const Outcome out = construct_envy_free(inst);
  EXPECT_TRUE(is_envy_free(inst, out));
  EXPECT_TRUE(out.owner(0).has_value());
  EXPECT_TRUE(out.owner(1).has_value());
}

TEST(ConstructEnvyFree, LonePlayerStopsAtBudget) {
  const Outcome out = construct_envy_free(make_instance({1}, {{10, 5}}));
  EXPECT_EQ(out.slot[0], std::optional<std::size_t>(0));
  EXPECT_EQ(out.price[0], Rational(5));
}

TEST(ConstructEnvyFree, IterationCapIsReported) {
  const Instance inst = make_instance({1, Rational(1, 2)}, {{10, 6}, {8, 3}, {4, Rational(9, 10)}});
  ConstructOptions opts;
  opts.iteration_cap = 1;
  try {
    construct_envy_free(inst, opts);
    FAIL() << "expected IterationCapExceeded";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.kind(), ConstructionError::Kind::IterationCapExceeded);
  }
}

TEST(ConstructEnvyFreeProperty, RandomInstancesAreSolvedWithMonotoneTraces) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 500; ++t) {
    const Instance inst = test_support::random_instance(rng, {1, 4, 6, false});
    std::vector<LoweringEvent> trace;
    ConstructOptions opts;
    opts.trace = &trace;
    const Outcome out = construct_envy_free(inst, opts);

    ASSERT_TRUE(is_envy_free(inst, out)) << "instance " << t;
    for (std::size_t s = 0; s < inst.num_slots(); ++s) ASSERT_TRUE(out.owner(s).has_value());
    for (std::size_t i = 0; i < inst.num_players(); ++i)
      if (out.slot[i]) { EXPECT_LE(inst.ctrs[*out.slot[i]] * out.price[i], inst.players[i].budget); }

    ASSERT_FALSE(trace.empty());
    for (std::size_t e = 1; e < trace.size(); ++e) {
      for (std::size_t s = 0; s < inst.num_slots(); ++s) EXPECT_LE(trace[e].prices[s], trace[e - 1].prices[s]);
      for (std::size_t i = 0; i < inst.num_players(); ++i) EXPECT_GE(trace[e].levels[i], trace[e - 1].levels[i]);
    }
  }
}

TEST(ConstructEnvyFreeProperty, DeterministicAcrossRuns) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 50; ++t) {
    const Instance inst = test_support::random_instance(rng);
    EXPECT_EQ(construct_envy_free(inst), construct_envy_free(inst));
  }
}
