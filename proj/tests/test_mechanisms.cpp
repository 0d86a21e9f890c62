#include <gtest/gtest.h>

#include <random>

#include "bgsp/mechanisms.hpp"
#include "support/random_instances.hpp"

using namespace bgsp;

namespace {

void expect_slot(const Outcome& out, std::size_t player, std::size_t slot, const Rational& price) {
  ASSERT_TRUE(out.slot[player].has_value()) << "player " << player << " unassigned";
  EXPECT_EQ(*out.slot[player], slot) << "player " << player;
  EXPECT_EQ(out.price[player], price) << "player " << player;
}

// Coarse bids so that ties are frequent.
BidProfile random_bids(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> half(0, 40);
  BidProfile bids(n);
  for (auto& b : bids) b = {Rational(half(rng), 2), Rational(half(rng), 2)};
  return bids;
}

}  // namespace

TEST(Bosp, RanksByValueBidAndIgnoresBudgets) {
  const Instance inst = make_instance({1, Rational(1, 100)}, {{10, 12}, {9, 10}, {14, 8}});
  const Outcome out = run_bosp(inst, {{10, 0}, {9, 0}, {8, 0}});
  expect_slot(out, 0, 0, 9);
  expect_slot(out, 1, 1, 8);
  EXPECT_FALSE(out.slot[2]);
}

TEST(Bosp, BudgetViolationsAreNotPrevented) {
  const Instance inst = make_instance({1, Rational(1, 100)}, {{10, 12}, {9, 10}, {14, 8}});
  const Outcome out = run_bosp(inst, truthful_bids(inst));
  expect_slot(out, 2, 0, 10);
  EXPECT_FALSE(utility(2, out, inst).is_finite());
}

TEST(Bosp, SinglePlayerPaysZero) {
  const Instance inst = make_instance({1}, {{4, 1}});
  expect_slot(run_bosp(inst, {{Rational(7, 3), 1}}), 0, 0, 0);
}

TEST(Bosp, EqualBidsFollowTieBreak) {
  const Instance inst = make_instance({1, Rational(1, 2)}, {{5, 1}, {5, 2}}, {1, 0});
  const Outcome out = run_bosp(inst, {{5, 1}, {5, 2}});
  expect_slot(out, 1, 0, 5);
  expect_slot(out, 0, 1, 0);
}

TEST(Bcp, LowBidderTakesSlotAtZeroWhenOtherCannotAfford) {
  const Instance inst = make_instance({1}, {{10, 5}, {5, 3}});
  const Outcome out = run_bcp(inst, {{Rational(7, 2), 5}, {4, 3}});
  EXPECT_FALSE(out.slot[1]);
  expect_slot(out, 0, 0, 0);
}

TEST(Bcp, EnvyFreeBidsOfOneSlotExample) {
  const Instance inst = make_instance({1}, {{10, 5}, {5, 3}});
  const Outcome out = run_bcp(inst, {{5, 5}, {4, 3}});
  expect_slot(out, 0, 0, 4);
  EXPECT_FALSE(out.slot[1]);
}

TEST(Bcp, SinglePlayer) {
  const Instance inst = make_instance({1}, {{4, 1}});
  expect_slot(run_bcp(inst, {{3, 0}}), 0, 0, 0);
}

TEST(Bcb, RealizedProfileOfTwoSlotInstance) {
  const Instance inst = make_instance({1, Rational(1, 2)}, {{10, 6}, {8, 3}, {4, Rational(9, 10)}});
  const Outcome out = run_bcb(inst, {{5, 5}, {4, 2}, {2, 0}});
  expect_slot(out, 0, 0, 4);
  expect_slot(out, 1, 1, 2);
  EXPECT_FALSE(out.slot[2]);
}

TEST(Bcb, OwnBidTestCanSkipTopSlot) {
  // Raw instance with more slots than players: the mechanism does not care.
  const Instance inst = make_instance({1, Rational(1, 2)}, {{9, 9}});
  const Outcome out = run_bcb(inst, {{5, 3}});
  expect_slot(out, 0, 1, 0);
  EXPECT_FALSE(out.owner(0));
}

TEST(Bcb, SinglePlayer) {
  const Instance inst = make_instance({1}, {{1, 1}});
  expect_slot(run_bcb(inst, {{1, 1}}), 0, 0, 0);
}

TEST(Bcbo, HigherOfferWinsAndPaysSecondOffer) {
  const Instance inst = make_instance({1}, {{1, 1}, {1, 2}});
  const Outcome out = run_bcbo(inst, {{10, 5}, {8, 7}});
  expect_slot(out, 1, 0, 5);
  EXPECT_FALSE(out.slot[0]);
}

TEST(Bcbo, SlotsTopDown) {
  const Instance inst = make_instance({1, Rational(1, 2)}, {{10, 6}, {8, 3}, {4, Rational(9, 10)}});
  const Outcome out = run_bcbo(inst, {{5, 5}, {8, 4}, {2, 1}});
  expect_slot(out, 0, 0, 4);
  expect_slot(out, 1, 1, 2);
  EXPECT_FALSE(out.slot[2]);
}

TEST(Bcbo, SinglePlayer) {
  const Instance inst = make_instance({1}, {{1, 1}});
  expect_slot(run_bcbo(inst, {{6, 2}}), 0, 0, 0);
}

TEST(MechanismProperties, RandomProfiles) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 2000; ++t) {
    const Instance inst = test_support::random_instance(rng);
    const BidProfile bids = random_bids(rng, inst.num_players());
    const RankedBids ranked = rank_bids(inst, bids);

    for (Mechanism m : {Mechanism::Bosp, Mechanism::Bcp, Mechanism::Bcb, Mechanism::Bcbo}) {
      const Outcome out = run_mechanism(m, inst, bids);
      EXPECT_EQ(out, run_mechanism(m, inst, bids)) << to_string(m);

      std::vector<int> holders(inst.num_slots(), 0);
      for (std::size_t i = 0; i < inst.num_players(); ++i) {
        if (!out.slot[i]) {
          EXPECT_EQ(out.price[i], 0);
          continue;
        }
        ++holders[*out.slot[i]];
        EXPECT_GE(out.price[i], 0);
        const Rational total = inst.ctrs[*out.slot[i]] * out.price[i];
        if (m != Mechanism::Bcbo) { EXPECT_EQ(out.price[i], ranked.price[i]) << to_string(m); }
        if (m == Mechanism::Bcp || m == Mechanism::Bcb) { EXPECT_LE(total, bids[i].budget_bid); }
        if (m == Mechanism::Bcb) { EXPECT_LE(inst.ctrs[*out.slot[i]] * bids[i].value_bid, bids[i].budget_bid); }
      }
      for (int h : holders) EXPECT_LE(h, 1);
    }

    // BOSP: slot order is bid order.
    const Outcome bosp = run_bosp(inst, bids);
    for (std::size_t pos = 0; pos < ranked.order.size(); ++pos) {
      const std::size_t i = ranked.order[pos];
      if (pos < inst.num_slots()) {
        EXPECT_EQ(bosp.slot[i], pos);
      } else {
        EXPECT_FALSE(bosp.slot[i]);
      }
    }
  }
}

TEST(MechanismProperties, RankedPricesDescendAndEndAtZero) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const Instance inst = test_support::random_instance(rng);
    const RankedBids r = rank_bids(inst, random_bids(rng, inst.num_players()));
    for (std::size_t pos = 1; pos < r.order.size(); ++pos) EXPECT_LE(r.price[r.order[pos]], r.price[r.order[pos - 1]]);
    EXPECT_EQ(r.price[r.order.back()], 0);
  }
}

TEST(MechanismProperties, BospRaisingOwnBidNeverDemotes) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = test_support::random_instance(rng);
    BidProfile bids = random_bids(rng, inst.num_players());
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, inst.num_players() - 1)(rng);
    const auto before = run_bosp(inst, bids).slot[i];
    bids[i].value_bid += Rational(std::uniform_int_distribution<int>(1, 20)(rng), 4);
    const auto after = run_bosp(inst, bids).slot[i];
    if (before) {
      ASSERT_TRUE(after);
      EXPECT_LE(*after, *before);
    }
  }
}

TEST(MechanismProperties, BcboOfferSandwich) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 2000; ++t) {
    const Instance inst = test_support::random_instance(rng);
    const BidProfile bids = random_bids(rng, inst.num_players());
    const Outcome out = run_bcbo(inst, bids);
    std::vector<bool> gone(inst.num_players(), false);
    for (std::size_t s = 0; s < inst.num_slots(); ++s) {
      const auto w = out.owner(s);
      ASSERT_TRUE(w) << "BCBO leaves a slot empty only without bidders";
      const auto offer = [&](std::size_t i) { return min(bids[i].value_bid, bids[i].budget_bid / inst.ctrs[s]); };
      EXPECT_GE(offer(*w), out.price[*w]);
      EXPECT_LE(inst.ctrs[s] * out.price[*w], bids[*w].budget_bid);
      for (std::size_t i = 0; i < inst.num_players(); ++i)
        if (!gone[i] && i != *w) { EXPECT_GE(out.price[*w], offer(i)); }
      gone[*w] = true;
    }
  }
}
