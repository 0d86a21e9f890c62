#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "bgsp/mechanisms.hpp"
#include "bgsp/model.hpp"
#include "bgsp/stability.hpp"

namespace bgsp {

class RealizationError : public std::runtime_error {
 public:
  enum class Kind { NotEnvyFree, NoLosingPlayer };

  RealizationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Player order used by a realization together with the bids it produced.
struct RealizationPlan {
  std::vector<std::size_t> pi;
  BidProfile bids;
};

namespace detail {

inline void require_envy_free(const Instance& inst, const Outcome& ef) {
  if (!is_envy_free(inst, ef))
    throw RealizationError(RealizationError::Kind::NotEnvyFree, "outcome to realize is not envy-free");
}

// Without a loser the lowest ranked winner is charged nothing, so his
// envy-free price has to be zero already.
inline void require_price_setter(const Instance& inst, const Outcome& ef, std::size_t last_winner) {
  if (inst.num_players() <= inst.num_slots() && ef.price[last_winner] != 0)
    throw RealizationError(RealizationError::Kind::NoLosingPlayer,
                           "no losing player to set the positive price of " + inst.players[last_winner].name);
}

// Winners by non-increasing price, then losers; equal prices by priority.
inline std::vector<std::size_t> order_by_price(const Instance& inst, const Outcome& ef) {
  const auto rank = inst.priority_ranks();
  std::vector<std::size_t> pi(inst.num_players());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = i;
  std::stable_sort(pi.begin(), pi.end(), [&](std::size_t a, std::size_t b) {
    const bool wa = ef.slot[a].has_value();
    const bool wb = ef.slot[b].has_value();
    if (wa != wb) return wa;
    if (ef.price[a] != ef.price[b]) return ef.price[a] > ef.price[b];
    return rank[a] < rank[b];
  });
  return pi;
}

// Winners by slot, then losers by priority.
inline std::vector<std::size_t> order_by_slot(const Instance& inst, const Outcome& ef) {
  const auto rank = inst.priority_ranks();
  std::vector<std::size_t> pi(inst.num_players());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = i;
  std::stable_sort(pi.begin(), pi.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = ef.slot[a];
    const auto& sb = ef.slot[b];
    if (sa.has_value() != sb.has_value()) return sa.has_value();
    if (sa && *sa != *sb) return *sa < *sb;
    return rank[a] < rank[b];
  });
  return pi;
}

}  // namespace detail

/// BCP realization: players bid the price of their predecessor in price
/// order and report their true budgets.
inline RealizationPlan realize_bcp_plan(const Instance& inst, const Outcome& ef) {
  detail::require_envy_free(inst, ef);
  RealizationPlan plan{detail::order_by_price(inst, ef), BidProfile(inst.num_players())};
  const auto& pi = plan.pi;
  detail::require_price_setter(inst, ef, pi[inst.num_slots() - 1]);
  for (std::size_t pos = 0; pos < pi.size(); ++pos) {
    const std::size_t i = pi[pos];
    plan.bids[i].value_bid = pos == 0 ? ef.price[i] + 1 : ef.price[pi[pos - 1]];
    plan.bids[i].budget_bid = inst.players[i].budget;
  }
  return plan;
}

/// BCB realization: value-bids as for BCP, budget-bids exactly large enough
/// for each winner's own slot, so the own-bid test steers him there. The
/// first loser budget-bids 0; later losers bid nothing at all.
inline RealizationPlan realize_bcb_plan(const Instance& inst, const Outcome& ef) {
  detail::require_envy_free(inst, ef);
  RealizationPlan plan{detail::order_by_price(inst, ef), BidProfile(inst.num_players())};
  const auto& pi = plan.pi;
  const std::size_t k = inst.num_slots();
  detail::require_price_setter(inst, ef, pi[k - 1]);
  for (std::size_t pos = 0; pos < pi.size() && pos <= k; ++pos) {
    const std::size_t i = pi[pos];
    Bid& bid = plan.bids[i];
    bid.value_bid = pos == 0 ? ef.price[i] + 1 : ef.price[pi[pos - 1]];
    bid.budget_bid = pos < k ? inst.ctrs[*ef.slot[i]] * bid.value_bid : Rational{};
  }
  return plan;
}

/// BCBO realization: players in slot order; each winner below the top offers
/// exactly the total of the slot above, so every slot's runner-up sets the
/// envy-free price. The first loser offers the last slot's price.
inline RealizationPlan realize_bcbo_plan(const Instance& inst, const Outcome& ef) {
  detail::require_envy_free(inst, ef);
  const std::size_t k = inst.num_slots();
  RealizationPlan plan{detail::order_by_slot(inst, ef), BidProfile(inst.num_players())};
  const auto& pi = plan.pi;
  const auto& ctr = inst.ctrs;
  detail::require_price_setter(inst, ef, pi[k - 1]);

  Rational top = 0;
  for (std::size_t pos = 1; pos < k; ++pos) {
    const Rational& above = ef.price[pi[pos - 1]];
    plan.bids[pi[pos]] = {above * ctr[pos - 1] / ctr[pos], ctr[pos - 1] * above};
    top = max(top, plan.bids[pi[pos]].value_bid);
  }
  const Rational& last = ef.price[pi[k - 1]];
  if (k < pi.size()) plan.bids[pi[k]] = {last, ctr[k - 1] * last};
  top = max(top, last);
  for (const auto& p : inst.players) top = max(top, p.value);
  plan.bids[pi[0]] = {top + 1, ctr[0] * (top + 1)};
  return plan;
}

inline BidProfile realize_bcp(const Instance& inst, const Outcome& ef) { return realize_bcp_plan(inst, ef).bids; }
inline BidProfile realize_bcb(const Instance& inst, const Outcome& ef) { return realize_bcb_plan(inst, ef).bids; }
inline BidProfile realize_bcbo(const Instance& inst, const Outcome& ef) { return realize_bcbo_plan(inst, ef).bids; }

inline BidProfile realize(Mechanism m, const Instance& inst, const Outcome& ef) {
  switch (m) {
    case Mechanism::Bcp: return realize_bcp(inst, ef);
    case Mechanism::Bcb: return realize_bcb(inst, ef);
    case Mechanism::Bcbo: return realize_bcbo(inst, ef);
    case Mechanism::Bosp: break;
  }
  throw std::invalid_argument("no realization under bosp");
}

}  // namespace bgsp
