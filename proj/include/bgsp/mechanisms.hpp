#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bgsp/model.hpp"

namespace bgsp {

enum class Mechanism { Bosp, Bcp, Bcb, Bcbo };

inline const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Bosp: return "bosp";
    case Mechanism::Bcp: return "bcp";
    case Mechanism::Bcb: return "bcb";
    case Mechanism::Bcbo: return "bcbo";
  }
  return "?";
}

inline std::optional<Mechanism> parse_mechanism(std::string_view s) {
  if (s == "bosp") return Mechanism::Bosp;
  if (s == "bcp") return Mechanism::Bcp;
  if (s == "bcb") return Mechanism::Bcb;
  if (s == "bcbo") return Mechanism::Bcbo;
  return std::nullopt;
}

/// Players sorted by descending value-bid (ties by priority) and the price
/// each would be charged: the value-bid of the next player in that order,
/// zero for the last one.
struct RankedBids {
  std::vector<std::size_t> order;
  std::vector<Rational> price;  // indexed by player
};

inline RankedBids rank_bids(std::span<const Bid> bids, std::span<const std::size_t> priority) {
  RankedBids r;
  r.order.resize(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) r.order[i] = i;
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (bids[a].value_bid != bids[b].value_bid) return bids[a].value_bid > bids[b].value_bid;
    return priority[a] < priority[b];
  });
  r.price.assign(bids.size(), Rational{});
  for (std::size_t pos = 0; pos + 1 < r.order.size(); ++pos) r.price[r.order[pos]] = bids[r.order[pos + 1]].value_bid;
  return r;
}

inline RankedBids rank_bids(const Instance& inst, const BidProfile& bids) {
  return rank_bids(bids, inst.priority_ranks());
}

namespace detail {

inline void check_profile(const Instance& inst, std::span<const Bid> bids) {
  if (bids.size() != inst.num_players()) throw std::invalid_argument("bid profile size does not match player count");
}

inline Outcome bosp(const Instance& inst, std::span<const Bid> bids, std::span<const std::size_t> priority) {
  const RankedBids r = rank_bids(bids, priority);
  Outcome out(bids.size());
  const std::size_t filled = std::min(inst.num_slots(), bids.size());
  for (std::size_t j = 0; j < filled; ++j) out.assign(r.order[j], j, r.price[r.order[j]]);
  return out;
}

// Shared scan of BCP and BCB: each player in rank order takes the highest free
// slot whose total passes the affordability test, or is skipped for good.
template <typename Affordable>
Outcome scan_by_rank(const Instance& inst, std::span<const Bid> bids, std::span<const std::size_t> priority,
                     Affordable affordable) {
  const RankedBids r = rank_bids(bids, priority);
  Outcome out(bids.size());
  std::vector<bool> taken(inst.num_slots(), false);
  std::size_t free_left = inst.num_slots();
  for (std::size_t i : r.order) {
    if (free_left == 0) break;
    for (std::size_t s = 0; s < inst.num_slots(); ++s) {
      if (!taken[s] && affordable(i, s, r.price[i])) {
        taken[s] = true;
        --free_left;
        out.assign(i, s, r.price[i]);
        break;
      }
    }
  }
  return out;
}

inline Outcome bcp(const Instance& inst, std::span<const Bid> bids, std::span<const std::size_t> priority) {
  return scan_by_rank(inst, bids, priority, [&](std::size_t i, std::size_t s, const Rational& price) {
    return inst.ctrs[s] * price <= bids[i].budget_bid;
  });
}

inline Outcome bcb(const Instance& inst, std::span<const Bid> bids, std::span<const std::size_t> priority) {
  return scan_by_rank(inst, bids, priority, [&](std::size_t i, std::size_t s, const Rational&) {
    return inst.ctrs[s] * bids[i].value_bid <= bids[i].budget_bid;
  });
}

inline Outcome bcbo(const Instance& inst, std::span<const Bid> bids, std::span<const std::size_t> priority) {
  const std::size_t n = bids.size();
  Outcome out(n);
  std::vector<bool> assigned(n, false);
  std::vector<Rational> offer(n);
  for (std::size_t s = 0; s < inst.num_slots(); ++s) {
    std::optional<std::size_t> winner;
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned[i]) continue;
      offer[i] = min(bids[i].value_bid, bids[i].budget_bid / inst.ctrs[s]);
      if (!winner || offer[i] > offer[*winner] || (offer[i] == offer[*winner] && priority[i] < priority[*winner]))
        winner = i;
    }
    if (!winner) break;
    Rational second;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned[i] || i == *winner) continue;
      if (!any || offer[i] > second) second = offer[i];
      any = true;
    }
    assigned[*winner] = true;
    out.assign(*winner, s, second);
  }
  return out;
}

}  // namespace detail

/// Budget-oblivious GSP: slot j goes to the j-th highest value-bid; budget
/// bids are ignored and budgets may be violated.
inline Outcome run_bosp(const Instance& inst, const BidProfile& bids) {
  detail::check_profile(inst, bids);
  return detail::bosp(inst, bids, inst.priority_ranks());
}

/// Budget-conscious by price: prices come from the bid ranking first, then
/// each player takes the highest free slot s with ctr_s * price <= budget-bid.
inline Outcome run_bcp(const Instance& inst, const BidProfile& bids) {
  detail::check_profile(inst, bids);
  return detail::bcp(inst, bids, inst.priority_ranks());
}

/// Budget-conscious by bid: like BCP, but affordability is tested against the
/// player's own value-bid. The charged price is still the next lower bid.
inline Outcome run_bcb(const Instance& inst, const BidProfile& bids) {
  detail::check_profile(inst, bids);
  return detail::bcb(inst, bids, inst.priority_ranks());
}

/// Best-offer budget-conscious: slots from the top down go to the unassigned
/// player with the largest min{b, g/ctr}, who pays the second largest such
/// offer among the players still unassigned.
inline Outcome run_bcbo(const Instance& inst, const BidProfile& bids) {
  detail::check_profile(inst, bids);
  return detail::bcbo(inst, bids, inst.priority_ranks());
}

inline Outcome run_mechanism(Mechanism m, const Instance& inst, std::span<const Bid> bids,
                             std::span<const std::size_t> priority) {
  switch (m) {
    case Mechanism::Bosp: return detail::bosp(inst, bids, priority);
    case Mechanism::Bcp: return detail::bcp(inst, bids, priority);
    case Mechanism::Bcb: return detail::bcb(inst, bids, priority);
    case Mechanism::Bcbo: return detail::bcbo(inst, bids, priority);
  }
  throw std::logic_error("unknown mechanism");
}

inline Outcome run_mechanism(Mechanism m, const Instance& inst, const BidProfile& bids) {
  detail::check_profile(inst, bids);
  return run_mechanism(m, inst, bids, inst.priority_ranks());
}

}  // namespace bgsp
