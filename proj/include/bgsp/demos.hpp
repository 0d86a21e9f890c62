#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgsp/model.hpp"

// Small instances from the literature on budgeted GSP auctions, each of
// which witnesses a (non-)existence result.
namespace bgsp::demos {

/// Two players with equal budgets for which no envy-free assignment exists.
/// With `second_budget` lowered slightly below 2 one does exist.
inline Instance fig1(Rational second_budget = 2) {
  return make_instance({1, Rational(1, 2)}, {{8, 2}, {6, second_budget}});
}

/// One slot; envy-free prices under BCP that are not an equilibrium.
inline Instance fig2() { return make_instance({1}, {{10, 5}, {5, 3}}); }
inline BidProfile fig2_envy_free_bids() { return {{5, 5}, {4, 3}}; }
inline BidProfile fig2_deviation_bids() { return {{Rational(7, 2), 5}, {4, 3}}; }

/// No Nash equilibrium under BOSP.
inline Instance fig3() { return make_instance({1, Rational(1, 100)}, {{10, 12}, {9, 10}, {14, 8}}); }

/// No Nash equilibrium under BCP with true budget-bids. Ties favour P3, then
/// P2, then P1.
inline Instance fig4() { return make_instance({1, Rational(2, 5)}, {{50, 50}, {16, 5}, {8, 2}}, {2, 1, 0}); }

/// Affordability threshold B_i / ctr_j.
inline Rational threshold(const Instance& inst, std::size_t i, std::size_t j) {
  return inst.players[i].budget / inst.ctrs[j];
}

/// Checks the preconditions of the public-budget family: the affordability
/// thresholds of one slot all lie strictly below those of the next slot down,
/// budgets are distinct, and every value exceeds the largest threshold of the
/// last slot.
inline void check_threshold_chain(const Instance& inst) {
  const std::size_t n = inst.num_players();
  const std::size_t k = inst.num_slots();
  const auto fail = [](const std::string& why) { throw std::logic_error("threshold chain broken: " + why); };
  if (!budgets_distinct(inst)) fail("budgets are not distinct");
  for (std::size_t j = 0; j + 1 < k; ++j) {
    Rational top = threshold(inst, 0, j);
    Rational bottom = threshold(inst, 0, j + 1);
    for (std::size_t i = 1; i < n; ++i) {
      top = max(top, threshold(inst, i, j));
      bottom = min(bottom, threshold(inst, i, j + 1));
    }
    if (!(top < bottom)) fail("slot " + std::to_string(j + 1) + " thresholds reach slot " + std::to_string(j + 2));
  }
  Rational last = threshold(inst, 0, k - 1);
  for (std::size_t i = 1; i < n; ++i) last = max(last, threshold(inst, i, k - 1));
  for (const auto& p : inst.players)
    if (!(p.value > last)) fail(p.name + " values no more than the largest last-slot threshold");
}

/// Four players and three slots with public budgets: no Nash equilibrium
/// under BCB or BCBO when budget-bids equal the true budgets. Ties favour
/// the larger budget.
inline Instance thm6() {
  Instance inst = make_instance({100, 10, 1}, {{2001, 1000}, {2002, 999}, {2003, 998}, {2004, 997}});
  std::stable_sort(inst.tie_break.begin(), inst.tie_break.end(),
                   [&](std::size_t a, std::size_t b) { return inst.players[a].budget > inst.players[b].budget; });
  check_threshold_chain(inst);
  return inst;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> all{"fig1", "fig2", "fig3", "fig4", "thm6"};
  return all;
}

}  // namespace bgsp::demos
