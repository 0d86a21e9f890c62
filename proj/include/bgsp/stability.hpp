#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "bgsp/mechanisms.hpp"
#include "bgsp/model.hpp"

namespace bgsp {

// ---------------------------------------------------------------------------
// Certificates

/// Player `envier` would strictly prefer the (slot, price) pair held by
/// `target_player`. `gain` is the utility shortfall; it is empty when the
/// envier's own utility is -inf (charged above the true budget).
struct EnvyViolation {
  std::size_t envier;
  std::size_t target_player;
  std::size_t target_slot;
  std::optional<Rational> gain;
};

struct EmptySlot {
  std::size_t slot;
};

/// Unilateral deviation that strictly raises the deviator's utility.
struct ImprovingDeviation {
  Mechanism mechanism;
  std::size_t player;
  Bid deviation;
  ExtendedUtility old_utility;
  ExtendedUtility new_utility;
};

using Certificate = std::variant<EnvyViolation, EmptySlot, ImprovingDeviation>;

// ---------------------------------------------------------------------------
// Envy-freeness

struct EnvyCheck {
  bool envy_free = true;
  std::vector<Certificate> violations;
  explicit operator bool() const { return envy_free; }
};

/// Envy-free iff every slot is assigned and, for every player i and every
/// assigned player i', i's utility is at least max{ctr(i')(v_i - p(i')), 0}
/// when i could afford that pair with its true budget (0 otherwise). The
/// comparison with i' = i enforces rationality and budget feasibility.
inline EnvyCheck is_envy_free(const Instance& inst, const Outcome& outcome) {
  EnvyCheck check;
  for (std::size_t s = 0; s < inst.num_slots(); ++s) {
    if (!outcome.owner(s)) {
      check.envy_free = false;
      check.violations.emplace_back(EmptySlot{s});
    }
  }
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    const ExtendedUtility u = utility(i, outcome, inst);
    const Player& p = inst.players[i];
    for (std::size_t other = 0; other < inst.num_players(); ++other) {
      const auto& s = outcome.slot[other];
      if (!s) continue;
      const Rational& ctr = inst.ctrs[*s];
      const Rational& price = outcome.price[other];
      Rational required;
      if (ctr * price <= p.budget) required = max(ctr * (p.value - price), Rational{});
      if (u >= ExtendedUtility::finite(required)) continue;
      check.envy_free = false;
      std::optional<Rational> gain;
      if (u.is_finite()) gain = required - u.value();
      check.violations.emplace_back(EnvyViolation{i, other, *s, gain});
    }
  }
  return check;
}

// ---------------------------------------------------------------------------
// Candidate deviations

namespace detail {

inline void sort_unique(std::vector<Rational>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Sorted distinct points, every midpoint between neighbours, and one point
// beyond the largest.
inline std::vector<Rational> with_midpoints(std::vector<Rational> points) {
  sort_unique(points);
  std::vector<Rational> probes;
  probes.reserve(points.size() * 2 + 1);
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0) probes.push_back((points[k - 1] + points[k]) / 2);
    probes.push_back(points[k]);
  }
  probes.push_back(points.back() + 1);
  return probes;
}

}  // namespace detail

/// Finite set of deviations for one player with everybody else's bids fixed.
///
/// Value-bid breakpoints are 0, the other players' value-bids, every g_j/ctr_s
/// of the others, every B_i/ctr_s of the deviator, and one point above the
/// largest; value probes add every midpoint between neighbours. Between two
/// consecutive breakpoints the ranking, the prices and every affordability
/// comparison that involves the deviator's value-bid stay constant.
///
/// Budget-bid probes are totals ctr_s * price for the prices that the
/// mechanism compares a budget-bid against, plus 0, B_i and the current
/// budget-bid, again with midpoints. With `fixed_budget_bid` (public budgets)
/// the only budget probe is the current budget-bid.
class CandidateSet {
 public:
  static CandidateSet build(const Instance& inst, Mechanism mech, const BidProfile& bids, std::size_t player,
                            bool fixed_budget_bid) {
    CandidateSet c;
    c.inst_ = &inst;
    c.mech_ = mech;
    c.bids_ = &bids;
    c.player_ = player;
    c.fixed_budget_bid_ = fixed_budget_bid || mech == Mechanism::Bosp;

    std::vector<Rational>& bp = c.breakpoints_;
    bp.push_back(0);
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (j == player) continue;
      bp.push_back(bids[j].value_bid);
      for (const auto& ctr : inst.ctrs) bp.push_back(bids[j].budget_bid / ctr);
    }
    for (const auto& ctr : inst.ctrs) bp.push_back(inst.players[player].budget / ctr);
    if (c.fixed_budget_bid_) {
      for (const auto& ctr : inst.ctrs) bp.push_back(bids[player].budget_bid / ctr);
    }
    detail::sort_unique(bp);
    c.value_probes_ = detail::with_midpoints(bp);
    bp.push_back(c.value_probes_.back());

    c.delta_ = (bp[1] - bp[0]) / 2;
    for (std::size_t k = 2; k < bp.size(); ++k) c.delta_ = min(c.delta_, (bp[k] - bp[k - 1]) / 2);
    return c;
  }

  [[nodiscard]] const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] const std::vector<Rational>& value_probes() const { return value_probes_; }
  /// Half the smallest gap between breakpoints; the exact stand-in for an
  /// infinitesimal bid shift.
  [[nodiscard]] const Rational& delta() const { return delta_; }
  [[nodiscard]] bool fixed_budget_bid() const { return fixed_budget_bid_; }

  /// Budget probes paired with value-bid `value_bid`. The current budget-bid
  /// always comes first.
  [[nodiscard]] std::vector<Rational> budget_probes(const Rational& value_bid) const {
    const Rational current = (*bids_)[player_].budget_bid;
    if (fixed_budget_bid_) return {current};
    const Instance& inst = *inst_;
    const BidProfile& bids = *bids_;
    std::vector<Rational> totals{Rational{0}, inst.players[player_].budget, current};
    switch (mech_) {
      case Mechanism::Bosp: break;
      case Mechanism::Bcp:
        for (const auto& ctr : inst.ctrs) {
          for (std::size_t j = 0; j < bids.size(); ++j)
            if (j != player_) totals.push_back(ctr * bids[j].value_bid);
        }
        break;
      case Mechanism::Bcb:
        for (const auto& ctr : inst.ctrs) totals.push_back(ctr * value_bid);
        break;
      case Mechanism::Bcbo:
        for (const auto& ctr : inst.ctrs) {
          totals.push_back(ctr * value_bid);
          for (std::size_t j = 0; j < bids.size(); ++j)
            if (j != player_) totals.push_back(min(ctr * bids[j].value_bid, bids[j].budget_bid));
        }
        break;
    }
    std::vector<Rational> probes = detail::with_midpoints(std::move(totals));
    std::vector<Rational> ordered{current};
    ordered.reserve(probes.size());
    for (auto& g : probes)
      if (g != current) ordered.push_back(g);
    return ordered;
  }

  /// Upper end of the budget probes over all value probes.
  [[nodiscard]] Rational budget_hull() const {
    const Rational current = (*bids_)[player_].budget_bid;
    if (fixed_budget_bid_) return current;
    Rational hull = max(current, inst_->players[player_].budget);
    for (const auto& b : (*bids_)) hull = max(hull, inst_->ctrs.front() * b.value_bid);
    hull = max(hull, inst_->ctrs.front() * value_probes_.back());
    return hull + 1;
  }

 private:
  const Instance* inst_ = nullptr;
  Mechanism mech_ = Mechanism::Bosp;
  const BidProfile* bids_ = nullptr;
  std::size_t player_ = 0;
  bool fixed_budget_bid_ = false;
  std::vector<Rational> breakpoints_;
  std::vector<Rational> value_probes_;
  Rational delta_;
};

// ---------------------------------------------------------------------------
// Best responses and Nash verification

/// Re-runs the mechanism with `player` switched to `deviation`.
inline ExtendedUtility deviation_utility(const Instance& inst, Mechanism mech, const BidProfile& bids,
                                         std::size_t player, const Bid& deviation) {
  BidProfile trial = bids;
  trial[player] = deviation;
  return utility(player, run_mechanism(mech, inst, trial), inst);
}

struct BestResponse {
  ExtendedUtility best;
  Bid witness;
  ExtendedUtility current;
};

struct NashOptions {
  bool fixed_budget_bids = false;      // public budgets: only value-bids may change
  bool cross_validate = true;          // random deviations on Nash verdicts
  std::size_t random_deviations = 1000;  // per player
  std::uint64_t seed = 20240601;
};

namespace detail {

// Calls visit(bid, utility) for every probe in order until it returns true.
template <typename Visit>
void scan_candidates(const Instance& inst, Mechanism mech, const BidProfile& bids, std::size_t player,
                     const CandidateSet& cands, std::span<const std::size_t> priority, Visit&& visit) {
  BidProfile trial = bids;
  for (const auto& b : cands.value_probes()) {
    for (const auto& g : cands.budget_probes(b)) {
      trial[player] = Bid{b, g};
      const ExtendedUtility u = utility(player, run_mechanism(mech, inst, trial, priority), inst);
      if (visit(trial[player], u)) return;
    }
  }
}

inline Rational random_fraction(std::mt19937_64& rng, const Rational& hull) {
  constexpr std::int64_t resolution = 1 << 20;
  std::uniform_int_distribution<std::int64_t> dist(0, resolution);
  return hull * Rational(dist(rng), resolution);
}

}  // namespace detail

/// Best utility `player` can reach over the candidate probes with the other
/// bids held fixed. Ties keep the first probe in scan order (ascending
/// value-bid, current budget-bid first).
inline BestResponse best_response(const Instance& inst, Mechanism mech, const BidProfile& bids, std::size_t player,
                                  bool fixed_budget_bid = false) {
  const auto priority = inst.priority_ranks();
  BestResponse br;
  br.current = utility(player, run_mechanism(mech, inst, bids, priority), inst);
  br.best = br.current;
  br.witness = bids[player];
  const CandidateSet cands = CandidateSet::build(inst, mech, bids, player, fixed_budget_bid);
  detail::scan_candidates(inst, mech, bids, player, cands, priority, [&](const Bid& bid, const ExtendedUtility& u) {
    if (u > br.best) {
      br.best = u;
      br.witness = bid;
    }
    return false;
  });
  return br;
}

struct NashVerdict {
  bool is_nash = true;
  std::optional<ImprovingDeviation> deviation;
  bool found_by_random_probe = false;
};

/// Replays a deviation certificate and returns the deviator's new utility.
inline ExtendedUtility replay(const Instance& inst, const BidProfile& bids, const ImprovingDeviation& d) {
  return deviation_utility(inst, d.mechanism, bids, d.player, d.deviation);
}

/// Searches every player's candidate probes for a strictly improving
/// deviation and returns the first one found. A Nash verdict is then
/// cross-checked with seeded uniform random deviations inside the probe hull.
/// Every certificate is replayed before it is returned.
inline NashVerdict check_nash(const Instance& inst, Mechanism mech, const BidProfile& bids,
                              const NashOptions& opts = {}) {
  const auto priority = inst.priority_ranks();
  const Outcome current = run_mechanism(mech, inst, bids, priority);

  auto certify = [&](std::size_t player, const Bid& bid, const ExtendedUtility& old_u, const ExtendedUtility& new_u,
                     bool random) {
    NashVerdict v;
    v.is_nash = false;
    v.found_by_random_probe = random;
    v.deviation = ImprovingDeviation{mech, player, bid, old_u, new_u};
    if (!(replay(inst, bids, *v.deviation) == new_u && new_u > old_u))
      throw std::logic_error("improving deviation failed to replay");
    return v;
  };

  std::vector<CandidateSet> cands;
  cands.reserve(inst.num_players());
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    const ExtendedUtility u = utility(i, current, inst);
    cands.push_back(CandidateSet::build(inst, mech, bids, i, opts.fixed_budget_bids));
    std::optional<std::pair<Bid, ExtendedUtility>> found;
    detail::scan_candidates(inst, mech, bids, i, cands.back(), priority,
                            [&](const Bid& bid, const ExtendedUtility& nu) {
                              if (nu > u) found.emplace(bid, nu);
                              return found.has_value();
                            });
    if (found) return certify(i, found->first, u, found->second, false);
  }

  if (opts.cross_validate) {
    BidProfile trial = bids;
    for (std::size_t i = 0; i < inst.num_players(); ++i) {
      const ExtendedUtility u = utility(i, current, inst);
      std::mt19937_64 rng(opts.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
      const Rational value_hull = cands[i].value_probes().back();
      const Rational budget_hull = cands[i].budget_hull();
      for (std::size_t t = 0; t < opts.random_deviations; ++t) {
        Bid d{detail::random_fraction(rng, value_hull), bids[i].budget_bid};
        if (!cands[i].fixed_budget_bid()) d.budget_bid = detail::random_fraction(rng, budget_hull);
        trial[i] = d;
        const ExtendedUtility nu = utility(i, run_mechanism(mech, inst, trial, priority), inst);
        if (nu > u) return certify(i, d, u, nu, true);
      }
      trial[i] = bids[i];
    }
  }
  return NashVerdict{};
}

}  // namespace bgsp
