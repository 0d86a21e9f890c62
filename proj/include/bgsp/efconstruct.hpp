#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgsp/model.hpp"
#include "bgsp/stability.hpp"

namespace bgsp {

class ConstructionError : public std::runtime_error {
 public:
  enum class Kind { InvalidInstance, DistinctBudgetsRequired, IterationCapExceeded, ProcessStalled };

  ConstructionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One step of the price-lowering process. `prices` and `levels` are
/// snapshots taken after the step (levels are the running U_i values).
struct LoweringEvent {
  std::string label;  // "lower", "envy", "unassigned", "join", "chain", "multi", "evict"
  std::size_t slot;
  Rational price;
  std::optional<std::size_t> player;
  std::vector<Rational> prices;
  std::vector<Rational> levels;
};

struct ConstructOptions {
  std::size_t iteration_cap = 1'000'000;
  std::vector<LoweringEvent>* trace = nullptr;
};

namespace detail {

class PriceLowering {
 public:
  PriceLowering(const Instance& inst, const ConstructOptions& opts)
      : inst_(inst), opts_(opts), rank_(inst.priority_ranks()) {
    const std::size_t k = inst.num_slots();
    const std::size_t n = inst.num_players();
    Rational start = 0;
    for (const auto& p : inst.players) start = max(start, max(p.value, p.budget / inst.ctrs.back()));
    price_.assign(k, start + 1);
    owner_.assign(k, std::nullopt);
    slot_.assign(n, std::nullopt);
    level_.assign(n, Rational{});
  }

  Outcome run() {
    while (auto s = first_free_slot()) {
      tick();
      serve(*s);
    }
    Outcome out(inst_.num_players());
    for (std::size_t i = 0; i < inst_.num_players(); ++i)
      if (slot_[i]) out.assign(i, *slot_[i], price_[*slot_[i]]);
    return out;
  }

 private:
  [[nodiscard]] const Rational& ctr(std::size_t s) const { return inst_.ctrs[s]; }
  [[nodiscard]] const Player& player(std::size_t i) const { return inst_.players[i]; }

  [[nodiscard]] Rational gain_at(std::size_t i, std::size_t s) const { return ctr(s) * (player(i).value - price_[s]); }
  [[nodiscard]] bool affords(std::size_t i, std::size_t s) const { return ctr(s) * price_[s] <= player(i).budget; }
  [[nodiscard]] bool wants(std::size_t i, std::size_t s) const { return affords(i, s) && gain_at(i, s) >= level_[i]; }
  [[nodiscard]] bool envies(std::size_t i, std::size_t s) const { return affords(i, s) && gain_at(i, s) > level_[i]; }

  // Highest price at which player i wants slot s.
  [[nodiscard]] Rational want_price(std::size_t i, std::size_t s) const {
    return min(player(i).budget / ctr(s), player(i).value - level_[i] / ctr(s));
  }

  [[nodiscard]] std::optional<std::size_t> first_free_slot() const {
    for (std::size_t s = 0; s < owner_.size(); ++s)
      if (!owner_[s]) return s;
    return std::nullopt;
  }

  void tick() {
    if (++events_ > opts_.iteration_cap)
      throw ConstructionError(ConstructionError::Kind::IterationCapExceeded,
                              "price lowering exceeded " + std::to_string(opts_.iteration_cap) + " events");
  }

  void record(const char* label, std::size_t s, std::optional<std::size_t> who) {
    if (opts_.trace) opts_.trace->push_back({label, s, price_[s], who, price_, level_});
  }

  [[noreturn]] void stalled(const std::string& why) const {
    throw ConstructionError(ConstructionError::Kind::ProcessStalled, "price lowering stalled: " + why);
  }

  void place(std::size_t i, std::size_t s) {
    if (slot_[i]) owner_[*slot_[i]] = std::nullopt;
    slot_[i] = s;
    owner_[s] = i;
    level_[i] = gain_at(i, s);
  }

  void unplace(std::size_t i) {
    if (slot_[i]) owner_[*slot_[i]] = std::nullopt;
    slot_[i] = std::nullopt;
  }

  [[nodiscard]] std::size_t first_by_priority(const std::vector<std::size_t>& who) const {
    return *std::min_element(who.begin(), who.end(), [&](auto a, auto b) { return rank_[a] < rank_[b]; });
  }

  void sort_by_priority(std::vector<std::size_t>& who) const {
    std::sort(who.begin(), who.end(), [&](auto a, auto b) { return rank_[a] < rank_[b]; });
  }

  // Lower free slot s to the first price at which somebody wants it, then
  // hand it out following the three cases.
  void serve(std::size_t s) {
    Rational target = want_price(0, s);
    for (std::size_t i = 1; i < inst_.num_players(); ++i) target = max(target, want_price(i, s));
    if (target < 0) stalled("no player wants slot " + std::to_string(s + 1) + " at a non-negative price");
    if (target < price_[s]) {
      price_[s] = target;
      record("lower", s, std::nullopt);
    }

    std::vector<std::size_t> enviers, idle, indifferent;
    for (std::size_t i = 0; i < inst_.num_players(); ++i) {
      if (envies(i, s))
        enviers.push_back(i);
      else if (wants(i, s))
        (slot_[i] ? indifferent : idle).push_back(i);
    }
    if (!enviers.empty()) {
      const std::size_t i = first_by_priority(enviers);
      place(i, s);
      record("envy", s, i);
      return;
    }
    if (!idle.empty()) {
      const std::size_t i = first_by_priority(idle);
      place(i, s);
      record("unassigned", s, i);
      return;
    }
    if (indifferent.empty()) stalled("nobody wants slot " + std::to_string(s + 1) + " at its want price");
    lower_concurrently(s, std::move(indifferent));
  }

  // Players in `group` are assigned and barely want the free slot s. Lower the
  // prices of s and of every slot held by the group together, each by
  // X/ctr_t, so that all members stay indifferent between their slot and s,
  // until an outsider wants one of these slots.
  void lower_concurrently(std::size_t s, std::vector<std::size_t> group) {
    std::vector<bool> in_group(inst_.num_players(), false);
    std::vector<std::size_t> slots{s};
    for (std::size_t a : group) {
      in_group[a] = true;
      slots.push_back(*slot_[a]);
    }

    for (;;) {
      tick();
      std::optional<Rational> step;
      const auto consider = [&](const Rational& x) {
        const Rational clamped = max(x, Rational{});
        if (!step || clamped < *step) step = clamped;
      };
      for (std::size_t j = 0; j < inst_.num_players(); ++j) {
        for (std::size_t t : slots) {
          const Rational total = ctr(t) * price_[t];
          if (!in_group[j]) {
            consider(max(total - player(j).budget, level_[j] - gain_at(j, t)));
          } else if (t != *slot_[j] && gain_at(j, t) > level_[j]) {
            consider(total - player(j).budget);
          }
        }
      }
      Rational floor = ctr(slots[0]) * price_[slots[0]];
      for (std::size_t t : slots) floor = min(floor, ctr(t) * price_[t]);
      if (!step || *step > floor) stalled("concurrent lowering would push a price below zero");

      for (std::size_t t : slots) price_[t] -= *step / ctr(t);
      for (std::size_t a : group) level_[a] += *step;
      record("lower", s, std::nullopt);

      std::vector<std::size_t> enviers, idle, joiners;
      for (std::size_t j = 0; j < inst_.num_players(); ++j) {
        bool envy = false, want = false;
        for (std::size_t t : slots) {
          envy = envy || (t != slot_[j] && envies(j, t));
          want = want || wants(j, t);
        }
        if (envy)
          enviers.push_back(j);
        else if (!in_group[j] && want)
          (slot_[j] ? joiners : idle).push_back(j);
      }
      for (std::size_t j : joiners) {
        in_group[j] = true;
        group.push_back(j);
        slots.push_back(*slot_[j]);
        record("join", *slot_[j], j);
      }
      if (enviers.empty() && idle.empty()) {
        if (joiners.empty()) stalled("concurrent lowering reached no event");
        continue;
      }
      resolve(s, slots, group, std::move(enviers), std::move(idle));
      return;
    }
  }

  // Hands the slots under concurrent lowering to the claimants (enviers first,
  // then unassigned players who want a slot) and shifts the group along
  // indifference chains so that the free slot gets filled. Group members left
  // without a slot become unassigned and keep their U.
  void resolve(std::size_t s, const std::vector<std::size_t>& slots, std::vector<std::size_t> group,
               std::vector<std::size_t> enviers, std::vector<std::size_t> idle) {
    sort_by_priority(enviers);
    sort_by_priority(idle);
    sort_by_priority(group);
    std::vector<bool> is_envier(inst_.num_players(), false);
    for (std::size_t j : enviers) is_envier[j] = true;

    std::vector<std::size_t> order = enviers;
    order.insert(order.end(), idle.begin(), idle.end());
    for (std::size_t a : group)
      if (!is_envier[a]) order.push_back(a);

    const auto acceptable = [&](std::size_t j, std::size_t t) {
      return is_envier[j] ? (t != slot_[j] && envies(j, t)) : wants(j, t);
    };

    // Greedy augmenting paths in priority order keep every earlier player
    // matched, so the matched set is lexicographically best by priority.
    std::vector<std::optional<std::size_t>> holder(inst_.num_slots());
    std::vector<std::optional<std::size_t>> matched(inst_.num_players());
    for (std::size_t j : order) {
      std::vector<bool> seen(inst_.num_slots(), false);
      augment(j, slots, acceptable, holder, matched, seen);
    }

    const std::size_t claimants = enviers.size() + idle.size();
    for (std::size_t j : order) unplace(j);
    for (std::size_t j : order) {
      if (matched[j]) {
        place(j, *matched[j]);
        record(claimants == 1 ? "chain" : "multi", *matched[j], j);
      } else if (std::find(group.begin(), group.end(), j) != group.end()) {
        record("evict", s, j);
      }
    }
  }

  template <typename Acceptable>
  bool augment(std::size_t j, const std::vector<std::size_t>& slots, const Acceptable& acceptable,
               std::vector<std::optional<std::size_t>>& holder, std::vector<std::optional<std::size_t>>& matched,
               std::vector<bool>& seen) {
    for (std::size_t t : slots) {
      if (seen[t] || !acceptable(j, t)) continue;
      seen[t] = true;
      if (!holder[t] || augment(*holder[t], slots, acceptable, holder, matched, seen)) {
        holder[t] = j;
        matched[j] = t;
        return true;
      }
    }
    return false;
  }

  const Instance& inst_;
  const ConstructOptions& opts_;
  std::vector<std::size_t> rank_;
  std::vector<Rational> price_;
  std::vector<std::optional<std::size_t>> owner_;
  std::vector<std::optional<std::size_t>> slot_;
  std::vector<Rational> level_;
  std::size_t events_ = 0;
};

}  // namespace detail

/// Builds an envy-free assignment by lowering slot prices from a level no
/// player can afford. Requires a valid instance with pairwise distinct
/// budgets. The result is checked with is_envy_free before it is returned.
inline Outcome construct_envy_free(const Instance& inst, const ConstructOptions& opts = {}) {
  const ValidationResult v = validate_instance(inst);
  if (!v.ok()) throw ConstructionError(ConstructionError::Kind::InvalidInstance, v.issues.front().message);
  if (v.has(IssueCode::DuplicateBudget))
    throw ConstructionError(ConstructionError::Kind::DistinctBudgetsRequired,
                            "envy-free construction requires pairwise distinct budgets");

  detail::PriceLowering process(*v.instance, opts);
  Outcome out = process.run();
  if (!is_envy_free(*v.instance, out))
    throw std::logic_error("price lowering finished with an assignment that is not envy-free");
  return out;
}

}  // namespace bgsp
