#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bgsp/rational.hpp"

namespace bgsp {

struct Player {
  std::string name;
  Rational value;
  Rational budget;
};

/// Auction environment: slot click-through rates (highest first), players,
/// and the a priori tie-break order (highest priority first).
struct Instance {
  std::vector<Rational> ctrs;
  std::vector<Player> players;
  std::vector<std::size_t> tie_break;

  [[nodiscard]] std::size_t num_slots() const { return ctrs.size(); }
  [[nodiscard]] std::size_t num_players() const { return players.size(); }

  /// rank[i] = position of player i in the tie-break order; smaller wins ties.
  [[nodiscard]] std::vector<std::size_t> priority_ranks() const {
    std::vector<std::size_t> rank(players.size());
    for (std::size_t pos = 0; pos < tie_break.size(); ++pos) rank[tie_break[pos]] = pos;
    return rank;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    if (a.ctrs != b.ctrs || a.tie_break != b.tie_break || a.players.size() != b.players.size()) return false;
    for (std::size_t i = 0; i < a.players.size(); ++i) {
      const auto& p = a.players[i];
      const auto& q = b.players[i];
      if (p.name != q.name || p.value != q.value || p.budget != q.budget) return false;
    }
    return true;
  }
};

/// Ascending-index tie break for `n` players.
inline std::vector<std::size_t> default_tie_break(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  return order;
}

/// Convenience constructor used throughout the tests and demos. Players are
/// given as (value, budget) pairs and named P1..Pn.
inline Instance make_instance(std::vector<Rational> ctrs, const std::vector<std::pair<Rational, Rational>>& players,
                              std::vector<std::size_t> tie_break = {}) {
  Instance inst;
  inst.ctrs = std::move(ctrs);
  for (std::size_t i = 0; i < players.size(); ++i)
    inst.players.push_back({"P" + std::to_string(i + 1), players[i].first, players[i].second});
  inst.tie_break = tie_break.empty() ? default_tie_break(players.size()) : std::move(tie_break);
  return inst;
}

struct Bid {
  Rational value_bid;
  Rational budget_bid;
  friend bool operator==(const Bid&, const Bid&) = default;
};

using BidProfile = std::vector<Bid>;

/// Bids equal to each player's true value and budget.
inline BidProfile truthful_bids(const Instance& inst) {
  BidProfile bids;
  bids.reserve(inst.num_players());
  for (const auto& p : inst.players) bids.push_back({p.value, p.budget});
  return bids;
}

/// Partial injective player -> slot assignment with a per-click price for
/// every assigned player. Unassigned players carry price 0.
struct Outcome {
  std::vector<std::optional<std::size_t>> slot;
  std::vector<Rational> price;

  Outcome() = default;
  explicit Outcome(std::size_t players) : slot(players), price(players) {}

  void assign(std::size_t player, std::size_t s, const Rational& p) {
    slot[player] = s;
    price[player] = p;
  }

  /// Player occupying slot `s`, if any.
  [[nodiscard]] std::optional<std::size_t> owner(std::size_t s) const {
    for (std::size_t i = 0; i < slot.size(); ++i)
      if (slot[i] == s) return i;
    return std::nullopt;
  }

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Utility value extended with a negative-infinity sentinel for players
/// charged beyond their budget.
class ExtendedUtility {
 public:
  constexpr ExtendedUtility() = default;
  static ExtendedUtility finite(Rational v) { return ExtendedUtility(false, v); }
  static ExtendedUtility neg_infinity() { return ExtendedUtility(true, Rational{}); }

  [[nodiscard]] bool is_finite() const { return !neg_inf_; }
  [[nodiscard]] const Rational& value() const { return value_; }

  [[nodiscard]] std::string to_string() const { return neg_inf_ ? "-inf" : value_.to_string(); }

  friend bool operator==(const ExtendedUtility& a, const ExtendedUtility& b) {
    return a.neg_inf_ == b.neg_inf_ && (a.neg_inf_ || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const ExtendedUtility& a, const ExtendedUtility& b) {
    if (a.neg_inf_ || b.neg_inf_) return b.neg_inf_ <=> a.neg_inf_;
    return a.value_ <=> b.value_;
  }

 private:
  ExtendedUtility(bool neg_inf, Rational v) : neg_inf_(neg_inf), value_(v) {}
  bool neg_inf_ = false;
  Rational value_;
};

/// Utility of a player who pays `price` per click in a slot with click-through
/// rate `ctr`, measured against the player's true budget.
inline ExtendedUtility slot_utility(const Player& p, const Rational& ctr, const Rational& price) {
  if (ctr * price > p.budget) return ExtendedUtility::neg_infinity();
  return ExtendedUtility::finite(ctr * (p.value - price));
}

inline ExtendedUtility utility(std::size_t player, const Outcome& outcome, const Instance& inst) {
  const auto& s = outcome.slot[player];
  if (!s) return ExtendedUtility::finite(0);
  return slot_utility(inst.players[player], inst.ctrs[*s], outcome.price[player]);
}

// ---------------------------------------------------------------------------
// Validation

enum class IssueCode {
  NonIncreasingCtr,
  NonPositiveCtr,
  DuplicateBudget,
  NegativeValue,
  NonPositiveBudget,
  TooFewPlayers,
  BadTieBreak,
};

inline const char* to_string(IssueCode c) {
  switch (c) {
    case IssueCode::NonIncreasingCtr: return "NonIncreasingCtr";
    case IssueCode::NonPositiveCtr: return "NonPositiveCtr";
    case IssueCode::DuplicateBudget: return "DuplicateBudget";
    case IssueCode::NegativeValue: return "NegativeValue";
    case IssueCode::NonPositiveBudget: return "NonPositiveBudget";
    case IssueCode::TooFewPlayers: return "TooFewPlayers";
    case IssueCode::BadTieBreak: return "BadTieBreak";
  }
  return "?";
}

struct ValidationIssue {
  IssueCode code;
  bool warning = false;  // DuplicateBudget only
  std::string message;
};

struct ValidationResult {
  std::optional<Instance> instance;  // present iff no error-grade issue
  std::vector<ValidationIssue> issues;

  [[nodiscard]] bool ok() const { return instance.has_value(); }
  [[nodiscard]] bool has(IssueCode c) const {
    return std::any_of(issues.begin(), issues.end(), [c](const auto& i) { return i.code == c; });
  }
};

/// Checks every Instance invariant and reports all violations at once. An
/// empty tie-break is normalized to ascending index order. Duplicate budgets
/// are reported as a warning and do not block the instance.
inline ValidationResult validate_instance(Instance raw) {
  ValidationResult out;
  auto error = [&](IssueCode c, std::string msg) { out.issues.push_back({c, false, std::move(msg)}); };

  for (std::size_t j = 0; j < raw.ctrs.size(); ++j) {
    if (raw.ctrs[j] <= 0) error(IssueCode::NonPositiveCtr, "slot " + std::to_string(j + 1) + " has ctr <= 0");
    if (j > 0 && raw.ctrs[j] >= raw.ctrs[j - 1])
      error(IssueCode::NonIncreasingCtr,
            "slot " + std::to_string(j + 1) + " ctr is not strictly below slot " + std::to_string(j));
  }
  if (raw.players.size() < raw.ctrs.size())
    error(IssueCode::TooFewPlayers, std::to_string(raw.players.size()) + " players for " +
                                        std::to_string(raw.ctrs.size()) + " slots");
  for (std::size_t i = 0; i < raw.players.size(); ++i) {
    const auto& p = raw.players[i];
    if (p.value < 0) error(IssueCode::NegativeValue, p.name + " has a negative value");
    if (p.budget <= 0) error(IssueCode::NonPositiveBudget, p.name + " has a non-positive budget");
    for (std::size_t j = 0; j < i; ++j) {
      if (raw.players[j].budget == p.budget) {
        out.issues.push_back({IssueCode::DuplicateBudget, true,
                              raw.players[j].name + " and " + p.name + " share budget " + p.budget.to_string()});
      }
    }
  }

  if (raw.tie_break.empty()) raw.tie_break = default_tie_break(raw.players.size());
  {
    std::vector<bool> seen(raw.players.size(), false);
    bool bad = raw.tie_break.size() != raw.players.size();
    for (std::size_t idx : raw.tie_break) {
      if (idx >= seen.size() || seen[idx]) {
        bad = true;
        break;
      }
      seen[idx] = true;
    }
    if (bad) error(IssueCode::BadTieBreak, "tie break is not a permutation of the players");
  }

  const bool blocking = std::any_of(out.issues.begin(), out.issues.end(), [](const auto& i) { return !i.warning; });
  if (!blocking) out.instance = std::move(raw);
  return out;
}

inline bool budgets_distinct(const Instance& inst) {
  for (std::size_t i = 0; i < inst.players.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (inst.players[i].budget == inst.players[j].budget) return false;
  return true;
}

}  // namespace bgsp
