#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bgsp/fourier_motzkin.hpp"
#include "bgsp/mechanisms.hpp"
#include "bgsp/model.hpp"
#include "bgsp/stability.hpp"

namespace bgsp {

class OracleError : public std::runtime_error {
 public:
  enum class Kind { InstanceTooLarge, GridTooLarge, InvalidGrid, InvalidInstance };

  OracleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Envy-free existence

inline constexpr std::size_t kOracleMaxPlayers = 4;
inline constexpr std::size_t kOracleMaxSlots = 3;

struct EfExistence {
  bool exists = false;
  std::optional<Outcome> witness;
  std::size_t systems_checked = 0;
  explicit operator bool() const { return exists; }
};

namespace detail {

// Envy-free constraints for a full allocation (owner[t] holds slot t) in
// which slot t is affordable exactly for players with budget >= cut[t]; a
// cut of nullopt means nobody affords the slot. Variables are slot prices.
inline LinearSystem envy_system(const Instance& inst, const std::vector<std::size_t>& owner,
                                const std::vector<Rational>& budgets_desc,
                                const std::vector<std::size_t>& level) {
  const std::size_t k = inst.num_slots();
  LinearSystem sys;
  sys.num_vars = k;
  std::vector<std::optional<std::size_t>> slot_of(inst.num_players());
  for (std::size_t t = 0; t < k; ++t) slot_of[owner[t]] = t;

  // level[t] = m: the m largest distinct budgets afford slot t, the rest do not.
  for (std::size_t t = 0; t < k; ++t) {
    const Rational& ctr = inst.ctrs[t];
    sys.bound(t, Relation::Ge, 0);
    if (level[t] > 0) {
      std::vector<Rational> c(k);
      c[t] = ctr;
      sys.add(std::move(c), Relation::Le, budgets_desc[level[t] - 1]);
    }
    if (level[t] < budgets_desc.size()) {
      std::vector<Rational> c(k);
      c[t] = ctr;
      sys.add(std::move(c), Relation::Gt, budgets_desc[level[t]]);
    }
  }
  const auto affords = [&](std::size_t i, std::size_t t) {
    return level[t] > 0 && inst.players[i].budget >= budgets_desc[level[t] - 1];
  };

  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    const Player& p = inst.players[i];
    // u_i = own_coeff . p + own_const
    std::vector<Rational> own(k);
    Rational own_const;
    if (slot_of[i]) {
      const std::size_t s = *slot_of[i];
      own[s] = -inst.ctrs[s];
      own_const = inst.ctrs[s] * p.value;
    }
    // u_i >= 0
    sys.add(own, Relation::Ge, -own_const);
    for (std::size_t t = 0; t < k; ++t) {
      if (!affords(i, t) || slot_of[i] == t) continue;
      // u_i >= ctr_t (v_i - p_t)
      std::vector<Rational> c = own;
      c[t] += inst.ctrs[t];
      sys.add(std::move(c), Relation::Ge, inst.ctrs[t] * p.value - own_const);
    }
  }
  return sys;
}

template <typename Visit>
bool for_each_allocation(std::size_t n, std::size_t k, std::vector<std::size_t>& owner, std::vector<bool>& used,
                         Visit& visit) {
  if (owner.size() == k) return visit(owner);
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    owner.push_back(i);
    const bool stop = for_each_allocation(n, k, owner, used, visit);
    owner.pop_back();
    used[i] = false;
    if (stop) return true;
  }
  return false;
}

}  // namespace detail

/// Decides whether an envy-free assignment exists by trying every full
/// allocation and every affordability pattern, each as an exact linear
/// feasibility problem in the slot prices. Affording a slot exactly at the
/// budget counts as affording it.
inline EfExistence ef_exists(const Instance& raw) {
  const ValidationResult v = validate_instance(raw);
  if (!v.ok()) throw OracleError(OracleError::Kind::InvalidInstance, v.issues.front().message);
  const Instance& inst = *v.instance;
  const std::size_t n = inst.num_players();
  const std::size_t k = inst.num_slots();
  if (n > kOracleMaxPlayers || k > kOracleMaxSlots)
    throw OracleError(OracleError::Kind::InstanceTooLarge,
                      std::to_string(n) + " players / " + std::to_string(k) + " slots exceeds " +
                          std::to_string(kOracleMaxPlayers) + " / " + std::to_string(kOracleMaxSlots));

  std::vector<Rational> budgets;
  for (const auto& p : inst.players) budgets.push_back(p.budget);
  std::sort(budgets.begin(), budgets.end(), std::greater<>());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  const std::size_t levels = budgets.size() + 1;

  EfExistence result;
  auto try_allocation = [&](const std::vector<std::size_t>& owner) {
    std::vector<std::size_t> level(k, 0);
    for (;;) {
      // The owner has to afford his own slot.
      bool viable = true;
      for (std::size_t t = 0; t < k && viable; ++t)
        viable = level[t] > 0 && inst.players[owner[t]].budget >= budgets[level[t] - 1];
      if (viable) {
        ++result.systems_checked;
        const Feasibility f = fm_feasible(detail::envy_system(inst, owner, budgets, level));
        if (f) {
          Outcome out(n);
          for (std::size_t t = 0; t < k; ++t) out.assign(owner[t], t, f.witness[t]);
          if (!is_envy_free(inst, out)) throw std::logic_error("feasible envy system produced an envious witness");
          result.exists = true;
          result.witness = std::move(out);
          return true;
        }
      }
      std::size_t t = 0;
      while (t < k && ++level[t] == levels) level[t++] = 0;
      if (t == k) return false;
    }
  };
  std::vector<std::size_t> owner;
  std::vector<bool> used(n, false);
  detail::for_each_allocation(n, k, owner, used, try_allocation);
  return result;
}

// ---------------------------------------------------------------------------
// Grid Nash search

enum class BudgetPolicy { TrueBudgets, Grid };

struct GridSpec {
  Rational lo;
  Rational hi;
  Rational step;
  BudgetPolicy policy = BudgetPolicy::TrueBudgets;

  [[nodiscard]] std::vector<Rational> values() const {
    std::vector<Rational> out;
    for (Rational x = lo; x <= hi; x += step) out.push_back(x);
    return out;
  }
};

inline constexpr std::uint64_t kMaxGridProfiles = 10'000'000;

struct GridSample {
  std::uint64_t index;
  BidProfile bids;
  ImprovingDeviation deviation;
};

struct GridSearchResult {
  std::vector<BidProfile> nash;
  std::vector<std::uint64_t> nash_index;
  std::uint64_t evaluated = 0;
  std::vector<GridSample> samples;
  std::uint64_t cross_validated = 0;        // Nash verdicts re-checked with random deviations
  std::vector<GridSample> random_refutations;  // verdicts overturned by that re-check
};

struct GridSearchOptions {
  NashOptions nash;
  std::uint64_t sample_every = 0;  // keep every n-th refuted profile with its certificate
  unsigned workers = 1;
  std::function<void(std::uint64_t done, std::uint64_t total)> progress;
  std::uint64_t progress_every = 1'000'000;
  // The sweep relies on candidate enumeration alone; the first this many
  // Nash profiles are then re-checked with the random deviations of `nash`.
  std::uint64_t cross_validate_first = 64;
};

namespace detail {

struct Grid {
  std::vector<Bid> choices;  // per-player strategy set (budget filled later for TrueBudgets)
  std::uint64_t total = 1;
};

inline std::uint64_t checked_power(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t e = 0; e < exp; ++e) {
    if (base != 0 && r > kMaxGridProfiles / base + 1) return kMaxGridProfiles + 1;
    r *= base;
  }
  return r;
}

}  // namespace detail

/// Runs check_nash on every bid profile of the grid and returns the profiles
/// that pass. With the true-budget policy every budget-bid is the player's
/// true budget and deviations only move value-bids. An empty result is
/// evidence consistent with non-existence, not a proof.
inline GridSearchResult grid_nash_search(const Instance& raw, Mechanism mech, const GridSpec& grid,
                                         const GridSearchOptions& opts = {}) {
  const ValidationResult v = validate_instance(raw);
  if (!v.ok()) throw OracleError(OracleError::Kind::InvalidInstance, v.issues.front().message);
  const Instance& inst = *v.instance;
  if (grid.step <= 0 || grid.hi < grid.lo || grid.lo < 0)
    throw OracleError(OracleError::Kind::InvalidGrid, "grid needs 0 <= lo <= hi and step > 0");

  const std::vector<Rational> values = grid.values();
  const std::size_t n = inst.num_players();
  const bool true_budgets = grid.policy == BudgetPolicy::TrueBudgets;
  const std::uint64_t per_player = true_budgets ? values.size() : values.size() * values.size();
  const std::uint64_t total = detail::checked_power(per_player, n);
  if (total > kMaxGridProfiles)
    throw OracleError(OracleError::Kind::GridTooLarge,
                      "grid has more than " + std::to_string(kMaxGridProfiles) + " profiles");

  NashOptions nash = opts.nash;
  nash.fixed_budget_bids = nash.fixed_budget_bids || true_budgets;
  NashOptions sweep = nash;
  sweep.cross_validate = false;

  const auto profile_at = [&](std::uint64_t index, BidProfile& bids) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t digit = index % per_player;
      index /= per_player;
      if (true_budgets) {
        bids[i] = {values[digit], inst.players[i].budget};
      } else {
        bids[i] = {values[digit % values.size()], values[digit / values.size()]};
      }
    }
  };

  struct Chunk {
    std::vector<std::pair<std::uint64_t, BidProfile>> nash;
    std::vector<GridSample> samples;
  };
  const unsigned workers = std::max(1u, opts.workers);
  std::vector<Chunk> chunks(workers);
  std::atomic<std::uint64_t> done{0};

  const auto run_range = [&](unsigned w) {
    const std::uint64_t begin = total * w / workers;
    const std::uint64_t end = total * (w + 1) / workers;
    BidProfile bids(n);
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      profile_at(idx, bids);
      const NashVerdict verdict = check_nash(inst, mech, bids, sweep);
      if (verdict.is_nash) {
        chunks[w].nash.emplace_back(idx, bids);
      } else if (opts.sample_every != 0 && idx % opts.sample_every == 0) {
        chunks[w].samples.push_back({idx, bids, *verdict.deviation});
      }
      const std::uint64_t d = done.fetch_add(1, std::memory_order_relaxed) + 1;
      if (opts.progress && w == 0 && d % opts.progress_every == 0) opts.progress(d, total);
    }
  };

  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& t : pool) t.join();
  }

  GridSearchResult result;
  result.evaluated = done.load();
  for (auto& c : chunks) {
    for (auto& [idx, bids] : c.nash) {
      if (nash.cross_validate && result.cross_validated < opts.cross_validate_first) {
        ++result.cross_validated;
        const NashVerdict v = check_nash(inst, mech, bids, nash);
        if (!v.is_nash) {
          result.random_refutations.push_back({idx, std::move(bids), *v.deviation});
          continue;
        }
      }
      result.nash_index.push_back(idx);
      result.nash.push_back(std::move(bids));
    }
    for (auto& s : c.samples) result.samples.push_back(std::move(s));
  }
  if (opts.progress) opts.progress(result.evaluated, total);
  return result;
}

}  // namespace bgsp
