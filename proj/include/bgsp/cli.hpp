#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "bgsp/demos.hpp"
#include "bgsp/efconstruct.hpp"
#include "bgsp/mechanisms.hpp"
#include "bgsp/oracle.hpp"
#include "bgsp/realize.hpp"
#include "bgsp/scenario.hpp"
#include "bgsp/stability.hpp"

namespace bgsp::cli {

enum ExitCode : int { kOk = 0, kDefect = 1, kInvalidInput = 2, kLimitExceeded = 3 };

/// Human-readable lines plus the machine block. The machine block always
/// starts with command, mechanism, outcome, verdict and certificates in that
/// order; analyses may append further keys.
struct Report {
  std::vector<std::string> lines;
  Json machine = Json::object();

  explicit Report(std::string command = {}) {
    machine["command"] = std::move(command);
    machine["mechanism"] = nullptr;
    machine["outcome"] = nullptr;
    machine["verdict"] = nullptr;
    machine["certificates"] = Json::array();
  }

  void line(std::string s = {}) { lines.push_back(std::move(s)); }
  void blank() {
    if (!lines.empty() && !lines.back().empty()) lines.emplace_back();
  }

  [[nodiscard]] std::string text() const {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }
};

struct Execution {
  int code = kOk;
  Report report;
  std::string error;  // message for stderr on non-zero exit
};

// ---------------------------------------------------------------------------
// Rendering

inline std::string show(const Rational& r) { return r.to_string() + " (" + r.to_decimal() + ")"; }

inline std::string show(const ExtendedUtility& u) { return u.is_finite() ? show(u.value()) : "-inf"; }

inline Json rational_json(const Rational& r) { return r.to_string(); }
inline Json utility_json(const ExtendedUtility& u) { return u.to_string(); }

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline Json bids_json(const Instance& inst, const BidProfile& bids) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < bids.size(); ++i)
    arr.push_back({{"player", inst.players[i].name},
                   {"value_bid", rational_json(bids[i].value_bid)},
                   {"budget_bid", rational_json(bids[i].budget_bid)}});
  return arr;
}

inline void bids_table(Report& r, const Instance& inst, const BidProfile& bids) {
  r.line(pad("player", 8) + pad("value-bid", 22) + "budget-bid");
  for (std::size_t i = 0; i < bids.size(); ++i)
    r.line(pad(inst.players[i].name, 8) + pad(show(bids[i].value_bid), 22) + show(bids[i].budget_bid));
}

inline Json outcome_json(const Instance& inst, const Outcome& out) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    Json row;
    row["player"] = inst.players[i].name;
    if (out.slot[i]) {
      row["slot"] = *out.slot[i] + 1;
      row["price"] = rational_json(out.price[i]);
      row["total"] = rational_json(inst.ctrs[*out.slot[i]] * out.price[i]);
    } else {
      row["slot"] = nullptr;
      row["price"] = "0";
      row["total"] = "0";
    }
    row["utility"] = utility_json(utility(i, out, inst));
    arr.push_back(std::move(row));
  }
  return arr;
}

inline void outcome_table(Report& r, const Instance& inst, const Outcome& out) {
  r.line(pad("player", 8) + pad("slot", 6) + pad("price/click", 22) + pad("total", 22) + "utility");
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    const auto& s = out.slot[i];
    const std::string slot = s ? std::to_string(*s + 1) : "-";
    const Rational total = s ? inst.ctrs[*s] * out.price[i] : Rational{};
    r.line(pad(inst.players[i].name, 8) + pad(slot, 6) + pad(show(out.price[i]), 22) + pad(show(total), 22) +
           show(utility(i, out, inst)));
  }
}

inline Json certificate_json(const Instance& inst, const Certificate& cert) {
  return std::visit(
      [&](const auto& c) -> Json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, EnvyViolation>) {
          return {{"type", "envy"},
                  {"envier", inst.players[c.envier].name},
                  {"target_player", inst.players[c.target_player].name},
                  {"slot", c.target_slot + 1},
                  {"gain", c.gain ? rational_json(*c.gain) : Json(nullptr)}};
        } else if constexpr (std::is_same_v<T, EmptySlot>) {
          return {{"type", "empty_slot"}, {"slot", c.slot + 1}};
        } else {
          return {{"type", "deviation"},
                  {"mechanism", to_string(c.mechanism)},
                  {"player", inst.players[c.player].name},
                  {"value_bid", rational_json(c.deviation.value_bid)},
                  {"budget_bid", rational_json(c.deviation.budget_bid)},
                  {"old_utility", utility_json(c.old_utility)},
                  {"new_utility", utility_json(c.new_utility)}};
        }
      },
      cert);
}

inline std::string certificate_text(const Instance& inst, const Certificate& cert) {
  return std::visit(
      [&](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, EnvyViolation>) {
          return inst.players[c.envier].name + " envies slot " + std::to_string(c.target_slot + 1) + " of " +
                 inst.players[c.target_player].name + (c.gain ? ", gain " + show(*c.gain) : ", own utility -inf");
        } else if constexpr (std::is_same_v<T, EmptySlot>) {
          return "slot " + std::to_string(c.slot + 1) + " is unassigned";
        } else {
          return inst.players[c.player].name + " deviates to value-bid " + show(c.deviation.value_bid) +
                 ", budget-bid " + show(c.deviation.budget_bid) + ": utility " + show(c.old_utility) + " -> " +
                 show(c.new_utility);
        }
      },
      cert);
}

inline void add_certificate(Report& r, const Instance& inst, const Certificate& cert) {
  r.machine["certificates"].push_back(certificate_json(inst, cert));
  r.line("  certificate: " + certificate_text(inst, cert));
}

inline void instance_summary(Report& r, const Instance& inst) {
  std::string ctrs;
  for (const auto& c : inst.ctrs) ctrs += (ctrs.empty() ? "" : ", ") + c.to_string();
  r.line("slots: ctr = (" + ctrs + ")");
  for (const auto& p : inst.players)
    r.line("  " + pad(p.name, 6) + "value " + pad(p.value.to_string(), 10) + "budget " + p.budget.to_string());
  std::string order;
  for (std::size_t i : inst.tie_break) order += (order.empty() ? "" : " > ") + inst.players[i].name;
  r.line("tie-break: " + order);
}

// ---------------------------------------------------------------------------
// Analyses

inline void analyze_run(Report& r, const Instance& inst, Mechanism mech, const BidProfile& bids) {
  const Outcome out = run_mechanism(mech, inst, bids);
  r.machine["mechanism"] = to_string(mech);
  r.machine["outcome"] = outcome_json(inst, out);
  r.machine["bids"] = bids_json(inst, bids);
  r.line(std::string("mechanism: ") + to_string(mech));
  bids_table(r, inst, bids);
  r.blank();
  outcome_table(r, inst, out);
}

inline void analyze_envy(Report& r, const Instance& inst, const Outcome& out) {
  const EnvyCheck check = is_envy_free(inst, out);
  r.machine["outcome"] = outcome_json(inst, out);
  r.machine["verdict"] = check.envy_free ? "envy-free" : "not-envy-free";
  outcome_table(r, inst, out);
  r.blank();
  r.line(std::string("verdict: ") + (check.envy_free ? "envy-free" : "not envy-free"));
  for (const auto& c : check.violations) add_certificate(r, inst, c);
}

inline NashVerdict analyze_nash(Report& r, const Instance& inst, Mechanism mech, const BidProfile& bids,
                                const NashOptions& opts) {
  analyze_run(r, inst, mech, bids);
  const NashVerdict v = check_nash(inst, mech, bids, opts);
  r.machine["verdict"] = v.is_nash ? "nash" : "not-nash";
  r.blank();
  if (v.is_nash) {
    r.line("verdict: Nash equilibrium (no improving probe; " + std::to_string(opts.random_deviations) +
           " random deviations per player, seed " + std::to_string(opts.seed) + ")");
  } else {
    r.line(std::string("verdict: not a Nash equilibrium") + (v.found_by_random_probe ? " (random probe)" : ""));
    add_certificate(r, inst, *v.deviation);
  }
  return v;
}

inline void analyze_ef_exists(Report& r, const Instance& inst) {
  const EfExistence e = ef_exists(inst);
  r.machine["verdict"] = e.exists ? "exists" : "none";
  r.machine["systems_checked"] = e.systems_checked;
  r.line("envy-free assignment: " + std::string(e.exists ? "exists" : "does not exist") + " (" +
         std::to_string(e.systems_checked) + " affordability patterns checked)");
  if (e.witness) {
    r.machine["outcome"] = outcome_json(inst, *e.witness);
    r.line("witness:");
    outcome_table(r, inst, *e.witness);
  }
}

inline GridSearchResult analyze_grid(Report& r, const Instance& inst, Mechanism mech, const GridSpec& grid,
                                     const NashOptions& nash, std::uint64_t sample_every, unsigned workers) {
  GridSearchOptions opts;
  opts.nash = nash;
  opts.workers = workers;
  const std::uint64_t per = grid.values().size();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < inst.num_players(); ++i)
    total *= grid.policy == BudgetPolicy::TrueBudgets ? per : per * per;
  opts.sample_every = sample_every != 0 ? sample_every : std::max<std::uint64_t>(1, total / 8);
  const GridSearchResult res = grid_nash_search(inst, mech, grid, opts);

  const bool none = res.nash.empty();
  r.machine["mechanism"] = to_string(mech);
  r.machine["verdict"] = none ? "consistent-with-nonexistence" : "nash-profiles-found";
  r.machine["grid"] = {{"lo", rational_json(grid.lo)},
                       {"hi", rational_json(grid.hi)},
                       {"step", rational_json(grid.step)},
                       {"budget_bids", grid.policy == BudgetPolicy::TrueBudgets ? "true-budgets" : "grid"}};
  r.machine["evaluated"] = res.evaluated;
  r.machine["nash_profiles"] = Json::array();
  for (const auto& b : res.nash) r.machine["nash_profiles"].push_back(bids_json(inst, b));

  r.line(std::string("grid search under ") + to_string(mech) + ": value-bids " + grid.lo.to_string() + ".." +
         grid.hi.to_string() + " step " + grid.step.to_string() + ", budget-bids " +
         (grid.policy == BudgetPolicy::TrueBudgets ? "fixed at true budgets" : "on the same grid"));
  r.line("profiles evaluated: " + std::to_string(res.evaluated) + ", Nash profiles: " +
         std::to_string(res.nash.size()));
  r.machine["cross_validated"] = res.cross_validated;
  r.line(none ? "verdict: no Nash profile on the grid (consistent with nonexistence, not a proof)"
              : "verdict: Nash profiles found");
  const std::size_t shown = std::min<std::size_t>(res.nash.size(), 5);
  for (std::size_t t = 0; t < shown; ++t) {
    std::string bids;
    for (const auto& b : res.nash[t]) bids += (bids.empty() ? "" : ", ") + b.value_bid.to_string();
    r.line("  Nash value-bids (" + bids + ")");
  }
  if (shown < res.nash.size()) r.line("  ... " + std::to_string(res.nash.size() - shown) + " more");
  if (res.cross_validated != 0)
    r.line("random cross-validation of the first " + std::to_string(res.cross_validated) +
           " Nash verdicts overturned " + std::to_string(res.random_refutations.size()));
  for (const auto& s : res.random_refutations) add_certificate(r, inst, s.deviation);
  for (const auto& s : res.samples) {
    std::string bids;
    for (const auto& b : s.bids) bids += (bids.empty() ? "" : ", ") + b.value_bid.to_string();
    r.machine["certificates"].push_back(certificate_json(inst, s.deviation));
    r.machine["certificates"].back()["profile"] = bids_json(inst, s.bids);
    r.line("  sample value-bids (" + bids + "): " + certificate_text(inst, s.deviation));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Demos

struct DemoOptions {
  NashOptions nash;
  std::optional<Rational> step;
  std::optional<Rational> max;
  unsigned workers = 1;
};

inline Json section_of(const Report& sub) {
  Json j = sub.machine;
  j.erase("command");
  return j;
}

inline void append_section(Report& r, const std::string& title, Report&& sub) {
  r.blank();
  r.line("== " + title);
  for (auto& l : sub.lines) r.lines.push_back(std::move(l));
  Json sec = section_of(sub);
  sec["title"] = title;
  r.machine["analyses"].push_back(std::move(sec));
  for (const auto& c : sub.machine["certificates"]) r.machine["certificates"].push_back(c);
}

inline void promote(Report& r, std::size_t section) {
  const Json& s = r.machine["analyses"][section];
  for (const char* key : {"mechanism", "outcome", "verdict"}) r.machine[key] = s[key];
}

inline void demo_fig1(Report& r) {
  Report equal, perturbed;
  const Instance a = demos::fig1();
  instance_summary(equal, a);
  const ValidationResult v = validate_instance(a);
  for (const auto& issue : v.issues)
    equal.line(std::string("warning: ") + to_string(issue.code) + ": " + issue.message);
  analyze_ef_exists(equal, a);
  append_section(r, "equal budgets", std::move(equal));

  const Instance b = demos::fig1(Rational(199, 100));
  instance_summary(perturbed, b);
  analyze_ef_exists(perturbed, b);
  append_section(r, "second budget 199/100", std::move(perturbed));
  promote(r, 0);
}

inline void demo_fig2(Report& r, const DemoOptions& o) {
  const Instance inst = demos::fig2();
  Report ef, dev;
  instance_summary(ef, inst);
  ef.line("bids: envy-free prices, true budget-bids");
  analyze_nash(ef, inst, Mechanism::Bcp, demos::fig2_envy_free_bids(), o.nash);
  append_section(r, "BCP under the envy-free bids", std::move(ef));
  analyze_run(dev, inst, Mechanism::Bcp, demos::fig2_deviation_bids());
  append_section(r, "BCP after P1 lowers the value-bid to 7/2", std::move(dev));
  promote(r, 0);
}

inline void demo_fig3(Report& r, const DemoOptions& o) {
  const Instance inst = demos::fig3();
  Report truthful, br, grid;
  instance_summary(truthful, inst);
  analyze_run(truthful, inst, Mechanism::Bosp, truthful_bids(inst));
  append_section(r, "BOSP under truthful bids", std::move(truthful));

  const BestResponse best = best_response(inst, Mechanism::Bosp, truthful_bids(inst), 2);
  br.machine["mechanism"] = "bosp";
  br.machine["best_response"] = {{"player", "P3"},
                                 {"current", utility_json(best.current)},
                                 {"best", utility_json(best.best)},
                                 {"value_bid", rational_json(best.witness.value_bid)}};
  br.line("P3 current utility " + show(best.current) + ", best response value-bid " + show(best.witness.value_bid) +
          " reaches " + show(best.best));
  append_section(r, "best response of P3", std::move(br));

  const GridSpec range{0, o.max.value_or(15), o.step.value_or(Rational(1, 2)), BudgetPolicy::TrueBudgets};
  analyze_grid(grid, inst, Mechanism::Bosp, range, o.nash, 0, o.workers);
  append_section(r, "BOSP grid refutation", std::move(grid));
  promote(r, 2);
}

inline void demo_fig4(Report& r, const DemoOptions& o) {
  const Instance inst = demos::fig4();
  Report grid;
  instance_summary(grid, inst);
  const GridSpec range{0, o.max.value_or(51), o.step.value_or(Rational(1, 2)), BudgetPolicy::TrueBudgets};
  analyze_grid(grid, inst, Mechanism::Bcp, range, o.nash, 0, o.workers);
  append_section(r, "BCP grid refutation with true budget-bids", std::move(grid));
  promote(r, 0);
}

inline void demo_thm6(Report& r, const DemoOptions& o) {
  const Instance inst = demos::thm6();
  Report chain;
  instance_summary(chain, inst);
  chain.line("affordability thresholds B_i/ctr_j (checked: slot 1 < slot 2 < slot 3):");
  Json thresholds = Json::array();
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    std::string row = "  " + pad(inst.players[i].name, 6);
    Json jr = Json::array();
    for (std::size_t j = 0; j < inst.num_slots(); ++j) {
      row += pad(demos::threshold(inst, i, j).to_string(), 12);
      jr.push_back(rational_json(demos::threshold(inst, i, j)));
    }
    chain.line(row);
    thresholds.push_back(std::move(jr));
  }
  chain.machine["thresholds"] = std::move(thresholds);
  chain.machine["verdict"] = "threshold-chain-holds";
  append_section(r, "public-budget instance", std::move(chain));

  const GridSpec range{0, o.max.value_or(2100), o.step.value_or(50), BudgetPolicy::TrueBudgets};
  for (Mechanism m : {Mechanism::Bcb, Mechanism::Bcbo}) {
    Report grid;
    analyze_grid(grid, inst, m, range, o.nash, 0, o.workers);
    append_section(r, std::string(to_string(m)) + " grid refutation with true budget-bids", std::move(grid));
  }
  promote(r, 1);
  r.machine["mechanism"] = "bcb,bcbo";
}

inline void run_demo(Report& r, const std::string& name, const DemoOptions& o) {
  r.machine["analyses"] = Json::array();
  r.line("demo " + name);
  if (name == "fig1") demo_fig1(r);
  else if (name == "fig2") demo_fig2(r, o);
  else if (name == "fig3") demo_fig3(r, o);
  else if (name == "fig4") demo_fig4(r, o);
  else if (name == "thm6") demo_thm6(r, o);
  else throw std::invalid_argument("unknown demo '" + name + "'");
}

// ---------------------------------------------------------------------------
// Command line

namespace detail {

inline Mechanism mechanism_arg(const std::string& s) {
  if (auto m = parse_mechanism(s)) return *m;
  throw std::invalid_argument("unknown mechanism '" + s + "'");
}

inline std::size_t player_arg(const Instance& inst, const std::string& s) {
  for (std::size_t i = 0; i < inst.num_players(); ++i)
    if (inst.players[i].name == s) return i;
  if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const auto idx = std::stoull(s);
    if (idx >= 1 && idx <= inst.num_players()) return idx - 1;
  }
  throw std::invalid_argument("unknown player '" + s + "'");
}

inline void warn(Report& r, const Scenario& sc) {
  for (const auto& w : sc.warnings) {
    r.line(std::string("warning: ") + to_string(w.code) + ": " + w.message);
    r.machine["warnings"].push_back({{"code", to_string(w.code)}, {"message", w.message}});
  }
}

inline std::string join(const std::vector<std::string>& args) {
  std::string s = "bgsp";
  for (const auto& a : args) s += " " + a;
  return s;
}

}  // namespace detail

/// Parses `args` (without the program name), runs the analysis and returns
/// the report with the exit code. Nothing is printed.
inline Execution execute(const std::vector<std::string>& args) {
  Execution ex{kOk, Report(detail::join(args)), {}};
  Report& r = ex.report;

  CLI::App app{"Budgeted GSP auction analysis with exact rationals", "bgsp"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  std::uint64_t seed = NashOptions{}.seed;
  app.add_flag("--json", json, "Print only the machine-readable report");
  app.add_option("--seed", seed, "Seed for the randomized Nash cross-validation");

  std::string mech_name, path, player, demo_name;
  std::string step_text, max_text, min_text = "0";
  bool true_budgets = false, trace = false, nash_check = false;
  std::uint64_t sample_every = 0;
  unsigned workers = 1;
  const std::vector<std::string> all_mechs{"bosp", "bcp", "bcb", "bcbo"};

  auto* run = app.add_subcommand("run", "Run a mechanism on the scenario bids (truthful if absent)");
  run->add_option("--mechanism", mech_name)->required()->check(CLI::IsMember(all_mechs));
  run->add_option("scenario", path)->required();

  auto* check_ef = app.add_subcommand("check-ef", "Check the scenario outcome for envy-freeness");
  check_ef->add_option("scenario", path)->required();

  auto* check_nash_cmd = app.add_subcommand("check-nash", "Check whether the scenario bids are a Nash equilibrium");
  check_nash_cmd->add_option("--mechanism", mech_name)->required()->check(CLI::IsMember(all_mechs));
  check_nash_cmd->add_flag("--true-budgets", true_budgets, "Budgets are public: only value-bids may deviate");
  check_nash_cmd->add_option("scenario", path)->required();

  auto* best = app.add_subcommand("best-response", "Best response of one player to the scenario bids");
  best->add_option("--mechanism", mech_name)->required()->check(CLI::IsMember(all_mechs));
  best->add_option("--player", player, "Player name or 1-based index")->required();
  best->add_flag("--true-budgets", true_budgets, "Keep the budget-bid fixed");
  best->add_option("scenario", path)->required();

  auto* construct = app.add_subcommand("construct-ef", "Construct an envy-free assignment by price lowering");
  construct->add_flag("--trace", trace, "Print every event of the process");
  construct->add_option("scenario", path)->required();

  auto* realize_cmd = app.add_subcommand("realize", "Construct an envy-free assignment and realize it as bids");
  realize_cmd->add_option("--mechanism", mech_name)->required()->check(CLI::IsMember({"bcp", "bcb", "bcbo"}));
  realize_cmd->add_flag("--check-nash", nash_check, "Also check the realized bids for a Nash equilibrium");
  realize_cmd->add_option("scenario", path)->required();

  auto* exists = app.add_subcommand("ef-exists", "Decide exactly whether an envy-free assignment exists");
  exists->add_option("scenario", path)->required();

  auto* grid = app.add_subcommand("grid-search", "Check every bid profile on a grid for Nash equilibria");
  grid->add_option("--mechanism", mech_name)->required()->check(CLI::IsMember(all_mechs));
  grid->add_option("--step", step_text)->required();
  grid->add_option("--max", max_text)->required();
  grid->add_option("--min", min_text);
  grid->add_flag("--true-budgets", true_budgets, "Fix budget-bids at the true budgets");
  grid->add_option("--sample-every", sample_every, "Report every n-th refuted profile");
  grid->add_option("--workers", workers, "Worker threads");
  grid->add_option("scenario", path)->required();

  auto* demo = app.add_subcommand("demo", "Run a built-in example");
  demo->add_option("name", demo_name)->required()->check(CLI::IsMember(demos::names()));
  demo->add_option("--step", step_text, "Override the grid step");
  demo->add_option("--max", max_text, "Override the grid maximum");
  demo->add_option("--workers", workers, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    r.line(app.help());
    return ex;
  } catch (const CLI::CallForAllHelp&) {
    r.line(app.help("", CLI::AppFormatMode::All));
    return ex;
  } catch (const CLI::ParseError& e) {
    ex.code = kInvalidInput;
    ex.error = e.what();
    return ex;
  }

  NashOptions nash;
  nash.seed = seed;
  r.machine["json"] = json;

  const auto fail = [&](int code, const std::string& msg) {
    ex.code = code;
    ex.error = msg;
    return ex;
  };

  try {
    if (demo->parsed()) {
      DemoOptions o{nash, std::nullopt, std::nullopt, workers};
      if (!step_text.empty()) o.step = Rational::parse(step_text);
      if (!max_text.empty()) o.max = Rational::parse(max_text);
      run_demo(r, demo_name, o);
      return ex;
    }

    const Scenario sc = load_scenario(path);
    const Instance& inst = sc.instance;
    detail::warn(r, sc);

    if (run->parsed()) {
      analyze_run(r, inst, detail::mechanism_arg(mech_name), sc.bids.value_or(truthful_bids(inst)));
      if (!sc.bids) r.line("(no bids in scenario; truthful bids used)");
    } else if (check_ef->parsed()) {
      if (!sc.outcome) return fail(kInvalidInput, path + ": scenario has no outcome");
      analyze_envy(r, inst, *sc.outcome);
    } else if (check_nash_cmd->parsed()) {
      if (!sc.bids) return fail(kInvalidInput, path + ": scenario has no bids");
      nash.fixed_budget_bids = true_budgets;
      analyze_nash(r, inst, detail::mechanism_arg(mech_name), *sc.bids, nash);
    } else if (best->parsed()) {
      if (!sc.bids) return fail(kInvalidInput, path + ": scenario has no bids");
      const Mechanism m = detail::mechanism_arg(mech_name);
      const std::size_t i = detail::player_arg(inst, player);
      const BestResponse b = best_response(inst, m, *sc.bids, i, true_budgets);
      r.machine["mechanism"] = to_string(m);
      r.machine["verdict"] = b.best > b.current ? "improves" : "no-improvement";
      r.machine["best_response"] = {{"player", inst.players[i].name},
                                    {"current", utility_json(b.current)},
                                    {"best", utility_json(b.best)},
                                    {"value_bid", rational_json(b.witness.value_bid)},
                                    {"budget_bid", rational_json(b.witness.budget_bid)}};
      r.line(inst.players[i].name + " under " + to_string(m) + ": current utility " + show(b.current));
      r.line("best response: value-bid " + show(b.witness.value_bid) + ", budget-bid " +
             show(b.witness.budget_bid) + " -> utility " + show(b.best));
    } else if (construct->parsed()) {
      std::vector<LoweringEvent> events;
      ConstructOptions co;
      if (trace) co.trace = &events;
      const Outcome out = construct_envy_free(inst, co);
      for (const auto& e : events)
        r.line("event " + pad(e.label, 11) + "slot " + std::to_string(e.slot + 1) + "  price " + show(e.price) +
               (e.player ? "  " + inst.players[*e.player].name : ""));
      if (!events.empty()) r.blank();
      analyze_envy(r, inst, out);
    } else if (realize_cmd->parsed()) {
      const Mechanism m = detail::mechanism_arg(mech_name);
      const Outcome ef = construct_envy_free(inst);
      r.line("envy-free assignment:");
      outcome_table(r, inst, ef);
      r.blank();
      r.line("realizing bids:");
      const BidProfile bids = realize(m, inst, ef);
      r.machine["target"] = outcome_json(inst, ef);
      analyze_run(r, inst, m, bids);
      const bool same = run_mechanism(m, inst, bids) == ef;
      r.machine["verdict"] = same ? "round-trip-exact" : "round-trip-mismatch";
      r.line(std::string("round trip: ") + (same ? "mechanism reproduces the assignment exactly" : "MISMATCH"));
      if (nash_check) {
        const NashVerdict v = check_nash(inst, m, bids, nash);
        r.machine["nash"] = v.is_nash ? "nash" : "not-nash";
        r.line(std::string("Nash check: ") + (v.is_nash ? "Nash equilibrium" : "not a Nash equilibrium"));
        if (v.deviation) add_certificate(r, inst, *v.deviation);
      }
      if (!same) ex.code = kDefect;
    } else if (exists->parsed()) {
      analyze_ef_exists(r, inst);
    } else if (grid->parsed()) {
      const GridSpec range{Rational::parse(min_text), Rational::parse(max_text), Rational::parse(step_text),
                          true_budgets ? BudgetPolicy::TrueBudgets : BudgetPolicy::Grid};
      analyze_grid(r, inst, detail::mechanism_arg(mech_name), range, nash, sample_every, workers);
    }
  } catch (const ScenarioError& e) {
    return fail(kInvalidInput, e.what());
  } catch (const ConstructionError& e) {
    using K = ConstructionError::Kind;
    return fail(e.kind() == K::IterationCapExceeded ? kLimitExceeded
                : e.kind() == K::ProcessStalled     ? kDefect
                                                    : kInvalidInput,
                e.what());
  } catch (const OracleError& e) {
    using K = OracleError::Kind;
    return fail(e.kind() == K::InstanceTooLarge || e.kind() == K::GridTooLarge ? kLimitExceeded : kInvalidInput,
                e.what());
  } catch (const LinearSystemError& e) {
    return fail(kLimitExceeded, e.what());
  } catch (const RealizationError& e) {
    return fail(kInvalidInput, e.what());
  } catch (const std::overflow_error& e) {
    return fail(kLimitExceeded, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kInvalidInput, e.what());
  } catch (const std::logic_error& e) {
    return fail(kDefect, std::string("internal defect: ") + e.what());
  }
  return ex;
}

/// execute() followed by printing: the text report (or only the machine
/// block with --json) to `out`, errors to `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Execution ex = execute(args);
  if (ex.code != kOk && !ex.error.empty()) err << "error: " << ex.error << "\n";
  if (ex.code == kInvalidInput && ex.report.lines.empty()) return ex.code;
  if (ex.report.machine["json"] == true) {
    Json machine = ex.report.machine;
    machine.erase("json");
    out << machine.dump(2) << "\n";
  } else {
    out << "$ " << ex.report.machine["command"].get<std::string>() << "\n" << ex.report.text();
  }
  return ex.code;
}

}  // namespace bgsp::cli
