#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgsp/model.hpp"
#include "json.hpp"

namespace bgsp {

using Json = nlohmann::ordered_json;

class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { ParseError, ValidationError };

  ScenarioError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A parsed scenario document: the instance plus whatever optional bids or
/// outcome it carries. `warnings` holds non-blocking validation issues such
/// as duplicate budgets.
struct Scenario {
  Instance instance;
  std::optional<BidProfile> bids;
  std::optional<Outcome> outcome;
  std::vector<ValidationIssue> warnings;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
  throw ScenarioError(ScenarioError::Kind::ParseError, where + ": " + what);
}

inline Rational json_rational(const Json& j, const std::string& where) {
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>());
    } catch (const std::exception& e) {
      parse_fail(where, e.what());
    }
  }
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  parse_fail(where, "expected a rational string such as \"3/2\" or \"0.4\"");
}

inline const Json& json_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) parse_fail(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where, std::string("missing field '") + key + "'");
  return *it;
}

inline std::size_t player_index(const Instance& inst, const Json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where, "expected a player name");
  const auto name = j.get<std::string>();
  for (std::size_t i = 0; i < inst.players.size(); ++i)
    if (inst.players[i].name == name) return i;
  parse_fail(where, "unknown player '" + name + "'");
}

// 1-based line and column of a byte offset.
inline std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses a scenario document. Errors name the offending field path; JSON
/// syntax errors carry the line and column.
inline Scenario parse_scenario(const std::string& text, const std::string& source = "scenario") {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::parse_fail(source + " (" + detail::line_context(text, e.byte == 0 ? 0 : e.byte - 1) + ")",
                       "malformed JSON");
  }

  Instance raw;
  const Json& slots = detail::json_field(doc, "slots", source);
  if (!slots.is_array() || slots.empty()) detail::parse_fail(source + ".slots", "expected a non-empty array");
  for (std::size_t s = 0; s < slots.size(); ++s)
    raw.ctrs.push_back(detail::json_rational(slots[s], source + ".slots[" + std::to_string(s) + "]"));

  const Json& players = detail::json_field(doc, "players", source);
  if (!players.is_array()) detail::parse_fail(source + ".players", "expected an array");
  for (std::size_t i = 0; i < players.size(); ++i) {
    const std::string where = source + ".players[" + std::to_string(i) + "]";
    Player p;
    if (const auto it = players[i].find("name"); players[i].is_object() && it != players[i].end()) {
      if (!it->is_string()) detail::parse_fail(where + ".name", "expected a string");
      p.name = it->get<std::string>();
    } else {
      p.name = "P" + std::to_string(i + 1);
    }
    p.value = detail::json_rational(detail::json_field(players[i], "value", where), where + ".value");
    p.budget = detail::json_rational(detail::json_field(players[i], "budget", where), where + ".budget");
    for (const auto& q : raw.players)
      if (q.name == p.name) detail::parse_fail(where + ".name", "duplicate player name '" + p.name + "'");
    raw.players.push_back(std::move(p));
  }

  if (const auto it = doc.find("tie_break"); it != doc.end()) {
    if (!it->is_array()) detail::parse_fail(source + ".tie_break", "expected an array of player names");
    for (std::size_t k = 0; k < it->size(); ++k)
      raw.tie_break.push_back(
          detail::player_index(raw, (*it)[k], source + ".tie_break[" + std::to_string(k) + "]"));
  }

  ValidationResult v = validate_instance(raw);
  if (!v.ok()) {
    std::string msg;
    for (const auto& issue : v.issues) {
      if (issue.warning) continue;
      msg += (msg.empty() ? "" : "; ") + std::string(to_string(issue.code)) + ": " + issue.message;
    }
    throw ScenarioError(ScenarioError::Kind::ValidationError, source + ": " + msg);
  }

  Scenario sc;
  sc.instance = std::move(*v.instance);
  for (auto& issue : v.issues) sc.warnings.push_back(std::move(issue));
  const Instance& inst = sc.instance;

  if (const auto it = doc.find("bids"); it != doc.end()) {
    if (!it->is_array() || it->size() != inst.num_players())
      detail::parse_fail(source + ".bids", "expected one bid per player");
    BidProfile bids;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = source + ".bids[" + std::to_string(i) + "]";
      Bid b{detail::json_rational(detail::json_field((*it)[i], "value_bid", where), where + ".value_bid"),
            detail::json_rational(detail::json_field((*it)[i], "budget_bid", where), where + ".budget_bid")};
      if (b.value_bid < 0 || b.budget_bid < 0) detail::parse_fail(where, "bids must be non-negative");
      bids.push_back(b);
    }
    sc.bids = std::move(bids);
  }

  if (const auto it = doc.find("outcome"); it != doc.end()) {
    if (!it->is_array()) detail::parse_fail(source + ".outcome", "expected an array");
    Outcome out(inst.num_players());
    std::vector<bool> slot_used(inst.num_slots(), false);
    for (std::size_t r = 0; r < it->size(); ++r) {
      const std::string where = source + ".outcome[" + std::to_string(r) + "]";
      const Json& row = (*it)[r];
      const std::size_t i = detail::player_index(inst, detail::json_field(row, "player", where), where + ".player");
      const Json& slot = detail::json_field(row, "slot", where);
      if (slot.is_null()) continue;
      if (!slot.is_number_integer()) detail::parse_fail(where + ".slot", "expected a 1-based slot number or null");
      const auto s = slot.get<std::int64_t>();
      if (s < 1 || static_cast<std::size_t>(s) > inst.num_slots())
        detail::parse_fail(where + ".slot", "slot out of range");
      if (slot_used[static_cast<std::size_t>(s - 1)] || out.slot[i])
        detail::parse_fail(where, "assignment is not injective");
      slot_used[static_cast<std::size_t>(s - 1)] = true;
      const Rational price = detail::json_rational(detail::json_field(row, "price", where), where + ".price");
      if (price < 0) detail::parse_fail(where + ".price", "prices must be non-negative");
      out.assign(i, static_cast<std::size_t>(s - 1), price);
    }
    sc.outcome = std::move(out);
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ScenarioError::Kind::ParseError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

/// Serializes an instance (and optional bids) back into scenario form.
inline Json scenario_json(const Instance& inst, const BidProfile* bids = nullptr) {
  Json doc;
  doc["slots"] = Json::array();
  for (const auto& c : inst.ctrs) doc["slots"].push_back(c.to_string());
  doc["players"] = Json::array();
  for (const auto& p : inst.players)
    doc["players"].push_back({{"name", p.name}, {"value", p.value.to_string()}, {"budget", p.budget.to_string()}});
  doc["tie_break"] = Json::array();
  for (std::size_t i : inst.tie_break) doc["tie_break"].push_back(inst.players[i].name);
  if (bids) {
    doc["bids"] = Json::array();
    for (const auto& b : *bids)
      doc["bids"].push_back({{"value_bid", b.value_bid.to_string()}, {"budget_bid", b.budget_bid.to_string()}});
  }
  return doc;
}

}  // namespace bgsp
