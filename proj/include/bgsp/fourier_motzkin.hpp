#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgsp/rational.hpp"

namespace bgsp {

enum class Relation { Le, Lt, Ge, Gt };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::Le: return "<=";
    case Relation::Lt: return "<";
    case Relation::Ge: return ">=";
    case Relation::Gt: return ">";
  }
  return "?";
}

/// sum_j coeffs[j] * x_j  rel  rhs
struct LinearConstraint {
  std::vector<Rational> coeffs;
  Relation rel;
  Rational rhs;

  [[nodiscard]] bool satisfied_by(const std::vector<Rational>& x) const {
    Rational lhs;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      if (!coeffs[j].is_zero()) lhs += coeffs[j] * x[j];
    switch (rel) {
      case Relation::Le: return lhs <= rhs;
      case Relation::Lt: return lhs < rhs;
      case Relation::Ge: return lhs >= rhs;
      case Relation::Gt: return lhs > rhs;
    }
    return false;
  }
};

struct LinearSystem {
  std::size_t num_vars = 0;
  std::vector<LinearConstraint> constraints;

  void add(std::vector<Rational> coeffs, Relation rel, Rational rhs) {
    constraints.push_back({std::move(coeffs), rel, rhs});
  }
  /// Single-variable bound x_var rel rhs.
  void bound(std::size_t var, Relation rel, Rational rhs) {
    std::vector<Rational> c(num_vars);
    c.at(var) = 1;
    add(std::move(c), rel, rhs);
  }
};

class LinearSystemError : public std::invalid_argument {
 public:
  enum class Kind { TooManyVariables, UndeclaredVariable };

  LinearSystemError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Feasibility {
  bool feasible = false;
  std::vector<Rational> witness;  // set iff feasible
  explicit operator bool() const { return feasible; }
};

inline constexpr std::size_t kMaxEliminationVars = 4;

namespace detail {

// a.x < c (strict) or a.x <= c.
struct Row {
  std::vector<Rational> a;
  Rational c;
  bool strict = false;

  friend bool operator==(const Row&, const Row&) = default;
};

inline bool row_less(const Row& l, const Row& r) {
  for (std::size_t j = 0; j < l.a.size(); ++j)
    if (l.a[j] != r.a[j]) return l.a[j] < r.a[j];
  if (l.c != r.c) return l.c < r.c;
  return l.strict < r.strict;
}

// Scales so the last nonzero coefficient has magnitude one; a constant row
// keeps its sign information only.
inline Row normalized(Row r) {
  for (std::size_t j = r.a.size(); j-- > 0;) {
    if (r.a[j].is_zero()) continue;
    const Rational scale = r.a[j].abs();
    if (scale != 1) {
      for (auto& x : r.a) x /= scale;
      r.c /= scale;
    }
    break;
  }
  return r;
}

inline bool constant_holds(const Row& r) { return r.strict ? Rational{} < r.c : Rational{} <= r.c; }

// Drops trivially true constant rows and duplicates. Returns false if some
// constant row is violated.
inline bool tidy(std::vector<Row>& rows) {
  std::vector<Row> kept;
  kept.reserve(rows.size());
  for (auto& r : rows) {
    const bool constant = std::all_of(r.a.begin(), r.a.end(), [](const Rational& x) { return x.is_zero(); });
    if (constant) {
      if (!constant_holds(r)) return false;
      continue;
    }
    kept.push_back(normalized(std::move(r)));
  }
  std::sort(kept.begin(), kept.end(), row_less);
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  rows = std::move(kept);
  return true;
}

// Eliminates x_var by pairing every upper bound with every lower bound.
inline std::vector<Row> eliminate(const std::vector<Row>& rows, std::size_t var) {
  std::vector<Row> out;
  std::vector<const Row*> upper, lower;
  for (const auto& r : rows) {
    const int s = r.a[var].sign();
    if (s == 0)
      out.push_back(r);
    else
      (s > 0 ? upper : lower).push_back(&r);
  }
  for (const Row* u : upper) {
    for (const Row* l : lower) {
      const Rational wu = -l->a[var];
      const Rational wl = u->a[var];
      Row r;
      r.a.resize(u->a.size());
      for (std::size_t j = 0; j < r.a.size(); ++j) r.a[j] = wu * u->a[j] + wl * l->a[j];
      r.a[var] = 0;
      r.c = wu * u->c + wl * l->c;
      r.strict = u->strict || l->strict;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace detail

/// Exact feasibility of a small system of strict and weak linear inequalities
/// over the rationals by Fourier-Motzkin elimination. A feasible verdict
/// carries a witness that is substituted back into every constraint.
inline Feasibility fm_feasible(const LinearSystem& system) {
  const std::size_t n = system.num_vars;
  if (n > kMaxEliminationVars)
    throw LinearSystemError(LinearSystemError::Kind::TooManyVariables,
                            std::to_string(n) + " variables; at most " + std::to_string(kMaxEliminationVars));

  std::vector<detail::Row> rows;
  rows.reserve(system.constraints.size());
  for (const auto& c : system.constraints) {
    if (c.coeffs.size() != n)
      throw LinearSystemError(LinearSystemError::Kind::UndeclaredVariable,
                              "constraint over " + std::to_string(c.coeffs.size()) + " variables in a system of " +
                                  std::to_string(n));
    detail::Row r{c.coeffs, c.rhs, c.rel == Relation::Lt || c.rel == Relation::Gt};
    if (c.rel == Relation::Ge || c.rel == Relation::Gt) {
      for (auto& x : r.a) x = -x;
      r.c = -r.c;
    }
    rows.push_back(std::move(r));
  }

  // levels[v] holds the system over x_0..x_v (later variables eliminated).
  std::vector<std::vector<detail::Row>> levels(n);
  if (!detail::tidy(rows)) return {};
  for (std::size_t v = n; v-- > 0;) {
    levels[v] = rows;
    rows = detail::eliminate(rows, v);
    if (!detail::tidy(rows)) return {};
  }

  Feasibility result{true, std::vector<Rational>(n)};
  auto& x = result.witness;
  for (std::size_t v = 0; v < n; ++v) {
    std::optional<Rational> lo, hi;
    bool lo_strict = false, hi_strict = false;
    for (const auto& r : levels[v]) {
      if (r.a[v].is_zero()) continue;
      Rational rest = r.c;
      for (std::size_t j = 0; j < v; ++j)
        if (!r.a[j].is_zero()) rest -= r.a[j] * x[j];
      const Rational b = rest / r.a[v];
      if (r.a[v].sign() > 0) {
        if (!hi || b < *hi) {
          hi = b;
          hi_strict = r.strict;
        } else if (b == *hi) {
          hi_strict = hi_strict || r.strict;
        }
      } else if (!lo || b > *lo) {
        lo = b;
        lo_strict = r.strict;
      } else if (b == *lo) {
        lo_strict = lo_strict || r.strict;
      }
    }
    if (lo && hi)
      x[v] = *lo == *hi ? *lo : (*lo + *hi) / 2;
    else if (lo)
      x[v] = lo_strict ? *lo + 1 : *lo;
    else if (hi)
      x[v] = hi_strict ? *hi - 1 : *hi;
  }

  for (const auto& c : system.constraints)
    if (!c.satisfied_by(x)) throw std::logic_error("Fourier-Motzkin witness violates a constraint");
  return result;
}

}  // namespace bgsp
