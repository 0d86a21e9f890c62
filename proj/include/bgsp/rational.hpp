#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bgsp {

/// Exact rational number kept in lowest terms with a positive denominator.
///
/// Numerator and denominator are 64-bit; every operation is evaluated in
/// 128-bit intermediates and the reduced result must fit back into 64 bits,
/// otherwise std::overflow_error is thrown. Nothing is ever rounded.
class Rational {
 public:
  using int_type = std::int64_t;

  constexpr Rational() = default;
  constexpr Rational(int_type n) : num_(n) {}  // NOLINT(implicit)

  Rational(int_type n, int_type d) { *this = make(n, d); }

  [[nodiscard]] constexpr int_type num() const { return num_; }
  [[nodiscard]] constexpr int_type den() const { return den_; }
  [[nodiscard]] constexpr bool is_integer() const { return den_ == 1; }
  [[nodiscard]] constexpr bool is_zero() const { return num_ == 0; }
  [[nodiscard]] constexpr int sign() const { return (num_ > 0) - (num_ < 0); }

  /// Decimal rendering rounded half away from zero to `places` digits,
  /// computed with integer arithmetic only.
  [[nodiscard]] std::string to_decimal(int places = 4) const {
    wide_t scale = 1;
    for (int k = 0; k < places; ++k) scale *= 10;
    const wide_t mag = num_ < 0 ? -wide(num_) : wide(num_);
    const wide_t scaled = (mag * scale * 2 + den_) / (wide(den_) * 2);
    const auto whole = static_cast<std::int64_t>(scaled / scale);
    std::string frac = std::to_string(static_cast<std::int64_t>(scaled % scale));
    std::string out = (num_ < 0 && scaled != 0 ? "-" : "") + std::to_string(whole);
    if (places > 0) out += "." + std::string(static_cast<std::size_t>(places) - frac.size(), '0') + frac;
    return out;
  }

  /// "p/q", or just "p" for integers.
  [[nodiscard]] std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Parses "p", "p/q", or a finite decimal such as "0.01" or "-2.5".
  /// Throws std::invalid_argument on malformed text.
  static Rational parse(std::string_view text);

  friend Rational operator+(const Rational& a, const Rational& b) {
    if (a.den_ == 1 && b.den_ == 1) return from_wide(wide(a.num_) + b.num_, 1);
    const int_type g = std::gcd(a.den_, b.den_);
    const wide_t n = wide(a.num_) * (b.den_ / g) + wide(b.num_) * (a.den_ / g);
    return from_wide(n, wide(a.den_) * (b.den_ / g));
  }

  friend Rational operator-(const Rational& a, const Rational& b) {
    if (a.den_ == 1 && b.den_ == 1) return from_wide(wide(a.num_) - b.num_, 1);
    const int_type g = std::gcd(a.den_, b.den_);
    const wide_t n = wide(a.num_) * (b.den_ / g) - wide(b.num_) * (a.den_ / g);
    return from_wide(n, wide(a.den_) * (b.den_ / g));
  }

  friend Rational operator*(const Rational& a, const Rational& b) {
    if (a.den_ == 1 && b.den_ == 1) return from_wide(wide(a.num_) * b.num_, 1);
    if (a.num_ == 0 || b.num_ == 0) return Rational{};
    const int_type g1 = std::gcd(a.num_, b.den_);
    const int_type g2 = std::gcd(b.num_, a.den_);
    // Cross-cancelled operands are already coprime.
    return checked(wide(a.num_ / g1) * (b.num_ / g2), wide(a.den_ / g2) * (b.den_ / g1));
  }

  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return a * b.reciprocal();
  }

  Rational operator-() const {
    if (num_ == std::numeric_limits<int_type>::min()) throw std::overflow_error("rational overflow");
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  [[nodiscard]] Rational reciprocal() const {
    if (num_ == 0) throw std::domain_error("rational division by zero");
    Rational r;
    r.num_ = num_ < 0 ? -den_ : den_;
    r.den_ = num_ < 0 ? -num_ : num_;
    return r;
  }

  [[nodiscard]] Rational abs() const { return num_ < 0 ? -*this : *this; }

  friend constexpr bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  friend constexpr std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    const wide_t l = wide(a.num_) * b.den_;
    const wide_t r = wide(b.num_) * a.den_;
    return l <=> r;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

 private:
  using wide_t = __int128;
  using uwide_t = unsigned __int128;

  static constexpr wide_t wide(int_type v) { return static_cast<wide_t>(v); }

  static uwide_t gcd_wide(uwide_t a, uwide_t b) {
    while (b != 0) {
      const uwide_t t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational checked(wide_t n, wide_t d) {
    constexpr wide_t lo = std::numeric_limits<int_type>::min() + 1;
    constexpr wide_t hi = std::numeric_limits<int_type>::max();
    if (n < lo || n > hi || d > hi) throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<int_type>(n);
    r.den_ = static_cast<int_type>(d);
    return r;
  }

  static Rational from_wide(wide_t n, wide_t d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    if (n == 0) return Rational{};
    if (d != 1) {
      const uwide_t g = gcd_wide(static_cast<uwide_t>(n < 0 ? -n : n), static_cast<uwide_t>(d));
      n /= static_cast<wide_t>(g);
      d /= static_cast<wide_t>(g);
    }
    return checked(n, d);
  }

  static Rational make(int_type n, int_type d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    return from_wide(wide(n), wide(d));
  }

  int_type num_ = 0;
  int_type den_ = 1;
};

inline Rational Rational::parse(std::string_view text) {
  const auto fail = [&] { return std::invalid_argument("not a rational: '" + std::string(text) + "'"); };
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw fail();

  bool negative = false;
  if (s.front() == '-' || s.front() == '+') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  const auto digits = [&](std::string_view d) -> wide_t {
    if (d.empty() || d.size() > 18) throw fail();
    wide_t v = 0;
    for (char c : d) {
      if (c < '0' || c > '9') throw fail();
      v = v * 10 + (c - '0');
    }
    return v;
  };

  wide_t n = 0;
  wide_t d = 1;
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    n = digits(s.substr(0, slash));
    d = digits(s.substr(slash + 1));
    if (d == 0) throw fail();
  } else if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = s.substr(0, dot);
    const std::string_view frac = s.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw fail();
    n = whole.empty() ? 0 : digits(whole);
    for (char c : frac) {
      if (c < '0' || c > '9' || d > wide_t{1'000'000'000'000'000'000}) throw fail();
      n = n * 10 + (c - '0');
      d *= 10;
    }
  } else {
    n = digits(s);
  }
  return from_wide(negative ? -n : n, d);
}

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace bgsp
