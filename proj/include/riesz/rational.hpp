#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace riesz {

// Exact rational number for exponent bookkeeping. Intermediate products are
// formed in 128 bits and reduced; values outside int64 throw.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational division by zero");
    return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// "7", "-5/2" or a plain decimal such as "2.25".
  static Rational parse(const std::string& text) {
    auto bad = [&] { return std::invalid_argument("not a rational number: '" + text + "'"); };
    auto integer = [&](const std::string& s) -> std::int64_t {
      std::size_t used = 0;
      if (s.empty() || s.find_first_not_of("+-0123456789") != std::string::npos) throw bad();
      std::int64_t v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        throw bad();
      }
      if (used != s.size()) throw bad();
      return v;
    };
    if (const auto slash = text.find('/'); slash != std::string::npos) {
      const std::int64_t d = integer(text.substr(slash + 1));
      if (d == 0) throw bad();
      return Rational(integer(text.substr(0, slash)), d);
    }
    if (const auto dot = text.find('.'); dot != std::string::npos) {
      const std::string frac = text.substr(dot + 1);
      if (frac.empty() || frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos) throw bad();
      std::int64_t scale = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
      const std::string whole = text.substr(0, dot);
      const bool neg = !whole.empty() && whole[0] == '-';
      const std::int64_t w = (whole.empty() || whole == "-" || whole == "+") ? 0 : integer(whole);
      const Rational f(std::stoll(frac), scale);
      return neg ? Rational(w) - f : Rational(w) + f;
    }
    return Rational(integer(text));
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static Rational make(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) { const __int128 t = a % b; a = b; b = t; }
    if (a > 1) { n /= a; d /= a; }
    constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
    if (n > lim || n < -lim || d > lim) throw std::overflow_error("Rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }
  void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline double to_double(const Rational& r) { return r.to_double(); }
inline double to_double(double x) { return x; }

}  // namespace riesz
