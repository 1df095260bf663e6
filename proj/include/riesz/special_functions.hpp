#pragma once

// Normalized Hermite functions and normalized associated Legendre functions,
// both by three-term recurrences carried with a separate binary exponent so
// that high degrees far from the bulk neither overflow nor underflow early.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "riesz/error.hpp"

namespace riesz::special {

namespace detail {

/// Keeps |value| within [2^-300, 2^300] by moving powers of two into `exp2`.
inline void renormalize(double& a, double& b, long& exp2) {
  const double m = std::max(std::abs(a), std::abs(b));
  if (m > 0x1p300 || (m < 0x1p-300 && m > 0.0)) {
    int e = 0;
    std::frexp(m, &e);
    a = std::ldexp(a, -e);
    b = std::ldexp(b, -e);
    exp2 += e;
  }
}

inline double rescale(double v, long exp2) {
  if (v == 0.0) return 0.0;
  if (exp2 > 2000) throw Error(ErrorKind::Overflow, "scaled recurrence value out of range");
  if (exp2 < -2000) return 0.0;
  return std::ldexp(v, static_cast<int>(exp2));
}

}  // namespace detail

/// h_0(x) .. h_nmax(x), orthonormal in L^2(R): h_n = (2^n n! sqrt(pi))^-1/2 H_n(x) e^{-x^2/2}.
inline std::vector<double> hermite_functions(int nmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(nmax + 1));
  // carry e^{-x^2/2} as a separate log2 factor
  const double log2_gauss = -0.5 * x * x / std::numbers::ln2;
  long exp2 = static_cast<long>(std::floor(log2_gauss));
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25) * std::exp2(log2_gauss - static_cast<double>(exp2));
  out[0] = detail::rescale(cur, exp2);
  for (int n = 0; n < nmax; ++n) {
    const double next = std::sqrt(2.0 / (n + 1)) * x * cur - std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
    prev = cur;
    cur = next;
    detail::renormalize(prev, cur, exp2);
    out[static_cast<std::size_t>(n + 1)] = detail::rescale(cur, exp2);
  }
  return out;
}

inline double hermite_function(int n, double x) { return hermite_functions(n, x).back(); }

/// Lambda_l^m(x) for l = m .. lmax, normalized by int_{-1}^{1} Lambda^2 dx = 1, m >= 0.
/// Y_l^m(theta, phi) = Lambda_l^m(cos theta) e^{i m phi} / sqrt(2 pi).
inline std::vector<double> legendre_column(int m, int lmax, double x) {
  if (m < 0 || lmax < m) return {};
  std::vector<double> out(static_cast<std::size_t>(lmax - m + 1));
  const double s2 = std::max(0.0, (1.0 - x) * (1.0 + x));
  // Lambda_m^m = (-1)^m sqrt((2m+1)/2 * (2m-1)!!/(2m)!!) (1-x^2)^{m/2}, in log2 form
  double log2_mm = 0.5 * std::log2((2.0 * m + 1.0) / 2.0);
  for (int i = 1; i <= m; ++i) log2_mm += 0.5 * std::log2((2.0 * i - 1.0) / (2.0 * i));
  if (m > 0) {
    if (s2 == 0.0) return std::vector<double>(out.size(), 0.0);
    log2_mm += 0.5 * m * std::log2(s2);
  }
  long exp2 = static_cast<long>(std::floor(log2_mm));
  double prev = 0.0;
  double cur = ((m % 2) ? -1.0 : 1.0) * std::exp2(log2_mm - static_cast<double>(exp2));
  out[0] = detail::rescale(cur, exp2);
  for (int l = m + 1; l <= lmax; ++l) {
    // Lambda_l = a_l (x Lambda_{l-1} - Lambda_{l-2} / a_{l-1}), a_l = sqrt((4l^2-1)/(l^2-m^2))
    const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
    double next;
    if (l == m + 1) {
      next = a * x * cur;
    } else {
      const double lp = l - 1;
      const double a_prev = std::sqrt((4.0 * lp * lp - 1.0) / (lp * lp - static_cast<double>(m) * m));
      next = a * (x * cur - prev / a_prev);
    }
    prev = cur;
    cur = next;
    detail::renormalize(prev, cur, exp2);
    out[static_cast<std::size_t>(l - m)] = detail::rescale(cur, exp2);
  }
  return out;
}

inline double legendre_normalized(int l, int m, double x) {
  const int am = m < 0 ? -m : m;
  if (l < am) return 0.0;
  double v = legendre_column(am, l, x).back();
  if (m < 0 && (am % 2)) v = -v;  // Y_l^{-m} = (-1)^m conj(Y_l^m)
  return v;
}

/// Complex spherical harmonic Y_l^m(theta, phi).
inline std::complex<double> spherical_harmonic(int l, int m, double theta, double phi) {
  const double lam = legendre_normalized(l, m, std::cos(theta));
  return lam / std::sqrt(2.0 * std::numbers::pi) * std::exp(std::complex<double>(0.0, m * phi));
}

}  // namespace riesz::special
