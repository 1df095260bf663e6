#pragma once

// Gaussian quadrature rules used for matrix assembly, L^p norms and contours.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "riesz/error.hpp"
#include "riesz/special_functions.hpp"

namespace riesz::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight e^{-x^2}. `weights` holds w_i e^{x_i^2}, so that
/// sum_i weights[i] f(x_i) approximates int f dx for f = polynomial * e^{-x^2}.
inline Rule gauss_hermite_scaled(int n) {
  if (n < 1) throw Error(ErrorKind::OutOfDomain, "Gauss-Hermite needs n >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {  // Newton polish on h_n
      const auto h = special::hermite_functions(n, x);
      const double f = h[static_cast<std::size_t>(n)];
      const double df = std::sqrt(2.0 * n) * h[static_cast<std::size_t>(n - 1)] - x * f;
      if (df == 0.0) break;
      x -= f / df;
    }
    const auto h = special::hermite_functions(n - 1, x);
    double s = 0.0;
    for (double v : h) s += v * v;
    r.nodes[static_cast<std::size_t>(i)] = x;
    r.weights[static_cast<std::size_t>(i)] = 1.0 / s;
  }
  return r;
}

/// Gauss-Legendre rule on [-1, 1].
inline Rule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::OutOfDomain, "Gauss-Legendre needs n >= 1");
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      const double pn = n == 1 ? x : p1;
      dp = n * (x * pn - p0) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels of `order` points.
inline Rule composite_legendre(double a, double b, int panels, int order) {
  const Rule base = gauss_legendre(order);
  Rule r;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      r.nodes.push_back(lo + 0.5 * h * (base.nodes[i] + 1.0));
      r.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return r;
}

/// Adaptive composite Gauss-Legendre on [a, b]: doubles panels until two levels agree.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double rel_tol = 1e-12, int order = 20, int max_panels = 1 << 14) {
  auto eval = [&](int panels) {
    const Rule r = composite_legendre(a, b, panels, order);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
  };
  int panels = 4;
  double prev = eval(panels);
  while (panels < max_panels) {
    panels *= 2;
    const double cur = eval(panels);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
    prev = cur;
  }
  throw Error(ErrorKind::QuadratureFailure, "adaptive quadrature did not settle");
}

}  // namespace riesz::quad
