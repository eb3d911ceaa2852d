#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

/**
 * Gauss-Legendre quadrature with adaptive panel bisection. Used by the
 * entropy diagnostics, where integrands are smooth except for a possible
 * |r|-type kink at the origin.
 */
namespace bilayer {

/** Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]. */
inline const std::pair<std::vector<double>, std::vector<double>>&
gauss_legendre_rule(int n) {
  static std::vector<std::pair<std::vector<double>, std::vector<double>>> cache(
      64);
  if (n < 1 || n >= static_cast<int>(cache.size()))
    throw std::invalid_argument("gauss_legendre_rule: order out of range");
  auto& entry = cache[static_cast<std::size_t>(n)];
  if (!entry.first.empty()) return entry;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-based initial guess.
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      const double dx = p1 / dp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
  entry = {std::move(x), std::move(w)};
  return entry;
}

namespace detail {

template <typename F>
double gl_panel(F&& f, double a, double b, int order) {
  const auto& [x, w] = gauss_legendre_rule(order);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += w[i] * f(mid + half * x[i]);
  return half * acc;
}

template <typename F>
double adaptive_panel(F&& f, double a, double b, double tol, int depth) {
  const double coarse = gl_panel(f, a, b, 7);
  const double fine = gl_panel(f, a, b, 15);
  if (std::abs(fine - coarse) <= tol || depth >= 40) return fine;
  const double mid = 0.5 * (a + b);
  return adaptive_panel(f, a, mid, 0.5 * tol, depth + 1) +
         adaptive_panel(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/**
 * Integral of f over [a, b] to absolute tolerance tol, by 7/15-point
 * Gauss-Legendre comparison with recursive bisection. Handles a > b with the
 * usual sign convention.
 */
template <typename F>
double adaptive_integrate(F&& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("adaptive_integrate: tol must be > 0");
  if (a == b) return 0.0;
  if (a > b) return -adaptive_integrate(f, b, a, tol);
  // Split at the origin so an |r|-kink never sits inside a panel.
  if (a < 0.0 && b > 0.0)
    return detail::adaptive_panel(f, a, 0.0, 0.5 * tol, 0) +
           detail::adaptive_panel(f, 0.0, b, 0.5 * tol, 0);
  return detail::adaptive_panel(f, a, b, tol, 0);
}

}  // namespace bilayer
