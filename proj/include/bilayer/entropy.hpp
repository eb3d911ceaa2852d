#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilayer/grid.hpp"
#include "bilayer/quadrature.hpp"
#include "bilayer/types.hpp"

/**
 * Entropy diagnostics. The entropy of a height s is
 *   G_{eps,n}(s) = -int_s^A g_{eps,n}(r) dr,
 *   g_{eps,n}(s) = -int_s^A (|r|^n + eps)^{-1/2} dr,
 * a convex nonnegative function vanishing at s = A. Its integral over the
 * domain is bounded along regularized runs, which is what rules out height
 * excursions far below zero.
 */
namespace bilayer {

/** Parameters of the entropy functional. */
struct EntropyConfig {
  double A = 1.0;  ///< upper cap; must dominate sup |u|, sup |v| over the run
  int n_u = 3;     ///< entropy exponent for the lower layer, 2 or 3
  int n_v = 2;     ///< entropy exponent for the upper layer, 2 or 3
  double eps = 0.0;

  void validate() const {
    if (!(A > 0.0)) throw std::invalid_argument("entropy cap A must be > 0");
    if ((n_u != 2 && n_u != 3) || (n_v != 2 && n_v != 3))
      throw std::invalid_argument("entropy exponents must be 2 or 3");
    if (!(eps >= 0.0)) throw std::invalid_argument("entropy eps must be >= 0");
  }
};

/** Entropy exponents matched to the mobility law: (3,2) cubic, (2,2) quadratic. */
inline std::pair<int, int> entropy_exponents_for(const MobilityModel& model) {
  if (std::holds_alternative<NoSlip>(model)) return {3, 2};
  return {2, 2};
}

namespace detail {

inline double entropy_integrand(double r, int n, double eps) {
  const double a = std::abs(r);
  const double an = (n == 2) ? a * a : a * a * a;
  return 1.0 / std::sqrt(an + eps);
}

inline double entropy_closed_form(double s, int n, double A) {
  if (s < 0.0) return std::numeric_limits<double>::infinity();
  if (n == 2) {
    if (s == 0.0) return A;
    return A - s - s * std::log(A / s);
  }
  const double ra = std::sqrt(A);
  return 2.0 * (ra + s / ra - 2.0 * std::sqrt(s));
}

}  // namespace detail

/**
 * Pointwise entropy G_{eps,n}(s; A). For eps = 0 the closed forms are used
 * (with +infinity for s < 0, where the inner integral diverges); for eps > 0
 * the double integral is evaluated by nested adaptive quadrature to absolute
 * tolerance 1e-10.
 */
inline double entropy_value(double s, int n, double eps, double A) {
  if (!(A > 0.0)) throw std::invalid_argument("entropy_value: A must be > 0");
  if (n != 2 && n != 3)
    throw std::invalid_argument("entropy_value: n must be 2 or 3");
  if (!(eps >= 0.0)) throw std::invalid_argument("entropy_value: eps must be >= 0");
  if (eps == 0.0) return detail::entropy_closed_form(s, n, A);
  auto g = [&](double r) {
    return -adaptive_integrate(
        [&](double q) { return detail::entropy_integrand(q, n, eps); }, r, A,
        1e-12);
  };
  return -adaptive_integrate(g, s, A, 1e-10);
}

namespace detail {

/**
 * Antiderivatives F, H of the entropy integrand f(q) = (|q|^n + eps)^{-1/2}
 * and of its first moment q f(q), normalized so F(0) = H(0) = 0. f is even,
 * so F is odd and H is even and both only need [0, A]. For n = 2 they are
 * elementary (asinh and a square root); for n = 3 they are evaluated from a
 * piecewise Chebyshev expansion built once per (eps, A). Pieces double in
 * width away from the regularization scale eps^(1/3), which keeps the
 * integrand's complex branch points (the cube roots of -eps) well outside
 * each piece's Bernstein ellipse, so degree-32 coefficients already sit at
 * roundoff and the evaluation error is far below the 1e-12 the batch needs.
 */
class EntropyAntiderivatives {
 public:
  EntropyAntiderivatives(int n, double eps, double A) : n_(n), eps_(eps) {
    if (!(eps_ > 0.0))
      throw std::invalid_argument("EntropyAntiderivatives: eps must be > 0");
    if (n_ == 2) {
      sqrt_eps_ = std::sqrt(eps_);
      return;
    }
    edges_.push_back(0.0);
    double edge = std::min(std::cbrt(eps_), A);
    while (true) {
      edges_.push_back(edge);
      if (edge >= A) break;
      edge = std::min(2.0 * edge, A);
    }
    const std::size_t pieces = edges_.size() - 1;
    coef_f_.resize(pieces);
    coef_h_.resize(pieces);
    double acc_f = 0.0, acc_h = 0.0;
    for (std::size_t p = 0; p < pieces; ++p) {
      acc_f = build_piece(edges_[p], edges_[p + 1], 0, acc_f, coef_f_[p]);
      acc_h = build_piece(edges_[p], edges_[p + 1], 1, acc_h, coef_h_[p]);
    }
  }

  double F(double q) const {
    if (n_ == 2) return std::asinh(q / sqrt_eps_);
    return q < 0.0 ? -eval(coef_f_, -q) : eval(coef_f_, q);
  }

  double H(double q) const {
    if (n_ == 2) return std::sqrt(q * q + eps_) - sqrt_eps_;
    return eval(coef_h_, std::abs(q));
  }

 private:
  static constexpr int kN = 32;  ///< Chebyshev degree per piece
  using Coeffs = std::array<double, kN + 2>;

  /** Chebyshev antiderivative of f or q f on [a, b], pinned to left_value at
      a; returns the cumulative value at b. */
  double build_piece(double a, double b, int moment, double left_value,
                     Coeffs& out) const {
    static const std::array<double, (kN + 1) * (kN + 1)> cos_table = [] {
      std::array<double, (kN + 1) * (kN + 1)> t{};
      for (int j = 0; j <= kN; ++j)
        for (int k = 0; k <= kN; ++k)
          t[static_cast<std::size_t>(j * (kN + 1) + k)] =
              std::cos(M_PI * j * k / kN);
      return t;
    }();
    std::array<double, kN + 1> g{};
    for (int k = 0; k <= kN; ++k) {
      const double xi = cos_table[static_cast<std::size_t>(kN + 1 + k)];
      const double x = a + 0.5 * (b - a) * (1.0 + xi);
      const double f = entropy_integrand(x, 3, eps_);
      g[static_cast<std::size_t>(k)] = moment == 0 ? f : x * f;
    }
    // Interpolation coefficients d_j (DCT-I on the Lobatto samples).
    std::array<double, kN + 3> d{};
    for (int j = 0; j <= kN; ++j) {
      double acc = 0.5 * (g[0] + (j % 2 == 0 ? g[kN] : -g[kN]));
      for (int k = 1; k < kN; ++k)
        acc += g[static_cast<std::size_t>(k)] *
               cos_table[static_cast<std::size_t>(j * (kN + 1) + k)];
      d[static_cast<std::size_t>(j)] = 2.0 * acc / kN;
    }
    d[0] *= 0.5;
    d[kN] *= 0.5;
    // Termwise antiderivative in the Chebyshev basis, scaled to x.
    const double scale = 0.5 * (b - a);
    out.fill(0.0);
    out[1] = scale * (d[0] - 0.5 * d[2]);
    for (int j = 2; j <= kN + 1; ++j)
      out[static_cast<std::size_t>(j)] =
          scale * (d[static_cast<std::size_t>(j - 1)] -
                   d[static_cast<std::size_t>(j + 1)]) /
          (2.0 * j);
    double at_left = 0.0, at_right = 0.0;
    for (int j = 1; j <= kN + 1; ++j) {
      const double c = out[static_cast<std::size_t>(j)];
      at_left += j % 2 == 0 ? c : -c;
      at_right += c;
    }
    out[0] = left_value - at_left;
    return at_right + out[0];
  }

  double eval(const std::vector<Coeffs>& coef, double x) const {
    std::size_t p = static_cast<std::size_t>(
        std::upper_bound(edges_.begin(), edges_.end(), x) - edges_.begin());
    p = p == 0 ? 0 : p - 1;
    if (p >= coef.size()) p = coef.size() - 1;
    const double a = edges_[p], b = edges_[p + 1];
    const double xi = std::clamp(2.0 * (x - a) / (b - a) - 1.0, -1.0, 1.0);
    double b1 = 0.0, b2 = 0.0;
    for (int j = kN + 1; j >= 1; --j) {
      const double t = 2.0 * xi * b1 - b2 + coef[p][static_cast<std::size_t>(j)];
      b2 = b1;
      b1 = t;
    }
    return xi * b1 - b2 + coef[p][0];
  }

  int n_;
  double eps_;
  double sqrt_eps_ = 0.0;
  std::vector<double> edges_;
  std::vector<Coeffs> coef_f_, coef_h_;
};

/**
 * G_{eps,n} at many points in one sweep (eps > 0). Uses the reduction
 * G(s) = [H(A) - H(s)] - s [F(A) - F(s)] with F' = f and H' = r f(r), where
 * f is the entropy integrand: the antiderivatives are evaluated directly, so
 * the cost per point is a table lookup instead of an adaptive integral.
 */
inline std::vector<double> entropy_batch(const std::vector<double>& s, int n,
                                         double eps, double A) {
  const EntropyAntiderivatives anti(n, eps, A);
  const double FA = anti.F(A), HA = anti.H(A);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out[i] = (HA - anti.H(s[i])) - s[i] * (FA - anti.F(s[i]));
  return out;
}

inline void check_cap(const std::vector<double>& field, const char* name,
                      double A) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (std::abs(field[i]) > A)
      throw std::invalid_argument(
          "entropy cap A=" + std::to_string(A) + " violated by |" + name +
          "| at node " + std::to_string(i) + " (value " +
          std::to_string(field[i]) + ")");
}

}  // namespace detail

/**
 * Total entropy integral of G_{eps,n_u}(u) + G_{eps,n_v}(v) over the domain
 * by trapezoidal quadrature. Errors out, naming the offending node, if the
 * cap A does not dominate the current heights.
 */
inline double entropy_total(const FilmPair& state, const EntropyConfig& cfg,
                            const Grid& grid) {
  cfg.validate();
  require_size(state, grid.node_count(), "entropy_total");
  detail::check_cap(state.u, "u", cfg.A);
  detail::check_cap(state.v, "v", cfg.A);
  double acc = 0.0;
  if (cfg.eps == 0.0) {
    for (std::size_t i = 0; i < state.size(); ++i)
      acc += grid.weight(i) *
             (detail::entropy_closed_form(state.u[i], cfg.n_u, cfg.A) +
              detail::entropy_closed_form(state.v[i], cfg.n_v, cfg.A));
    return acc;
  }
  const std::vector<double> gu =
      detail::entropy_batch(state.u, cfg.n_u, cfg.eps, cfg.A);
  const std::vector<double> gv =
      detail::entropy_batch(state.v, cfg.n_v, cfg.eps, cfg.A);
  for (std::size_t i = 0; i < state.size(); ++i)
    acc += grid.weight(i) * (gu[i] + gv[i]);
  return acc;
}

}  // namespace bilayer
