#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bilayer/banded.hpp"
#include "bilayer/grid.hpp"

/**
 * Reference solver for the scalar thin-film equation
 *   h_t = -div[(m(h) + eps) d((sigma+1) h_xx)],
 * the equation the lower layer of the coupled system obeys when the upper
 * layer is identically zero. Written as its own compact backward-Euler
 * Newton loop (fixed step size, scalar pentadiagonal Jacobian) so it can
 * serve as an independent check on the coupled stepper.
 */
namespace bilayer {

/** Mobility law of the scalar film: |h|^3/(3 mu) or |h|^2/mu. */
enum class SingleLayerLaw { Cubic, Quadratic };

struct SingleLayerProblem {
  SingleLayerLaw law = SingleLayerLaw::Cubic;
  double mu = 1.0;
  double sigma = 1.0;
  double eps = 0.0;
  Grid grid;
};

namespace detail {

inline double sl_mobility(SingleLayerLaw law, double mu, double h) {
  const double a = std::abs(h);
  return (law == SingleLayerLaw::Cubic) ? a * a * a / (3.0 * mu) : a * a / mu;
}

inline double sl_mobility_deriv(SingleLayerLaw law, double mu, double h) {
  const double a = std::abs(h);
  const double s = (h > 0.0) ? 1.0 : (h < 0.0 ? -1.0 : 0.0);
  return s * ((law == SingleLayerLaw::Cubic) ? a * a / mu : 2.0 * a / mu);
}

inline std::vector<double> sl_residual(const SingleLayerProblem& sp,
                                       const std::vector<double>& h,
                                       const std::vector<double>& h_old,
                                       double dt) {
  const Grid& grid = sp.grid;
  const double fac = sp.sigma + 1.0;
  std::vector<double> p = laplacian_neumann(h, grid);
  for (double& x : p) x *= fac;
  const FaceField dp = face_gradient(p, grid);
  FaceField flux;
  flux.values.resize(grid.face_count());
  for (std::size_t f = 0; f < grid.face_count(); ++f) {
    const double hf = 0.5 * (h[f] + h[f + 1]);
    flux[f] = (sl_mobility(sp.law, sp.mu, hf) + sp.eps) * dp[f];
  }
  std::vector<double> r = divergence_zero_flux(flux, grid);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] += (h[i] - h_old[i]) / dt;
  return r;
}

}  // namespace detail

/**
 * Advances h0 to t_end with fixed step dt (t_end must be an integer number
 * of steps) and returns the final profile.
 */
inline std::vector<double> single_layer_run(const SingleLayerProblem& sp,
                                            std::vector<double> h,
                                            double t_end, double dt,
                                            double newton_tol = 1e-8,
                                            int newton_max_iter = 30) {
  require_size(h, sp.grid, "single_layer_run");
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("single_layer_run: dt and t_end must be > 0");
  const double steps_real = t_end / dt;
  const long steps = std::lround(steps_real);
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9)
    throw std::invalid_argument(
        "single_layer_run: t_end must be an integer multiple of dt");

  const Grid& grid = sp.grid;
  const int nn = static_cast<int>(grid.node_count());
  const double fac = sp.sigma + 1.0;
  const double inv_dx = 1.0 / grid.dx;
  for (long s = 0; s < steps; ++s) {
    const std::vector<double> h_old = h;
    bool converged = false;
    // As in the coupled solver: once newton_tol is met, polish while each
    // iteration still shrinks the residual by 4x, and keep the best iterate.
    std::vector<double> best = h;
    double best_norm = std::numeric_limits<double>::infinity();
    double prev_norm = best_norm;
    for (int it = 0; it < newton_max_iter; ++it) {
      const std::vector<double> r = detail::sl_residual(sp, h, h_old, dt);
      double rnorm = 0.0;
      for (double x : r) rnorm = std::max(rnorm, std::abs(x));
      if (rnorm < best_norm) {
        best = h;
        best_norm = rnorm;
      }
      if (best_norm <= newton_tol) {
        converged = true;
        if (rnorm <= 1e-3 * newton_tol || !(rnorm < 0.25 * prev_norm)) break;
      }
      prev_norm = rnorm;
      // Pentadiagonal Newton matrix: flux at face f reaches nodes f-1..f+2.
      BandedMatrix jac(nn, 2, 2);
      for (int i = 0; i < nn; ++i) jac.at(i, i) = 1.0 / dt;
      std::vector<double> p = laplacian_neumann(h, grid);
      for (double& x : p) x *= fac;
      const FaceField dp = face_gradient(p, grid);
      for (int f = 0; f < static_cast<int>(grid.face_count()); ++f) {
        const double hf = 0.5 * (h[f] + h[f + 1]);
        const double mob = detail::sl_mobility(sp.law, sp.mu, hf) + sp.eps;
        const double dmob = 0.5 * detail::sl_mobility_deriv(sp.law, sp.mu, hf);
        const double scale[2] = {1.0 / grid.weight(f),
                                 -1.0 / grid.weight(f + 1)};
        for (int k = f - 1; k <= f + 2; ++k) {
          if (k < 0 || k >= nn) continue;
          double dflux = mob * fac * inv_dx *
                         (detail::lap_coef(grid, f + 1, k) -
                          detail::lap_coef(grid, f, k));
          if (k == f || k == f + 1) dflux += dmob * dp[f];
          for (int node = 0; node < 2; ++node)
            jac.at(f + node, k) += scale[node] * dflux;
        }
      }
      std::vector<double> rhs(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
      const std::vector<double> delta = solve(std::move(jac), std::move(rhs));
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += delta[i];
    }
    if (!converged)
      throw std::runtime_error("single_layer_run: Newton did not converge");
    h = std::move(best);
  }
  return h;
}

}  // namespace bilayer
