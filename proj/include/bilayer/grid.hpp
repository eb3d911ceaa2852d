#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "bilayer/model.hpp"
#include "bilayer/types.hpp"

/**
 * Uniform finite-difference grid on [0,1] with node-centered unknowns and
 * face-centered fluxes. The operators here are built so that the divergence
 * telescopes exactly (discrete mass conservation) and summation by parts
 * holds against the face gradient (discrete energy dissipation).
 */
namespace bilayer {

/** Uniform grid with n_cells+1 nodes on [0,1]. */
struct Grid {
  int n_cells = 0;
  double dx = 0.0;

  Grid() = default;
  explicit Grid(int n) : n_cells(n), dx(1.0 / n) {
    if (n < 2) throw std::invalid_argument("Grid: n_cells must be >= 2");
  }

  std::size_t node_count() const { return static_cast<std::size_t>(n_cells) + 1; }
  std::size_t face_count() const { return static_cast<std::size_t>(n_cells); }

  double node(std::size_t i) const { return static_cast<double>(i) * dx; }
  double face(std::size_t f) const { return (static_cast<double>(f) + 0.5) * dx; }

  /** Trapezoidal quadrature weight of node i (dx/2 at the two boundary nodes). */
  double weight(std::size_t i) const {
    return (i == 0 || i + 1 == node_count()) ? 0.5 * dx : dx;
  }
};

/** One value per interior face midpoint; boundary faces carry zero flux. */
struct FaceField {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t f) { return values[f]; }
  double operator[](std::size_t f) const { return values[f]; }
};

inline void require_size(const std::vector<double>& f, const Grid& grid,
                         const char* where) {
  if (f.size() != grid.node_count())
    throw std::invalid_argument(std::string(where) +
                                ": field length does not match grid");
}

/** Trapezoidal integral of a nodal field over [0,1]. */
inline double integrate(const std::vector<double>& f, const Grid& grid) {
  require_size(f, grid, "integrate");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += grid.weight(i) * f[i];
  return acc;
}

/**
 * Second difference with reflection ghosts (f_{-1} = f_1, f_{N+1} = f_{N-1}),
 * enforcing a zero first derivative at both boundaries.
 */
inline std::vector<double> laplacian_neumann(const std::vector<double>& f,
                                             const Grid& grid) {
  require_size(f, grid, "laplacian_neumann");
  const std::size_t n = f.size();
  const double inv = 1.0 / (grid.dx * grid.dx);
  std::vector<double> out(n);
  out[0] = 2.0 * (f[1] - f[0]) * inv;
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv;
  out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * inv;
  return out;
}

/** Centered difference (f_{i+1} - f_i)/dx at each interior face. */
inline FaceField face_gradient(const std::vector<double>& f, const Grid& grid) {
  require_size(f, grid, "face_gradient");
  FaceField g;
  g.values.resize(grid.face_count());
  const double inv = 1.0 / grid.dx;
  for (std::size_t f_idx = 0; f_idx < g.size(); ++f_idx)
    g[f_idx] = (f[f_idx + 1] - f[f_idx]) * inv;
  return g;
}

/**
 * Conservative divergence (J_{i+1/2} - J_{i-1/2}) / w_i with zero flux at the
 * boundary faces, where w_i is the trapezoidal weight. The weighted sum of
 * the output telescopes to zero for any flux.
 */
inline std::vector<double> divergence_zero_flux(const FaceField& flux,
                                                const Grid& grid) {
  if (flux.size() != grid.face_count())
    throw std::invalid_argument(
        "divergence_zero_flux: flux length does not match grid faces");
  const std::size_t n = grid.node_count();
  std::vector<double> out(n);
  out[0] = flux[0] / grid.weight(0);
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (flux[i] - flux[i - 1]) / grid.weight(i);
  out[n - 1] = -flux[n - 2] / grid.weight(n - 1);
  return out;
}

/** How heights are combined across a face before the matrix evaluation. */
enum class FaceAveraging { ArithmeticMean, HarmonicMean };

namespace detail {

/** Coefficient of node k in the reflection-ghost Laplacian row of node j. */
inline double lap_coef(const Grid& grid, std::ptrdiff_t j, std::ptrdiff_t k) {
  const std::ptrdiff_t last = grid.n_cells;
  if (j < 0 || k < 0 || j > last || k > last) return 0.0;
  const double inv = 1.0 / (grid.dx * grid.dx);
  if (j == 0) return (k == 0) ? -2.0 * inv : (k == 1 ? 2.0 * inv : 0.0);
  if (j == last)
    return (k == last) ? -2.0 * inv : (k == last - 1 ? 2.0 * inv : 0.0);
  if (k == j) return -2.0 * inv;
  if (k == j - 1 || k == j + 1) return inv;
  return 0.0;
}

inline double face_average(double a, double b, FaceAveraging avg) {
  if (avg == FaceAveraging::ArithmeticMean) return 0.5 * (a + b);
  const double pa = std::abs(a), pb = std::abs(b);
  return (pa + pb > 0.0) ? 2.0 * pa * pb / (pa + pb) : 0.0;
}

}  // namespace detail

/**
 * Mobility matrix per face: heights averaged across the face first, then the
 * matrix law applied and eps added to the diagonals.
 */
inline std::vector<SymMatrix2> face_mobility(
    const FilmPair& state, const MobilityModel& model,
    const PhysicalParams& params, double eps, const Grid& grid,
    FaceAveraging avg = FaceAveraging::ArithmeticMean) {
  require_size(state, grid.node_count(), "face_mobility");
  std::vector<SymMatrix2> out(grid.face_count());
  for (std::size_t f = 0; f < out.size(); ++f) {
    const double uf = detail::face_average(state.u[f], state.u[f + 1], avg);
    const double vf = detail::face_average(state.v[f], state.v[f + 1], avg);
    out[f] = mobility_eval(model, params, uf, vf, eps);
  }
  return out;
}

/** Masses of the two layers (trapezoidal integrals of u and v). */
inline std::pair<double, double> masses(const FilmPair& state, const Grid& grid) {
  return {integrate(state.u, grid), integrate(state.v, grid)};
}

}  // namespace bilayer
