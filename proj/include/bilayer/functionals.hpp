#pragma once

#include <vector>

#include "bilayer/grid.hpp"
#include "bilayer/model.hpp"
#include "bilayer/types.hpp"

/**
 * Pressures and the energy functional. With the operators from grid.hpp the
 * nodal pressures are exactly the (negative, half, weight-scaled) gradient of
 * the discrete energy, which is what makes the scheme dissipative.
 */
namespace bilayer {

/**
 * Layer pressures p1 = (sigma+1) L u + L v - Pi_1(u), p2 = L u + L v - Pi_2(v)
 * for a caller-supplied second-derivative operator L.
 */
template <typename LapOp>
PressurePair pressures(const FilmPair& state, const PhysicalParams& params,
                       const PotentialModel& pot, LapOp&& lap) {
  const std::vector<double> lu = lap(state.u);
  const std::vector<double> lv = lap(state.v);
  if (lu.size() != state.size() || lv.size() != state.size())
    throw std::invalid_argument("pressures: operator output size mismatch");
  PressurePair p;
  p.p1.resize(state.size());
  p.p2.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    p.p1[i] = (params.sigma + 1.0) * lu[i] + lv[i] -
              potential_force(pot, 1, state.u[i]);
    p.p2[i] = lu[i] + lv[i] - potential_force(pot, 2, state.v[i]);
  }
  return p;
}

/** Pressures with the grid's Neumann Laplacian. */
inline PressurePair pressures(const FilmPair& state,
                              const PhysicalParams& params,
                              const PotentialModel& pot, const Grid& grid) {
  return pressures(state, params, pot, [&grid](const std::vector<double>& f) {
    return laplacian_neumann(f, grid);
  });
}

/**
 * Energy functional: the face-quadrature gradient part
 * sum_f dx [ sigma gu_f^2 + (gu_f + gv_f)^2 ] plus, under a potential law,
 * the node-quadrature part integral of 2 U_1(u) + 2 U_2(v).
 */
inline double energy(const FilmPair& state, const PhysicalParams& params,
                     const PotentialModel& pot, const Grid& grid) {
  require_size(state, grid.node_count(), "energy");
  const FaceField gu = face_gradient(state.u, grid);
  const FaceField gv = face_gradient(state.v, grid);
  double grad_part = 0.0;
  for (std::size_t f = 0; f < gu.size(); ++f) {
    const double s = gu[f] + gv[f];
    grad_part += params.sigma * gu[f] * gu[f] + s * s;
  }
  grad_part *= grid.dx;
  if (!has_potential(pot)) return grad_part;
  double pot_part = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    pot_part += grid.weight(i) * (2.0 * potential_energy(pot, 1, state.u[i]) +
                                  2.0 * potential_energy(pot, 2, state.v[i]));
  return grad_part + pot_part;
}

}  // namespace bilayer
