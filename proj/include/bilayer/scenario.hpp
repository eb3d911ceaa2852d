#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bilayer/grid.hpp"
#include "bilayer/model.hpp"
#include "bilayer/stepper.hpp"
#include "bilayer/types.hpp"

/**
 * Initial-condition library and named experiment scenarios. All profiles are
 * nonnegative with zero slope at the boundaries, as the model requires.
 */
namespace bilayer {

/** Flat layers. */
struct ConstantIC {
  double cu = 1.0;
  double cv = 1.0;
};

/** base + amp cos(k pi x) per layer; zero-slope at both ends for integer k. */
struct CosinePerturbedIC {
  double base_u = 1.0;
  double base_v = 1.0;
  double amp_u = 0.1;
  double amp_v = 0.1;
  int mode_k = 1;
};

/**
 * Heights that descend C1-smoothly from a plateau at each wall to exactly
 * zero on the interior interval [zero_from, zero_to] (piecewise-quadratic
 * cap, continuous first derivative, zero slope at walls and at touchdown).
 */
struct TouchingZeroIC {
  double height_u = 1.0;
  double height_v = 1.0;
  double zero_from = 0.35;
  double zero_to = 0.65;
};

using ICDescriptor = std::variant<ConstantIC, CosinePerturbedIC, TouchingZeroIC>;

namespace detail {

/** C1 descent from 1 at xi=0 to 0 at xi=1 with zero slope at both ends. */
inline double quadratic_cap(double xi) {
  if (xi <= 0.0) return 1.0;
  if (xi >= 1.0) return 0.0;
  if (xi <= 0.5) return 1.0 - 2.0 * xi * xi;
  return 2.0 * (1.0 - xi) * (1.0 - xi);
}

inline double touching_profile(double x, double height, double zero_from,
                               double zero_to) {
  if (x < zero_from) return height * quadratic_cap(x / zero_from);
  if (x > zero_to)
    return height * quadratic_cap((1.0 - x) / (1.0 - zero_to));
  return 0.0;
}

}  // namespace detail

inline void validate(const ICDescriptor& ic) {
  if (const auto* c = std::get_if<ConstantIC>(&ic)) {
    if (c->cu < 0.0 || c->cv < 0.0)
      throw std::invalid_argument("constant initial heights must be >= 0");
  } else if (const auto* cp = std::get_if<CosinePerturbedIC>(&ic)) {
    if (cp->base_u < std::abs(cp->amp_u) || cp->base_v < std::abs(cp->amp_v))
      throw std::invalid_argument(
          "cosine perturbation amplitude may not exceed the base height");
    if (cp->mode_k < 1)
      throw std::invalid_argument("cosine mode must be a positive integer");
  } else {
    const auto& tz = std::get<TouchingZeroIC>(ic);
    if (tz.height_u < 0.0 || tz.height_v < 0.0)
      throw std::invalid_argument("touching-zero heights must be >= 0");
    if (!(0.0 < tz.zero_from && tz.zero_from < tz.zero_to && tz.zero_to < 1.0))
      throw std::invalid_argument(
          "touching-zero interval must satisfy 0 < zero_from < zero_to < 1");
  }
}

/** Samples the descriptor on the grid nodes. */
inline FilmPair realize(const ICDescriptor& ic, const Grid& grid) {
  validate(ic);
  const std::size_t nn = grid.node_count();
  FilmPair state{std::vector<double>(nn), std::vector<double>(nn)};
  for (std::size_t i = 0; i < nn; ++i) {
    const double x = grid.node(i);
    if (const auto* c = std::get_if<ConstantIC>(&ic)) {
      state.u[i] = c->cu;
      state.v[i] = c->cv;
    } else if (const auto* cp = std::get_if<CosinePerturbedIC>(&ic)) {
      const double w = std::cos(cp->mode_k * M_PI * x);
      state.u[i] = cp->base_u + cp->amp_u * w;
      state.v[i] = cp->base_v + cp->amp_v * w;
    } else {
      const auto& tz = std::get<TouchingZeroIC>(ic);
      state.u[i] = detail::touching_profile(x, tz.height_u, tz.zero_from,
                                            tz.zero_to);
      state.v[i] = detail::touching_profile(x, tz.height_v, tz.zero_from,
                                            tz.zero_to);
    }
  }
  return state;
}

/** A complete, reproducible experiment definition. */
struct Scenario {
  std::string name;
  ICDescriptor ic;
  MobilityModel model;
  PhysicalParams params;
  PotentialModel pot;
  double t_end = 1.0;
  SolverConfig solver;
  Grid grid;
  FaceAveraging averaging = FaceAveraging::ArithmeticMean;

  Problem problem() const { return {model, params, pot, grid, averaging}; }
  FilmPair initial() const { return realize(ic, grid); }

  void validate() const {
    params.validate();
    bilayer::validate(model);
    bilayer::validate(pot);
    bilayer::validate(ic);
    solver.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  }

  /** Copy with a different resolution (used by refinement and acceptance). */
  Scenario with_grid(int n_cells) const {
    Scenario s = *this;
    s.grid = Grid(n_cells);
    return s;
  }
};

/**
 * The built-in experiments. Each is deterministic given its definition:
 *  - steady: constant layers, nothing may move.
 *  - relaxation: smooth positive cosine data relaxing to flat (force-free).
 *  - dewetting: van-der-Waals-unstable films rupturing toward the Born
 *    precursor height (gamma = 1e-5 puts the base heights in the spinodal
 *    range of the unit domain).
 *  - positivity: Born-dominated stable films, certifies the height barrier.
 *  - touching_zero_noslip / _navierslip: compactly supported degenerate data.
 *  - single_layer: v = 0, for comparison against the scalar reference solver.
 */
inline std::vector<Scenario> named_scenarios() {
  std::vector<Scenario> all;

  Scenario steady;
  steady.name = "steady";
  steady.ic = ConstantIC{1.0, 0.5};
  steady.model = NoSlip{};
  steady.params = {1.0, 1.0};
  steady.pot = ForceFree{};
  steady.t_end = 0.01;
  steady.grid = Grid(64);
  steady.solver.epsilon = 1e-6;
  steady.solver.dt_init = 1e-4;
  steady.solver.dt_max = 1e-3;
  steady.solver.newton_tol = 1e-8;
  all.push_back(steady);

  Scenario relax;
  relax.name = "relaxation";
  relax.ic = CosinePerturbedIC{1.0, 1.0, 0.1, 0.05, 1};
  relax.model = NoSlip{};
  relax.params = {1.0, 1.0};
  relax.pot = ForceFree{};
  relax.t_end = 0.5;
  relax.grid = Grid(128);
  relax.solver.epsilon = 1e-6;
  relax.solver.dt_init = 1e-6;
  relax.solver.dt_max = 1e-3;
  relax.solver.newton_tol = 1e-4;
  all.push_back(relax);

  Scenario dewet;
  dewet.name = "dewetting";
  dewet.ic = CosinePerturbedIC{0.4, 0.45, 0.05, 0.04, 1};
  dewet.model = NoSlip{};
  dewet.params = {1.0, 1.0};
  dewet.pot = BornVdW{3.0, 12.0, 1e-5, 1e-5, 1e-4};
  dewet.t_end = 1.0;
  dewet.grid = Grid(128);
  dewet.solver.epsilon = 1e-6;
  dewet.solver.dt_init = 1e-6;
  dewet.solver.dt_max = 1e-3;
  dewet.solver.newton_tol = 1e-4;
  all.push_back(dewet);

  Scenario posit;
  posit.name = "positivity";
  posit.ic = CosinePerturbedIC{0.5, 0.5, 0.2, 0.15, 1};
  posit.model = NoSlip{};
  posit.params = {1.0, 1.0};
  posit.pot = BornVdW{3.0, 12.0, 0.1, 0.1, 1e-4};
  posit.t_end = 1.0;
  posit.grid = Grid(128);
  posit.solver.epsilon = 1e-6;
  posit.solver.dt_init = 1e-6;
  posit.solver.dt_max = 1e-3;
  posit.solver.newton_tol = 1e-4;
  all.push_back(posit);

  Scenario tz;
  tz.name = "touching_zero_noslip";
  tz.ic = TouchingZeroIC{1.0, 1.0, 0.35, 0.65};
  tz.model = NoSlip{};
  tz.params = {1.0, 1.0};
  tz.pot = ForceFree{};
  tz.t_end = 0.1;
  tz.grid = Grid(256);
  tz.solver.epsilon = 1e-6;
  tz.solver.dt_init = 1e-8;
  tz.solver.dt_max = 1e-3;
  tz.solver.newton_tol = 3e-5;
  all.push_back(tz);

  Scenario tzn = tz;
  tzn.name = "touching_zero_navierslip";
  tzn.model = NavierSlip{0.5};
  all.push_back(tzn);

  Scenario single;
  single.name = "single_layer";
  single.ic = CosinePerturbedIC{1.0, 0.0, 0.1, 0.0, 1};
  single.model = NoSlip{};
  single.params = {1.0, 1.0};
  single.pot = ForceFree{};
  single.t_end = 0.2;
  single.grid = Grid(128);
  single.solver.epsilon = 1e-8;
  single.solver.dt_init = 1e-4;
  single.solver.dt_max = 1e-4;
  single.solver.newton_tol = 2e-5;
  all.push_back(single);

  return all;
}

/** Looks a named scenario up; throws std::invalid_argument if absent. */
inline Scenario find_scenario(const std::string& name) {
  for (Scenario& s : named_scenarios())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace bilayer
