#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "bilayer/banded.hpp"
#include "bilayer/functionals.hpp"
#include "bilayer/grid.hpp"
#include "bilayer/model.hpp"
#include "bilayer/types.hpp"

/**
 * Implicit time integration of the regularized two-layer system
 *   u_t = -div[(M11+eps) dp1 + M12 dp2],
 *   v_t = -div[M21 dp1 + (M22+eps) dp2]
 * by backward Euler with Newton iteration, adaptive step halving, an energy
 * guard, and a conservative flux-form update that keeps both masses exact.
 */
namespace bilayer {

/** Everything that defines the spatially discrete system. */
struct Problem {
  MobilityModel model;
  PhysicalParams params;
  PotentialModel pot;
  Grid grid;
  FaceAveraging averaging = FaceAveraging::ArithmeticMean;
};

enum class Scheme { FullyImplicit, SemiImplicit };

/** Time-stepping controls. */
struct SolverConfig {
  double epsilon = 1e-6;  ///< regularization added to the mobility diagonals
  double dt_init = 1e-6;
  double dt_min = 1e-12;
  double dt_max = 1e-3;
  double newton_tol = 1e-6;  ///< max-norm residual target
  int newton_max_iter = 12;
  Scheme scheme = Scheme::FullyImplicit;
  bool energy_guard = true;  ///< reject steps that raise the energy

  void validate() const {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
    if (!(dt_min > 0.0) || !(dt_init > 0.0) || !(dt_max > 0.0))
      throw std::invalid_argument("time steps must be > 0");
    if (!(dt_min <= dt_init && dt_init <= dt_max))
      throw std::invalid_argument("need dt_min <= dt_init <= dt_max");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be > 0");
    if (newton_max_iter < 1)
      throw std::invalid_argument("newton_max_iter must be >= 1");
  }
};

enum class RejectReason { NewtonDiverged, EnergyIncreased, DtUnderflow };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::NewtonDiverged: return "newton_diverged";
    case RejectReason::EnergyIncreased: return "energy_increased";
    default: return "dt_underflow";
  }
}

/** Outcome of one attempted time step. */
struct StepResult {
  FilmPair state;
  double dt_used = 0.0;
  int newton_iters = 0;
  bool accepted = false;
  std::optional<RejectReason> reject_reason;
  double residual_norm = std::numeric_limits<double>::infinity();
  int attempts = 0;  ///< step-size attempts, 1 when no halving occurred
};

/** Nodal residual of the backward-Euler system, one array per layer. */
struct ResidualPair {
  std::vector<double> ru, rv;

  double max_norm() const {
    double m = 0.0;
    for (double x : ru) m = std::max(m, std::abs(x));
    for (double x : rv) m = std::max(m, std::abs(x));
    return m;
  }

  bool finite() const {
    for (double x : ru) if (!std::isfinite(x)) return false;
    for (double x : rv) if (!std::isfinite(x)) return false;
    return true;
  }
};

namespace detail {

/** d(face average)/d(left height), d/d(right height). */
inline std::pair<double, double> face_average_partials(double a, double b,
                                                       FaceAveraging avg) {
  if (avg == FaceAveraging::ArithmeticMean) return {0.5, 0.5};
  const double pa = std::abs(a), pb = std::abs(b);
  if (pa + pb == 0.0) return {0.0, 0.0};
  const double den = (pa + pb) * (pa + pb);
  const double sa = (a > 0.0) ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  const double sb = (b > 0.0) ? 1.0 : (b < 0.0 ? -1.0 : 0.0);
  return {sa * 2.0 * pb * pb / den, sb * 2.0 * pa * pa / den};
}

/**
 * Face fluxes of both layers. Pressure Laplacian terms use `state`; the
 * mobility matrix and the potential forces use `frozen` (equal to `state`
 * for the fully implicit scheme, the previous state for the semi-implicit
 * one).
 */
inline std::pair<FaceField, FaceField> fluxes(const FilmPair& state,
                                              const FilmPair& frozen,
                                              const SolverConfig& cfg,
                                              const Problem& prob) {
  const Grid& grid = prob.grid;
  const std::vector<double> lu = laplacian_neumann(state.u, grid);
  const std::vector<double> lv = laplacian_neumann(state.v, grid);
  std::vector<double> p1(lu.size()), p2(lu.size());
  for (std::size_t i = 0; i < lu.size(); ++i) {
    p1[i] = (prob.params.sigma + 1.0) * lu[i] + lv[i] -
            potential_force(prob.pot, 1, frozen.u[i]);
    p2[i] = lu[i] + lv[i] - potential_force(prob.pot, 2, frozen.v[i]);
  }
  const FaceField dp1 = face_gradient(p1, grid);
  const FaceField dp2 = face_gradient(p2, grid);
  const std::vector<SymMatrix2> mob =
      face_mobility(frozen, prob.model, prob.params, cfg.epsilon, grid,
                    prob.averaging);
  FaceField j1, j2;
  j1.values.resize(grid.face_count());
  j2.values.resize(grid.face_count());
  for (std::size_t f = 0; f < grid.face_count(); ++f) {
    j1[f] = mob[f].m11 * dp1[f] + mob[f].m12 * dp2[f];
    j2[f] = mob[f].m12 * dp1[f] + mob[f].m22 * dp2[f];
  }
  return {std::move(j1), std::move(j2)};
}

inline ResidualPair residual_frozen(const FilmPair& state_new,
                                    const FilmPair& state_old,
                                    const FilmPair& frozen, double dt,
                                    const SolverConfig& cfg,
                                    const Problem& prob) {
  const Grid& grid = prob.grid;
  const auto [j1, j2] = fluxes(state_new, frozen, cfg, prob);
  const std::vector<double> div1 = divergence_zero_flux(j1, grid);
  const std::vector<double> div2 = divergence_zero_flux(j2, grid);
  ResidualPair r;
  r.ru.resize(grid.node_count());
  r.rv.resize(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    r.ru[i] = (state_new.u[i] - state_old.u[i]) / dt + div1[i];
    r.rv[i] = (state_new.v[i] - state_old.v[i]) / dt + div2[i];
  }
  return r;
}

/**
 * Banded Newton matrix d residual / d state_new with unknowns interleaved as
 * (u_0, v_0, u_1, v_1, ...). The flux stencil couples node pairs up to two
 * nodes apart, giving bandwidth 5 in the interleaved numbering. With
 * `nonlinear` false the mobility and potential contributions are frozen,
 * which is exactly the semi-implicit system matrix.
 */
inline BandedMatrix jacobian_frozen(const FilmPair& state,
                                    const FilmPair& frozen, double dt,
                                    const SolverConfig& cfg,
                                    const Problem& prob, bool nonlinear) {
  const Grid& grid = prob.grid;
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(grid.node_count());
  BandedMatrix jac(static_cast<int>(2 * nn), 5, 5);
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    jac.at(static_cast<int>(2 * i), static_cast<int>(2 * i)) = 1.0 / dt;
    jac.at(static_cast<int>(2 * i + 1), static_cast<int>(2 * i + 1)) = 1.0 / dt;
  }

  // Pressure values/gradients at the evaluation state, mobilities at frozen.
  const std::vector<double> lu = laplacian_neumann(state.u, grid);
  const std::vector<double> lv = laplacian_neumann(state.v, grid);
  std::vector<double> p1(lu.size()), p2(lu.size());
  for (std::size_t i = 0; i < lu.size(); ++i) {
    p1[i] = (prob.params.sigma + 1.0) * lu[i] + lv[i] -
            potential_force(prob.pot, 1, frozen.u[i]);
    p2[i] = lu[i] + lv[i] - potential_force(prob.pot, 2, frozen.v[i]);
  }
  const FaceField dp1 = face_gradient(p1, grid);
  const FaceField dp2 = face_gradient(p2, grid);
  const std::vector<SymMatrix2> mob =
      face_mobility(frozen, prob.model, prob.params, cfg.epsilon, grid,
                    prob.averaging);
  const double sig1 = prob.params.sigma + 1.0;
  const double inv_dx = 1.0 / grid.dx;

  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(grid.face_count());
       ++f) {
    // Mobility sensitivity to the two adjacent nodes (fully implicit only).
    SymMatrix2 dm_du[2], dm_dv[2];
    if (nonlinear) {
      const double uf = face_average(state.u[f], state.u[f + 1], prob.averaging);
      const double vf = face_average(state.v[f], state.v[f + 1], prob.averaging);
      const MobilityDerivs md = mobility_derivs(prob.model, prob.params, uf, vf);
      const auto [au_l, au_r] =
          face_average_partials(state.u[f], state.u[f + 1], prob.averaging);
      const auto [av_l, av_r] =
          face_average_partials(state.v[f], state.v[f + 1], prob.averaging);
      dm_du[0] = md.du * au_l;
      dm_du[1] = md.du * au_r;
      dm_dv[0] = md.dv * av_l;
      dm_dv[1] = md.dv * av_r;
    }

    const double row_scale[2] = {1.0 / grid.weight(static_cast<std::size_t>(f)),
                                 -1.0 /
                                     grid.weight(static_cast<std::size_t>(f) + 1)};
    // Flux f enters the divergence of node f with +, of node f+1 with -.
    for (std::ptrdiff_t k = f - 1; k <= f + 2; ++k) {
      if (k < 0 || k >= nn) continue;
      // d p at nodes f, f+1 w.r.t. heights at node k.
      const double dl_f = lap_coef(grid, f, k);
      const double dl_f1 = lap_coef(grid, f + 1, k);
      double dpi1_du = sig1 * (dl_f1 - dl_f) * inv_dx;
      double dpi1_dv = (dl_f1 - dl_f) * inv_dx;
      double dpi2_du = (dl_f1 - dl_f) * inv_dx;
      double dpi2_dv = (dl_f1 - dl_f) * inv_dx;
      if (nonlinear) {
        if (k == f) {
          dpi1_du += potential_force_deriv(prob.pot, 1, state.u[k]) * inv_dx;
          dpi2_dv += potential_force_deriv(prob.pot, 2, state.v[k]) * inv_dx;
        } else if (k == f + 1) {
          dpi1_du -= potential_force_deriv(prob.pot, 1, state.u[k]) * inv_dx;
          dpi2_dv -= potential_force_deriv(prob.pot, 2, state.v[k]) * inv_dx;
        }
      }
      // d flux / d (u_k, v_k) through the pressure gradients.
      double dj1_du = mob[f].m11 * dpi1_du + mob[f].m12 * dpi2_du;
      double dj1_dv = mob[f].m11 * dpi1_dv + mob[f].m12 * dpi2_dv;
      double dj2_du = mob[f].m12 * dpi1_du + mob[f].m22 * dpi2_du;
      double dj2_dv = mob[f].m12 * dpi1_dv + mob[f].m22 * dpi2_dv;
      // ... and through the mobility itself (adjacent nodes only).
      if (nonlinear && (k == f || k == f + 1)) {
        const int side = static_cast<int>(k - f);
        dj1_du += dm_du[side].m11 * dp1[f] + dm_du[side].m12 * dp2[f];
        dj1_dv += dm_dv[side].m11 * dp1[f] + dm_dv[side].m12 * dp2[f];
        dj2_du += dm_du[side].m12 * dp1[f] + dm_du[side].m22 * dp2[f];
        dj2_dv += dm_dv[side].m12 * dp1[f] + dm_dv[side].m22 * dp2[f];
      }
      for (int node = 0; node < 2; ++node) {
        const int row_u = static_cast<int>(2 * (f + node));
        const int col_u = static_cast<int>(2 * k);
        jac.at(row_u, col_u) += row_scale[node] * dj1_du;
        jac.at(row_u, col_u + 1) += row_scale[node] * dj1_dv;
        jac.at(row_u + 1, col_u) += row_scale[node] * dj2_du;
        jac.at(row_u + 1, col_u + 1) += row_scale[node] * dj2_dv;
      }
    }
  }
  return jac;
}

}  // namespace detail

/**
 * Backward-Euler residual with mobilities, potentials, and pressures
 * evaluated at state_new (fully implicit form).
 */
inline ResidualPair residual(const FilmPair& state_new,
                             const FilmPair& state_old, double dt,
                             const SolverConfig& cfg, const Problem& prob) {
  require_size(state_new, prob.grid.node_count(), "residual");
  require_size(state_old, prob.grid.node_count(), "residual");
  if (!(dt > 0.0)) throw std::invalid_argument("residual: dt must be > 0");
  return detail::residual_frozen(state_new, state_old, state_new, dt, cfg, prob);
}

/** Newton matrix of the fully implicit residual at state_new. */
inline BandedMatrix jacobian(const FilmPair& state_new,
                             const FilmPair& /*state_old*/, double dt,
                             const SolverConfig& cfg, const Problem& prob) {
  require_size(state_new, prob.grid.node_count(), "jacobian");
  if (!(dt > 0.0)) throw std::invalid_argument("jacobian: dt must be > 0");
  return detail::jacobian_frozen(state_new, state_new, dt, cfg, prob, true);
}

namespace detail {

struct NewtonOutcome {
  bool converged = false;
  FilmPair z;
  int iters = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
};

/**
 * Newton (or one linear solve for SemiImplicit) for a fixed dt attempt.
 *
 * Convergence requires the max-norm residual to reach newton_tol, but for
 * the fully implicit scheme the iteration then keeps polishing while each
 * step still shrinks the residual by at least 4x, and the best iterate seen
 * is returned. The extra iterations cost one linear solve each and push the
 * state to the evaluation-roundoff floor of the residual, so the accuracy of
 * accepted steps does not degrade when newton_tol is set loosely (it must
 * sit above that floor, which grows like n_cells^4, or no iterate can ever
 * satisfy it).
 */
inline NewtonOutcome newton_solve(const FilmPair& state_old, double dt,
                                  const SolverConfig& cfg, const Problem& prob) {
  const bool fully = cfg.scheme == Scheme::FullyImplicit;
  NewtonOutcome out;
  out.z = state_old;
  ResidualPair r = residual_frozen(out.z, state_old,
                                   fully ? out.z : state_old, dt, cfg, prob);
  if (!r.finite()) return out;
  double rnorm = r.max_norm();
  const std::size_t nn = prob.grid.node_count();

  FilmPair best = out.z;
  double best_norm = rnorm;
  double prev_norm = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= cfg.newton_max_iter; ++it) {
    out.iters = it;
    if (best_norm <= cfg.newton_tol) {
      const bool deep = rnorm <= 1e-3 * cfg.newton_tol;
      const bool stalled = !(rnorm < 0.25 * prev_norm);
      if (!fully || deep || stalled) break;
    }
    prev_norm = rnorm;
    BandedMatrix jac = jacobian_frozen(out.z, fully ? out.z : state_old, dt,
                                       cfg, prob, fully);
    std::vector<double> rhs(2 * nn);
    for (std::size_t i = 0; i < nn; ++i) {
      rhs[2 * i] = -r.ru[i];
      rhs[2 * i + 1] = -r.rv[i];
    }
    std::vector<double> delta;
    try {
      delta = solve(std::move(jac), std::move(rhs));
    } catch (const SingularMatrix&) {
      break;
    }
    // Step-halving line search on the residual max-norm.
    double alpha = 1.0;
    bool advanced = false;
    for (int ls = 0; ls <= 5; ++ls) {
      FilmPair trial = out.z;
      for (std::size_t i = 0; i < nn; ++i) {
        trial.u[i] += alpha * delta[2 * i];
        trial.v[i] += alpha * delta[2 * i + 1];
      }
      ResidualPair rt = residual_frozen(trial, state_old,
                                        fully ? trial : state_old, dt, cfg, prob);
      if (rt.finite()) {
        const double tnorm = rt.max_norm();
        if (tnorm < rnorm * (1.0 - 1e-4 * alpha) || tnorm <= cfg.newton_tol) {
          out.z = std::move(trial);
          r = std::move(rt);
          rnorm = tnorm;
          advanced = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (advanced && rnorm < best_norm) {
      best = out.z;
      best_norm = rnorm;
    }
    if (!advanced) break;
  }
  if (best_norm <= cfg.newton_tol) {
    out.z = std::move(best);
    out.converged = true;
    out.residual_norm = best_norm;
  }
  return out;
}

}  // namespace detail

/**
 * One adaptive backward-Euler step starting from `state` with suggested step
 * size dt_try. On Newton failure or an energy increase the step size is
 * halved and retried; below dt_min the step is rejected with DtUnderflow.
 *
 * The Newton iterate satisfies the conservative flux-form update only up to
 * the residual tolerance, so its trapezoidal masses carry an O(dt * tol)
 * defect. The accepted state removes that defect by a constant shift per
 * layer (the projection onto the conserved mode). Constants are invisible to
 * pressures, gradients, and dissipation, so unlike re-applying the flux
 * divergence -- whose evaluation roundoff grows like 1/dx^4 and roughens the
 * state at fine resolutions -- the correction leaves the accepted state as
 * smooth as the iterate itself.
 */
inline StepResult step(const FilmPair& state, double dt_try,
                       const SolverConfig& cfg, const Problem& prob) {
  cfg.validate();
  require_size(state, prob.grid.node_count(), "step");
  if (!(dt_try > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  StepResult result;
  result.state = state;
  double dt = std::min(dt_try, cfg.dt_max);
  const double e_old =
      cfg.energy_guard ? energy(state, prob.params, prob.pot, prob.grid) : 0.0;
  const double tol_e = 1e-10 * (1.0 + std::abs(e_old));
  while (true) {
    ++result.attempts;
    const detail::NewtonOutcome outcome =
        detail::newton_solve(state, dt, cfg, prob);
    bool ok = outcome.converged;
    if (ok) {
      // Mass-exact finalize: shift each layer by a constant so the
      // trapezoidal masses match the old state exactly.
      FilmPair next = outcome.z;
      const auto [mu_old, mv_old] = masses(state, prob.grid);
      const auto [mu_new, mv_new] = masses(next, prob.grid);
      double wsum = 0.0;
      for (std::size_t i = 0; i < prob.grid.node_count(); ++i)
        wsum += prob.grid.weight(i);
      const double cu = (mu_old - mu_new) / wsum;
      const double cv = (mv_old - mv_new) / wsum;
      for (std::size_t i = 0; i < prob.grid.node_count(); ++i) {
        next.u[i] += cu;
        next.v[i] += cv;
      }
      if (cfg.energy_guard &&
          energy(next, prob.params, prob.pot, prob.grid) > e_old + tol_e) {
        ok = false;
        result.reject_reason = RejectReason::EnergyIncreased;
      } else {
        result.state = std::move(next);
        result.dt_used = dt;
        result.newton_iters = outcome.iters;
        result.accepted = true;
        result.reject_reason.reset();
        result.residual_norm = outcome.residual_norm;
        return result;
      }
    } else {
      result.reject_reason = RejectReason::NewtonDiverged;
    }
    dt *= 0.5;
    if (dt < cfg.dt_min) {
      result.accepted = false;
      result.dt_used = 0.0;
      result.reject_reason = RejectReason::DtUnderflow;
      return result;
    }
  }
}

/** Per-step metadata handed to run sinks. */
struct StepInfo {
  double t = 0.0;
  double dt = 0.0;
  int newton_iters = 0;
  double residual_norm = 0.0;
};

using StepSink = std::function<void(const FilmPair&, const StepInfo&)>;

/** Extra run controls beyond SolverConfig. */
struct RunOptions {
  /** Strictly increasing times the run must land on exactly. */
  std::vector<double> checkpoints;
  /** Stop (without error) after this many accepted steps. */
  std::size_t max_steps = std::numeric_limits<std::size_t>::max();
};

/** Outcome of a full run. */
struct RunSummary {
  FilmPair final;
  double t_reached = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;
  bool completed = false;
  std::optional<RejectReason> abort_reason;
};

/**
 * Advances from `initial` to t_end, invoking `sink` once for the initial
 * state (dt = 0) and once per accepted step. The step size grows by 1.2
 * after three consecutive accepts, is clipped to land exactly on t_end and
 * on every requested checkpoint, and continues from the halved value after
 * an internal reject. Aborts cleanly on DtUnderflow with a partial summary.
 */
inline RunSummary run(const FilmPair& initial, double t_end,
                      const SolverConfig& cfg, const Problem& prob,
                      const StepSink& sink = {}, const RunOptions& opts = {}) {
  cfg.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("run: t_end must be > 0");
  for (std::size_t c = 1; c < opts.checkpoints.size(); ++c)
    if (!(opts.checkpoints[c] > opts.checkpoints[c - 1]))
      throw std::invalid_argument("run: checkpoints must be strictly increasing");
  RunSummary summary;
  summary.final = initial;
  if (sink) sink(initial, StepInfo{0.0, 0.0, 0, 0.0});
  double t = 0.0;
  double dt = cfg.dt_init;
  int accept_streak = 0;
  std::size_t next_ckpt = 0;
  const double t_tiny = 1e-14 * std::max(1.0, t_end);
  while (t < t_end - t_tiny &&
         static_cast<std::size_t>(summary.steps_accepted) < opts.max_steps) {
    while (next_ckpt < opts.checkpoints.size() &&
           opts.checkpoints[next_ckpt] <= t + t_tiny)
      ++next_ckpt;
    const double target = (next_ckpt < opts.checkpoints.size())
                              ? std::min(t_end, opts.checkpoints[next_ckpt])
                              : t_end;
    const double dt_eff = std::min(dt, target - t);
    const StepResult res = step(summary.final, dt_eff, cfg, prob);
    summary.steps_rejected += res.attempts - 1;
    if (!res.accepted) {
      summary.abort_reason = res.reject_reason;
      summary.t_reached = t;
      return summary;
    }
    t = (res.dt_used == dt_eff && dt_eff == target - t) ? target
                                                        : t + res.dt_used;
    summary.final = res.state;
    ++summary.steps_accepted;
    if (res.dt_used < dt_eff) {
      dt = res.dt_used;  // continue from the halved value
      accept_streak = 1;
    } else if (++accept_streak >= 3) {
      dt = std::min(dt * 1.2, cfg.dt_max);
      accept_streak = 0;
    }
    if (sink)
      sink(res.state,
           StepInfo{t, res.dt_used, res.newton_iters, res.residual_norm});
  }
  summary.t_reached = t;
  summary.completed = t >= t_end - t_tiny;
  return summary;
}

}  // namespace bilayer
