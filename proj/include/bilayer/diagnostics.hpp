#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bilayer/entropy.hpp"
#include "bilayer/functionals.hpp"
#include "bilayer/grid.hpp"
#include "bilayer/stepper.hpp"
#include "bilayer/types.hpp"

/**
 * Monitored quantities: energy, dissipation, entropy, masses, minimum
 * heights, the positivity barrier, and the Holder-in-time modulus. One
 * DiagnosticsRecord is assembled per accepted step.
 */
namespace bilayer {

/** Everything monitored per accepted step. */
struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double min_u = 0.0;
  double min_v = 0.0;
  double entropy = 0.0;
  double dissipation = 0.0;      ///< mobility quadratic form in the pressure gradients
  double eps_dissipation = 0.0;  ///< eps times the raw pressure-gradient norms
  double energy_balance_residual = 0.0;  ///< dE + 2 dt (D + D_eps), 0 for the first record
  double dt = 0.0;
  int newton_iters = 0;
};

/** The two dissipation integrals of the energy identity. */
struct DissipationParts {
  double quadratic_form = 0.0;
  double eps_part = 0.0;

  double total() const { return quadratic_form + eps_part; }
};

/**
 * Face-quadrature dissipation at a state: the mobility quadratic form in the
 * pressure gradients and, separately, eps times the plain gradient norms.
 */
inline DissipationParts dissipation(
    const FilmPair& state, const MobilityModel& model,
    const PhysicalParams& params, const PotentialModel& pot, double eps,
    const Grid& grid, FaceAveraging avg = FaceAveraging::ArithmeticMean) {
  require_size(state, grid.node_count(), "dissipation");
  const PressurePair p = pressures(state, params, pot, grid);
  const FaceField dp1 = face_gradient(p.p1, grid);
  const FaceField dp2 = face_gradient(p.p2, grid);
  const std::vector<SymMatrix2> mob =
      face_mobility(state, model, params, 0.0, grid, avg);
  DissipationParts parts;
  for (std::size_t f = 0; f < grid.face_count(); ++f) {
    parts.quadratic_form +=
        grid.dx * (mob[f].m11 * dp1[f] * dp1[f] +
                   2.0 * mob[f].m12 * dp1[f] * dp2[f] +
                   mob[f].m22 * dp2[f] * dp2[f]);
    parts.eps_part += grid.dx * eps * (dp1[f] * dp1[f] + dp2[f] * dp2[f]);
  }
  return parts;
}

inline double min_of(const std::vector<double>& f) {
  return *std::min_element(f.begin(), f.end());
}

/** Which state the balance residual evaluates its dissipation at. */
enum class BalanceEvaluation {
  NewState,  ///< backward-Euler convention (default)
  Midpoint,  ///< average of the old and new states
};

/**
 * Assembles one record. When prev_energy is supplied the balance residual is
 * E - prev_energy + 2 dt (D + D_eps); by default the dissipation is evaluated
 * at the new state (backward-Euler convention), or at the old/new midpoint
 * when requested and the old state is supplied. The recorded dissipation
 * fields always refer to the new state. The first record reports residual 0.
 */
inline DiagnosticsRecord record(const FilmPair& state, const StepInfo& info,
                                const Problem& prob, const SolverConfig& cfg,
                                const EntropyConfig& ecfg,
                                const double* prev_energy = nullptr,
                                const FilmPair* prev_state = nullptr,
                                BalanceEvaluation balance =
                                    BalanceEvaluation::NewState) {
  DiagnosticsRecord rec;
  rec.t = info.t;
  rec.dt = info.dt;
  rec.newton_iters = info.newton_iters;
  rec.energy = energy(state, prob.params, prob.pot, prob.grid);
  const auto [mu_mass, mv_mass] = masses(state, prob.grid);
  rec.mass_u = mu_mass;
  rec.mass_v = mv_mass;
  rec.min_u = min_of(state.u);
  rec.min_v = min_of(state.v);
  rec.entropy = entropy_total(state, ecfg, prob.grid);
  const DissipationParts parts =
      dissipation(state, prob.model, prob.params, prob.pot, cfg.epsilon,
                  prob.grid, prob.averaging);
  rec.dissipation = parts.quadratic_form;
  rec.eps_dissipation = parts.eps_part;
  double balance_total = parts.total();
  if (balance == BalanceEvaluation::Midpoint && prev_state != nullptr) {
    require_size(*prev_state, prob.grid.node_count(), "record");
    FilmPair mid = state;
    for (std::size_t i = 0; i < prob.grid.node_count(); ++i) {
      mid.u[i] = 0.5 * (mid.u[i] + prev_state->u[i]);
      mid.v[i] = 0.5 * (mid.v[i] + prev_state->v[i]);
    }
    balance_total = dissipation(mid, prob.model, prob.params, prob.pot,
                                cfg.epsilon, prob.grid, prob.averaging)
                        .total();
  }
  rec.energy_balance_residual =
      (prev_energy != nullptr)
          ? rec.energy - *prev_energy + 2.0 * info.dt * balance_total
          : 0.0;
  return rec;
}

/** Stateful per-run record collector, usable as a stepper sink. */
class DiagnosticsRecorder {
 public:
  DiagnosticsRecorder(Problem prob, SolverConfig cfg, EntropyConfig ecfg,
                      BalanceEvaluation balance = BalanceEvaluation::NewState)
      : prob_(std::move(prob)), cfg_(cfg), ecfg_(ecfg), balance_(balance) {}

  void observe(const FilmPair& state, const StepInfo& info) {
    const bool first = records_.empty();
    records_.push_back(record(state, info, prob_, cfg_, ecfg_,
                              first ? nullptr : &prev_energy_,
                              first ? nullptr : &prev_state_, balance_));
    prev_energy_ = records_.back().energy;
    prev_state_ = state;
  }

  StepSink sink() {
    return [this](const FilmPair& state, const StepInfo& info) {
      observe(state, info);
    };
  }

  const std::vector<DiagnosticsRecord>& records() const { return records_; }
  const EntropyConfig& entropy_config() const { return ecfg_; }

 private:
  Problem prob_;
  SolverConfig cfg_;
  EntropyConfig ecfg_;
  BalanceEvaluation balance_;
  std::vector<DiagnosticsRecord> records_;
  double prev_energy_ = 0.0;
  FilmPair prev_state_;
};

/**
 * Barrier eta(s) whose boundedness certifies that minimum heights stay away
 * from zero under a Born-type potential: -log s for m = 3, s^{3-m} for m > 3.
 */
inline double positivity_barrier(double min_height, const PotentialModel& pot,
                                 int kind) {
  detail::check_kind(kind);
  const auto* bv = std::get_if<BornVdW>(&pot);
  if (bv == nullptr)
    throw std::invalid_argument(
        "positivity_barrier: not applicable without a potential");
  if (!(bv->m >= 3.0))
    throw std::invalid_argument("positivity_barrier: requires m >= 3");
  if (!(min_height > 0.0)) return std::numeric_limits<double>::infinity();
  if (bv->m == 3.0) return -std::log(min_height);
  return std::pow(min_height, 3.0 - bv->m);
}

/** A state paired with the time it was captured at. */
struct TimedState {
  double t = 0.0;
  FilmPair state;
};

/** Result of the Holder-in-time modulus fit. */
struct HolderReport {
  std::vector<double> lags;
  std::vector<double> moduli;  ///< sup_x |u(x, t+lag) - u(x, t)|, max over t
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  bool applicable = false;  ///< false when the moduli vanish (frozen run)
};

/**
 * Least-squares fit of log(modulus) against log(lag). Requires at least 8
 * snapshots and lags spanning at least two decades; every lag must be
 * realizable as a time difference between captured snapshots.
 */
inline HolderReport holder_fit(const std::vector<TimedState>& snapshots,
                               const std::vector<double>& lags) {
  if (snapshots.size() < 8)
    throw std::invalid_argument("holder_fit: need at least 8 snapshots");
  for (std::size_t j = 1; j < snapshots.size(); ++j)
    if (!(snapshots[j].t > snapshots[j - 1].t))
      throw std::invalid_argument("holder_fit: snapshots must be time-ordered");
  if (lags.size() < 2)
    throw std::invalid_argument("holder_fit: need at least 2 lags");
  double lag_min = std::numeric_limits<double>::infinity(), lag_max = 0.0;
  for (double lag : lags) {
    if (!(lag > 0.0)) throw std::invalid_argument("holder_fit: lags must be > 0");
    lag_min = std::min(lag_min, lag);
    lag_max = std::max(lag_max, lag);
  }
  if (lag_max < 100.0 * lag_min * (1.0 - 1e-12))
    throw std::invalid_argument("holder_fit: lags must span two decades");

  HolderReport report;
  report.lags = lags;
  for (double lag : lags) {
    const double tol = 1e-9 * lag + 1e-14;
    double modulus = 0.0;
    bool paired = false;
    std::size_t k = 0;
    for (std::size_t j = 0; j < snapshots.size(); ++j) {
      const double target = snapshots[j].t + lag;
      while (k < snapshots.size() && snapshots[k].t < target - tol) ++k;
      if (k >= snapshots.size()) break;
      if (std::abs(snapshots[k].t - target) > tol) continue;
      paired = true;
      const auto& a = snapshots[j].state.u;
      const auto& b = snapshots[k].state.u;
      for (std::size_t i = 0; i < a.size(); ++i)
        modulus = std::max(modulus, std::abs(b[i] - a[i]));
    }
    if (!paired)
      throw std::invalid_argument(
          "holder_fit: no snapshot pair realizes a requested lag");
    report.moduli.push_back(modulus);
  }

  // Slope fit over the lags with nonzero modulus.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < lags.size(); ++j) {
    if (!(report.moduli[j] > 0.0)) continue;
    const double x = std::log(lags[j]);
    const double y = std::log(report.moduli[j]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sxx - sx * sx;
    if (denom > 0.0) {
      report.fitted_exponent = (count * sxy - sx * sy) / denom;
      report.applicable = true;
    }
  }
  return report;
}

}  // namespace bilayer
