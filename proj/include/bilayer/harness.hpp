#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilayer/diagnostics.hpp"
#include "bilayer/scenario.hpp"
#include "bilayer/single_layer.hpp"
#include "bilayer/stepper.hpp"

/**
 * Desk-scale studies: scenario runs with an invariant checklist, epsilon
 * continuation sweeps, grid/step refinement, and the single-layer reduction
 * check. Sweep members are independent and run concurrently.
 */
namespace bilayer {

/** One monitored invariant, evaluated on a finished run. */
struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;      ///< measured quantity
  double threshold = 0.0;  ///< bound it was compared against
  std::string note;
};

/** A finished scenario run with diagnostics and its invariant verdicts. */
struct RunReport {
  Scenario scenario;
  RunSummary summary;
  std::vector<DiagnosticsRecord> records;
  std::vector<TimedState> snapshots;
  EntropyConfig entropy_cfg;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/** Extra run controls. */
struct RunScenarioOptions {
  /** Times (strictly increasing, > 0) to capture full states at, exactly. */
  std::vector<double> snapshot_times;
  /** Optional cap on accepted steps (run reports incomplete when hit). */
  std::size_t max_steps = std::numeric_limits<std::size_t>::max();
};

/** Entropy functional matched to a scenario: cap from the initial data. */
inline EntropyConfig entropy_config_for(const Scenario& s) {
  const FilmPair init = s.initial();
  double sup = 0.0;
  for (double x : init.u) sup = std::max(sup, std::abs(x));
  for (double x : init.v) sup = std::max(sup, std::abs(x));
  EntropyConfig ecfg;
  ecfg.A = 2.0 * (sup + 1.0);
  const auto [nu, nv] = entropy_exponents_for(s.model);
  ecfg.n_u = nu;
  ecfg.n_v = nv;
  ecfg.eps = s.solver.epsilon;
  return ecfg;
}

namespace detail {

inline void evaluate_checks(RunReport& report) {
  const std::vector<DiagnosticsRecord>& recs = report.records;
  if (recs.empty()) return;
  const double e0 = recs.front().energy;
  const double s0 = recs.front().entropy;
  std::vector<CheckResult>& checks = report.checks;

  {
    CheckResult c{"completed", report.summary.completed, 0.0, 0.0, ""};
    if (!report.summary.completed) {
      c.note = report.summary.abort_reason
                   ? std::string("aborted: ") +
                         to_string(*report.summary.abort_reason)
                   : "stopped before t_end";
    }
    checks.push_back(c);
  }

  double drift_u = 0.0, drift_v = 0.0;
  double worst_rise = -std::numeric_limits<double>::infinity();
  double cumulative = 0.0;
  for (std::size_t k = 1; k < recs.size(); ++k) {
    drift_u = std::max(drift_u, std::abs(recs[k].mass_u - recs[k - 1].mass_u));
    drift_v = std::max(drift_v, std::abs(recs[k].mass_v - recs[k - 1].mass_v));
    worst_rise = std::max(worst_rise, recs[k].energy - recs[k - 1].energy);
    cumulative +=
        2.0 * recs[k].dt * (recs[k].dissipation + recs[k].eps_dissipation);
  }
  const double mass_scale_u = std::max(1.0, std::abs(recs.front().mass_u));
  const double mass_scale_v = std::max(1.0, std::abs(recs.front().mass_v));
  checks.push_back({"mass_conservation_u", drift_u <= 1e-12 * mass_scale_u,
                    drift_u / mass_scale_u, 1e-12, "max per-step drift"});
  checks.push_back({"mass_conservation_v", drift_v <= 1e-12 * mass_scale_v,
                    drift_v / mass_scale_v, 1e-12, "max per-step drift"});
  const double rise_tol = 1e-10 * (1.0 + std::abs(e0));
  checks.push_back({"energy_nonincreasing", worst_rise <= rise_tol, worst_rise,
                    rise_tol, "max per-step energy rise"});
  const double budget = e0 * (1.0 + 1e-6);
  const double spent = recs.back().energy + cumulative;
  checks.push_back({"cumulative_dissipation", spent <= budget, spent, budget,
                    "final energy plus twice the time-summed dissipation"});

  if (!has_potential(report.scenario.pot)) {
    // Gronwall-style ceiling; the constant is a heuristic proxy.
    const double ceiling =
        std::exp(report.scenario.t_end / 0.5) * s0 + std::abs(e0) / 2.0;
    double worst_entropy = s0;
    for (const DiagnosticsRecord& r : recs)
      worst_entropy = std::max(worst_entropy, r.entropy);
    checks.push_back({"entropy_ceiling", worst_entropy <= ceiling,
                      worst_entropy, ceiling,
                      "heuristic Gronwall bound, delta = 0.5"});
    if (std::holds_alternative<TouchingZeroIC>(report.scenario.ic)) {
      double worst_min = 0.0;
      for (const DiagnosticsRecord& r : recs)
        worst_min = std::min({worst_min, r.min_u, r.min_v});
      checks.push_back({"nonnegativity", worst_min >= -1e-8, worst_min, -1e-8,
                        "min height over the run"});
    }
  } else {
    const auto& bv = std::get<BornVdW>(report.scenario.pot);
    double worst_u = std::numeric_limits<double>::infinity();
    double worst_v = worst_u;
    for (const DiagnosticsRecord& r : recs) {
      worst_u = std::min(worst_u, r.min_u);
      worst_v = std::min(worst_v, r.min_v);
    }
    const double thr_u = 0.1 * bv.force_root(1);
    const double thr_v = 0.1 * bv.force_root(2);
    const bool pass = worst_u >= thr_u && worst_v >= thr_v;
    CheckResult c{"positivity_barrier", pass, std::min(worst_u, worst_v),
                  std::min(thr_u, thr_v), ""};
    const double barrier =
        positivity_barrier(std::min(worst_u, worst_v), report.scenario.pot,
                           worst_u <= worst_v ? 1 : 2);
    c.note = "barrier at the run minimum: " + std::to_string(barrier);
    c.pass = c.pass && std::isfinite(barrier);
    checks.push_back(c);
  }
}

}  // namespace detail

/**
 * Runs a scenario with full diagnostics and evaluates the invariant
 * checklist appropriate to its model/potential combination. A run aborted by
 * DtUnderflow is reported (not thrown), with the checklist marking it
 * incomplete.
 */
inline RunReport run_scenario(const Scenario& s,
                              const RunScenarioOptions& opts = {}) {
  s.validate();
  RunReport report;
  report.scenario = s;
  report.entropy_cfg = entropy_config_for(s);
  const Problem prob = s.problem();
  DiagnosticsRecorder recorder(prob, s.solver, report.entropy_cfg);
  const FilmPair init = s.initial();

  const double snap_tol = 1e-12 * std::max(1.0, s.t_end);
  std::size_t next_snap = 0;
  auto sink = [&](const FilmPair& state, const StepInfo& info) {
    recorder.observe(state, info);
    if (opts.snapshot_times.empty()) return;
    if (info.t == 0.0) {
      report.snapshots.push_back({0.0, state});
      return;
    }
    while (next_snap < opts.snapshot_times.size() &&
           opts.snapshot_times[next_snap] < info.t - snap_tol)
      ++next_snap;
    if (next_snap < opts.snapshot_times.size() &&
        std::abs(opts.snapshot_times[next_snap] - info.t) <= snap_tol) {
      report.snapshots.push_back({info.t, state});
      ++next_snap;
    }
  };

  RunOptions ropts;
  ropts.checkpoints = opts.snapshot_times;
  ropts.max_steps = opts.max_steps;
  report.summary = run(init, s.t_end, s.solver, prob, sink, ropts);
  report.records = recorder.records();
  detail::evaluate_checks(report);
  return report;
}

/** Result of an epsilon-continuation sweep. */
struct EpsSweepResult {
  std::vector<double> eps;
  std::vector<FilmPair> finals;
  std::vector<double> distances;  ///< max-norm between consecutive finals
};

inline double max_norm_distance(const FilmPair& a, const FilmPair& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.u[i] - b.u[i]));
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  }
  return m;
}

/**
 * Runs the scenario once per epsilon (members in parallel) and reports the
 * max-norm distances between consecutive final states. With warm_start the
 * runs execute sequentially, each starting from the previous final state.
 */
inline EpsSweepResult eps_sweep(const Scenario& s,
                                const std::vector<double>& eps_list,
                                bool warm_start = false) {
  if (eps_list.size() < 3)
    throw std::invalid_argument("eps_sweep: need at least 3 epsilon values");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0))
      throw std::invalid_argument("eps_sweep: epsilon values must be > 0");
    if (i > 0 && eps_list[i] > eps_list[i - 1])
      throw std::invalid_argument("eps_sweep: epsilon values must not increase");
  }
  EpsSweepResult result;
  result.eps = eps_list;

  auto run_one = [&s](double eps, const FilmPair& start) {
    Scenario member = s;
    member.solver.epsilon = eps;
    const Problem prob = member.problem();
    const RunSummary summary = run(start, member.t_end, member.solver, prob);
    if (!summary.completed)
      throw std::runtime_error("eps_sweep: member run aborted at eps=" +
                               std::to_string(eps));
    return summary.final;
  };

  if (warm_start) {
    FilmPair start = s.initial();
    for (double eps : eps_list) {
      result.finals.push_back(run_one(eps, start));
      start = result.finals.back();
    }
  } else {
    const FilmPair init = s.initial();
    std::vector<std::future<FilmPair>> jobs;
    for (double eps : eps_list)
      jobs.push_back(std::async(std::launch::async, run_one, eps, init));
    for (auto& job : jobs) result.finals.push_back(job.get());
  }
  for (std::size_t i = 0; i + 1 < result.finals.size(); ++i)
    result.distances.push_back(
        max_norm_distance(result.finals[i], result.finals[i + 1]));
  return result;
}

/** Observed convergence orders from grid and step refinement. */
struct RefinementResult {
  std::vector<int> grids;
  std::vector<double> spatial_errors;
  double spatial_order = std::numeric_limits<double>::quiet_NaN();
  bool spatial_applicable = false;
  std::vector<double> dts;
  std::vector<double> temporal_errors;
  double temporal_order = std::numeric_limits<double>::quiet_NaN();
  bool temporal_applicable = false;
};

namespace detail {

inline double fit_order(const std::vector<double>& h,
                        const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(h.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline FilmPair fixed_dt_final(const Scenario& s, double dt) {
  Scenario member = s;
  member.solver.dt_init = dt;
  member.solver.dt_max = dt;
  member.solver.dt_min = std::min(member.solver.dt_min, dt * 1e-6);
  const RunSummary summary =
      run(member.initial(), member.t_end, member.solver, member.problem());
  if (!summary.completed) {
    std::string msg = "refinement_study: member run at n_cells=" +
                      std::to_string(member.grid.n_cells) + " aborted at t=" +
                      std::to_string(summary.t_reached);
    if (summary.abort_reason)
      msg += std::string(" (") + to_string(*summary.abort_reason) + ")";
    msg +=
        "; the residual's evaluation-roundoff floor grows ~(n_cells/128)^4, "
        "so newton_tol may be unreachable on the refined grids";
    throw std::runtime_error(msg);
  }
  return summary.final;
}

}  // namespace detail

/**
 * Richardson study against the finest member. Spatial: grids double from the
 * scenario's resolution at fixed dt = dt_init. Temporal: steps halve from
 * dt_init on the scenario's grid. Orders are least-squares slopes; a study
 * whose errors sit at roundoff (a steady scenario) is marked not applicable.
 */
inline RefinementResult refinement_study(const Scenario& s, int levels) {
  if (levels < 3) throw std::invalid_argument("refinement_study: levels >= 3");
  s.validate();
  RefinementResult result;

  // Spatial sweep (parallel members), finest level as reference.
  std::vector<std::future<FilmPair>> jobs;
  for (int j = 0; j < levels; ++j) {
    const int n = s.grid.n_cells << j;
    result.grids.push_back(n);
    jobs.push_back(std::async(std::launch::async, [&s, n] {
      return detail::fixed_dt_final(s.with_grid(n), s.solver.dt_init);
    }));
  }
  std::vector<FilmPair> finals;
  for (auto& job : jobs) finals.push_back(job.get());
  const FilmPair& ref = finals.back();
  const int stride_base = 1 << (levels - 1);
  std::vector<double> hs;
  for (int j = 0; j + 1 < levels; ++j) {
    const int stride = stride_base >> j;
    double err = 0.0;
    for (std::size_t i = 0; i < finals[j].size(); ++i) {
      err = std::max(err, std::abs(finals[j].u[i] - ref.u[i * stride]));
      err = std::max(err, std::abs(finals[j].v[i] - ref.v[i * stride]));
    }
    result.spatial_errors.push_back(err);
    hs.push_back(1.0 / result.grids[j]);
  }
  if (*std::max_element(result.spatial_errors.begin(),
                        result.spatial_errors.end()) > 1e-13) {
    result.spatial_order = detail::fit_order(hs, result.spatial_errors);
    result.spatial_applicable = true;
  }

  // Temporal sweep on the scenario grid, finest step as reference.
  std::vector<std::future<FilmPair>> tjobs;
  for (int j = 0; j < levels; ++j) {
    const double dt = s.solver.dt_init / (1 << j);
    result.dts.push_back(dt);
    tjobs.push_back(std::async(std::launch::async, [&s, dt] {
      return detail::fixed_dt_final(s, dt);
    }));
  }
  std::vector<FilmPair> tfinals;
  for (auto& job : tjobs) tfinals.push_back(job.get());
  for (int j = 0; j + 1 < levels; ++j)
    result.temporal_errors.push_back(
        max_norm_distance(tfinals[j], tfinals.back()));
  if (*std::max_element(result.temporal_errors.begin(),
                        result.temporal_errors.end()) > 1e-13) {
    std::vector<double> dts_used(result.dts.begin(), result.dts.end() - 1);
    result.temporal_order = detail::fit_order(dts_used, result.temporal_errors);
    result.temporal_applicable = true;
  }
  return result;
}

/**
 * Runs the coupled solver on v = 0 data and the scalar reference solver on
 * the same grid with the same fixed step dt_init, and returns the max-norm
 * deviation of the lower layer at t_end.
 */
inline double single_layer_check(const Scenario& s) {
  s.validate();
  const FilmPair init = s.initial();
  for (double x : init.v)
    if (x != 0.0)
      throw std::invalid_argument(
          "single_layer_check: initial data must have v identically 0");
  SingleLayerProblem sp;
  if (std::holds_alternative<NoSlip>(s.model)) {
    sp.law = SingleLayerLaw::Cubic;
  } else if (std::holds_alternative<NavierSlip>(s.model)) {
    sp.law = SingleLayerLaw::Quadratic;
  } else {
    throw std::invalid_argument(
        "single_layer_check: weak-slip has no scalar reference law");
  }
  sp.mu = s.params.mu;
  sp.sigma = s.params.sigma;
  sp.eps = s.solver.epsilon;
  sp.grid = s.grid;
  const double dt = s.solver.dt_init;
  const std::vector<double> href = single_layer_run(
      sp, init.u, s.t_end, dt, s.solver.newton_tol, s.solver.newton_max_iter);

  Scenario fixed = s;
  fixed.solver.dt_max = dt;
  const RunSummary summary =
      run(init, fixed.t_end, fixed.solver, fixed.problem());
  if (!summary.completed)
    throw std::runtime_error("single_layer_check: coupled run aborted");
  double dev = 0.0;
  for (std::size_t i = 0; i < href.size(); ++i)
    dev = std::max(dev, std::abs(summary.final.u[i] - href[i]));
  return dev;
}

}  // namespace bilayer
