#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bilayer/harness.hpp"
#include "bilayer/scenario.hpp"

/**
 * The built-in invariant suite: twelve numbered structure-preservation
 * criteria, each a desk-scale experiment with a pinned tolerance. Shared by
 * the command-line `check` subcommand and the acceptance test binary.
 */
namespace bilayer {

struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  std::string detail;  ///< measured values and the bound they faced
};

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

/** Smooth positive run used for the balance-order study. */
inline Scenario balance_order_scenario(double dt) {
  Scenario s = find_scenario("relaxation");
  s.t_end = 16.0 * 2e-4;
  s.solver.newton_tol = 1e-5;
  s.solver.dt_init = dt;
  s.solver.dt_max = dt;
  s.solver.dt_min = std::min(s.solver.dt_min, dt * 1e-6);
  return s;
}

/** Smooth positive run used for the epsilon-continuation sweep. */
inline Scenario sweep_scenario() {
  Scenario s = find_scenario("relaxation");
  s.t_end = 0.05;
  return s;
}

/** Smooth positive run used for the grid-refinement study. */
inline Scenario refinement_scenario() {
  Scenario s = find_scenario("relaxation");
  s.grid = Grid(64);
  s.t_end = 0.01;
  s.solver.dt_init = 1e-5;
  s.solver.dt_max = 1e-5;
  s.solver.newton_tol = 1e-3;
  return s;
}

}  // namespace detail

/**
 * Runs the twelve criteria. Named-scenario runs are computed once on a
 * 256-cell grid and shared between criteria; the dewetting run additionally
 * collects 201 evenly spaced profiles for the Hoelder fit.
 */
class AcceptanceSuite {
 public:
  static constexpr int criterion_count = 12;
  static constexpr int shared_grid = 256;

  /** Runs every criterion in order (shared runs computed in parallel). */
  std::vector<CriterionResult> run_all() {
    prepopulate();
    std::vector<CriterionResult> results;
    for (int k = 1; k <= criterion_count; ++k) results.push_back(run(k));
    return results;
  }

  CriterionResult run(int number) {
    switch (number) {
      case 1: return mass_conservation();
      case 2: return energy_dissipation();
      case 3: return energy_balance_order();
      case 4: return mobility_psd();
      case 5: return variational_consistency();
      case 6: return nonnegativity_regularized();
      case 7: return positivity_potentials();
      case 8: return epsilon_convergence();
      case 9: return single_layer_reduction();
      case 10: return holder_continuity();
      case 11: return cumulative_energy_inequality();
      case 12: return spatial_order();
      default:
        throw std::invalid_argument("criterion number must be 1..12");
    }
  }

  /** The shared scenario run, computed on demand. */
  const RunReport& cached_run(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(name, compute_run(name)).first->second;
  }

 private:
  std::map<std::string, RunReport> cache_;

  static RunScenarioOptions options_for(const std::string& name) {
    RunScenarioOptions opts;
    if (name == "dewetting") {
      for (int k = 1; k <= 200; ++k)
        opts.snapshot_times.push_back(k * 5e-3);
    }
    return opts;
  }

  static RunReport compute_run(const std::string& name) {
    const Scenario s = find_scenario(name).with_grid(shared_grid);
    return run_scenario(s, options_for(name));
  }

  void prepopulate() {
    std::vector<std::string> missing;
    for (const Scenario& s : named_scenarios())
      if (cache_.find(s.name) == cache_.end()) missing.push_back(s.name);
    std::vector<std::future<RunReport>> jobs;
    for (const std::string& name : missing)
      jobs.push_back(std::async(std::launch::async, compute_run, name));
    for (std::size_t i = 0; i < missing.size(); ++i)
      cache_.emplace(missing[i], jobs[i].get());
  }

  const std::vector<std::string>& all_names() {
    static const std::vector<std::string> names = [] {
      std::vector<std::string> out;
      for (const Scenario& s : named_scenarios()) out.push_back(s.name);
      return out;
    }();
    return names;
  }

  // -- 1 -------------------------------------------------------------------
  CriterionResult mass_conservation() {
    constexpr double tol = 1e-12;
    double worst = 0.0;
    std::string where = "-";
    for (const std::string& name : all_names()) {
      const RunReport& rep = cached_run(name);
      const auto& r = rep.records;
      if (r.empty()) continue;
      const double den_u = std::max(1.0, std::abs(r[0].mass_u));
      const double den_v = std::max(1.0, std::abs(r[0].mass_v));
      const std::size_t last = std::min<std::size_t>(r.size() - 1, 1000);
      for (std::size_t k = 1; k <= last; ++k) {
        const double du = std::abs(r[k].mass_u - r[k - 1].mass_u) / den_u;
        const double dv = std::abs(r[k].mass_v - r[k - 1].mass_v) / den_v;
        if (std::max(du, dv) > worst) {
          worst = std::max(du, dv);
          where = name;
        }
      }
    }
    return {1, "mass_conservation", worst <= tol,
            "max per-step relative mass drift " + detail::num(worst) +
                " (bound " + detail::num(tol) + ", worst on " + where + ")"};
  }

  // -- 2 -------------------------------------------------------------------
  CriterionResult energy_dissipation() {
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_rise = 0.0;
    std::string where = "-";
    bool pass = true;
    for (const std::string& name : all_names()) {
      const RunReport& rep = cached_run(name);
      const auto& r = rep.records;
      if (r.empty()) continue;
      const double tol = 1e-10 * (1.0 + std::abs(r[0].energy));
      for (std::size_t k = 1; k < r.size(); ++k) {
        const double rise = r[k].energy - r[k - 1].energy;
        if (rise > tol) pass = false;
        if (rise - tol > worst_excess) {
          worst_excess = rise - tol;
          worst_rise = rise;
          where = name;
        }
      }
    }
    return {2, "energy_dissipation", pass,
            "max per-step energy rise " + detail::num(worst_rise) +
                " (per-scenario bound 1e-10*(1+|E0|), worst on " + where +
                ")"};
  }

  // -- 3 -------------------------------------------------------------------
  CriterionResult energy_balance_order() {
    std::vector<double> dts;
    for (int j = 0; j < 5; ++j) dts.push_back(2e-4 / (1 << j));
    std::vector<std::future<double>> jobs;
    for (double dt : dts)
      jobs.push_back(std::async(std::launch::async, [dt] {
        const RunReport rep =
            run_scenario(detail::balance_order_scenario(dt));
        if (!rep.summary.completed)
          throw std::runtime_error("balance-order run aborted");
        double worst = 0.0;
        for (std::size_t k = 1; k < rep.records.size(); ++k)
          worst = std::max(
              worst, std::abs(rep.records[k].energy_balance_residual));
        return worst;
      }));
    std::vector<double> residuals;
    for (auto& job : jobs) residuals.push_back(job.get());
    const double order = detail::fit_order(dts, residuals);
    return {3, "energy_balance_order", order >= 1.8,
            "balance residual shrinks with order " + detail::num(order) +
                " under step halving (need >= 1.8; residuals " +
                detail::num(residuals.front()) + " .. " +
                detail::num(residuals.back()) + ")"};
  }

  // -- 4 -------------------------------------------------------------------
  CriterionResult mobility_psd() {
    std::vector<std::pair<std::string, MobilityModel>> variants;
    variants.emplace_back("no_slip", NoSlip{});
    for (double a : {0.0, 0.5, 2.0})
      variants.emplace_back("navier_slip(alpha=" + detail::num(a) + ")",
                            NavierSlip{a});
    for (double b : {0.1, 1.0})
      for (double b1 : {0.1, 1.0})
        variants.emplace_back("weak_slip(b1=" + detail::num(b1) +
                                  ",b=" + detail::num(b) + ")",
                              WeakSlip{b1, b});
    std::mt19937 rng(20260814u);
    std::uniform_real_distribution<double> height(-3.0, 3.0);
    std::uniform_real_distribution<double> visc(0.25, 4.0);
    double worst = std::numeric_limits<double>::infinity();
    std::string where = "-";
    for (const auto& [label, model] : variants) {
      for (int k = 0; k < 100000; ++k) {
        const PhysicalParams p{1.0, visc(rng)};
        const SymMatrix2 m =
            mobility_eval(model, p, height(rng), height(rng), 0.0);
        const double lam = m.eigen_min();
        if (lam < worst) {
          worst = lam;
          where = label;
        }
      }
    }
    return {4, "mobility_psd", worst >= -1e-12,
            "min eigenvalue " + detail::num(worst) +
                " over 10^5 draws per variant (bound -1e-12, worst on " +
                where + ")"};
  }

  // -- 5 -------------------------------------------------------------------
  CriterionResult variational_consistency() {
    const Grid grid(32);
    const PhysicalParams params{1.0, 1.0};
    std::mt19937 rng(777u);
    std::uniform_real_distribution<double> height(0.3, 1.8);
    double worst = 0.0;
    std::string where = "-";
    for (const PotentialModel pot :
         {PotentialModel(ForceFree{}), PotentialModel(BornVdW{})}) {
      const std::string label =
          has_potential(pot) ? "born_vdw" : "force_free";
      for (int trial = 0; trial < 4; ++trial) {
        const std::size_t nn = grid.node_count();
        FilmPair state{std::vector<double>(nn), std::vector<double>(nn)};
        for (std::size_t i = 0; i < nn; ++i) {
          state.u[i] = height(rng);
          state.v[i] = height(rng);
        }
        const PressurePair p = pressures(state, params, pot, grid);
        double scale = 1.0;
        for (std::size_t i = 0; i < nn; ++i)
          scale = std::max({scale, std::abs(p.p1[i]), std::abs(p.p2[i])});
        for (int layer = 0; layer < 2; ++layer) {
          std::vector<double>& z = layer == 0 ? state.u : state.v;
          const std::vector<double>& pk = layer == 0 ? p.p1 : p.p2;
          for (std::size_t i = 0; i < nn; ++i) {
            const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
            const double saved = z[i];
            z[i] = saved + h;
            const double ep = energy(state, params, pot, grid);
            z[i] = saved - h;
            const double em = energy(state, params, pot, grid);
            z[i] = saved;
            const double fd = -(ep - em) / (2.0 * h) / (2.0 * grid.weight(i));
            const double err = std::abs(fd - pk[i]) / scale;
            if (err > worst) {
              worst = err;
              where = label;
            }
          }
        }
      }
    }
    return {5, "variational_consistency", worst < 1e-6,
            "pressures match -dE/dz / (2w) to rel. err " + detail::num(worst) +
                " (bound 1e-6, worst on " + where + ")"};
  }

  // -- 6 -------------------------------------------------------------------
  CriterionResult nonnegativity_regularized() {
    constexpr double tol = -1e-8;
    bool pass = true;
    std::ostringstream detail_text;
    for (const std::string& name :
         {std::string("touching_zero_noslip"),
          std::string("touching_zero_navierslip")}) {
      const RunReport& rep = cached_run(name);
      const auto& r = rep.records;
      double min_h = std::numeric_limits<double>::infinity();
      for (const DiagnosticsRecord& rec : r)
        min_h = std::min({min_h, rec.min_u, rec.min_v});
      const double s0 = r.empty() ? 0.0 : r[0].entropy;
      const double e0 = r.empty() ? 0.0 : r[0].energy;
      bool entropy_ok = true;
      double worst_margin = -std::numeric_limits<double>::infinity();
      for (const DiagnosticsRecord& rec : r) {
        const double ceiling =
            std::exp(rec.t / 0.5) * s0 + 0.5 * std::abs(e0);
        if (rec.entropy > ceiling * (1.0 + 1e-12) + 1e-12) entropy_ok = false;
        worst_margin = std::max(worst_margin, rec.entropy - ceiling);
      }
      const bool ok =
          rep.summary.completed && min_h >= tol && entropy_ok;
      pass = pass && ok;
      detail_text << (name == "touching_zero_noslip" ? "" : "; ")
                  << name << ": min height " << detail::num(min_h)
                  << " (bound -1e-8), entropy margin "
                  << detail::num(worst_margin)
                  << (entropy_ok ? " (under ceiling)" : " (ABOVE ceiling)");
    }
    return {6, "nonnegativity_regularized", pass, detail_text.str()};
  }

  // -- 7 -------------------------------------------------------------------
  CriterionResult positivity_potentials() {
    const RunReport& rep = cached_run("positivity");
    const auto& bv = std::get<BornVdW>(rep.scenario.pot);
    const double thr_u = 0.1 * bv.force_root(1);
    const double thr_v = 0.1 * bv.force_root(2);
    double min_u = std::numeric_limits<double>::infinity();
    double min_v = min_u;
    for (const DiagnosticsRecord& rec : rep.records) {
      min_u = std::min(min_u, rec.min_u);
      min_v = std::min(min_v, rec.min_v);
    }
    const double barrier = std::max(positivity_barrier(min_u, rep.scenario.pot, 1),
                                    positivity_barrier(min_v, rep.scenario.pot, 2));
    const bool pass = rep.summary.completed && min_u >= thr_u &&
                      min_v >= thr_v && std::isfinite(barrier);
    return {7, "positivity_potentials", pass,
            "min heights " + detail::num(min_u) + ", " + detail::num(min_v) +
                " stay above " + detail::num(thr_u) +
                "; barrier peaks at " + detail::num(barrier)};
  }

  // -- 8 -------------------------------------------------------------------
  CriterionResult epsilon_convergence() {
    const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5};
    const EpsSweepResult sweep = eps_sweep(detail::sweep_scenario(), eps);
    bool pass = true;
    std::string dists;
    for (std::size_t i = 0; i < sweep.distances.size(); ++i) {
      if (i > 0 && !(sweep.distances[i] <= 1.1 * sweep.distances[i - 1]))
        pass = false;
      dists += (i ? ", " : "") + detail::num(sweep.distances[i]);
    }
    return {8, "epsilon_convergence", pass,
            "consecutive final-state distances " + dists +
                " decrease (10% slack) as epsilon drops 1e-2 -> 1e-5"};
  }

  // -- 9 -------------------------------------------------------------------
  CriterionResult single_layer_reduction() {
    const double dev = single_layer_check(find_scenario("single_layer"));
    return {9, "single_layer_reduction", dev <= 1e-6,
            "coupled run with empty upper layer deviates " + detail::num(dev) +
                " from the scalar reference (bound 1e-6)"};
  }

  // -- 10 ------------------------------------------------------------------
  CriterionResult holder_continuity() {
    const RunReport& rep = cached_run("dewetting");
    std::vector<double> lags;
    for (int k : {1, 2, 4, 8, 16, 32, 64, 100}) lags.push_back(k * 5e-3);
    const HolderReport fit = holder_fit(rep.snapshots, lags);
    const double bound = 1.0 / 8.0 - 0.02;
    const bool pass = fit.applicable && fit.fitted_exponent >= bound;
    return {10, "holder_continuity", pass,
            "fitted time-modulus exponent " +
                detail::num(fit.fitted_exponent) + " (need >= " +
                detail::num(bound) + ", lags 5e-3 .. 5e-1, moduli " +
                detail::num(fit.moduli.front()) + " .. " +
                detail::num(fit.moduli.back()) + ")"};
  }

  // -- 11 ------------------------------------------------------------------
  CriterionResult cumulative_energy_inequality() {
    bool pass = true;
    double worst = -std::numeric_limits<double>::infinity();
    std::string where = "-";
    for (const std::string& name : all_names()) {
      const RunReport& rep = cached_run(name);
      const auto& r = rep.records;
      if (r.empty()) continue;
      double cumulative = 0.0;
      for (std::size_t k = 1; k < r.size(); ++k)
        cumulative +=
            2.0 * r[k].dt * (r[k].dissipation + r[k].eps_dissipation);
      const double lhs = r.back().energy + cumulative;
      const double budget = r[0].energy * (1.0 + 1e-6) +
                            1e-12 * (1.0 + std::abs(r[0].energy));
      if (lhs > budget) pass = false;
      if (lhs - budget > worst) {
        worst = lhs - budget;
        where = name;
      }
    }
    return {11, "cumulative_energy_inequality", pass,
            "E(t_end) + 2 sum dt (D + eps D_eps) overshoots the initial-"
            "energy budget by at most " +
                detail::num(worst) + " (worst on " + where + ")"};
  }

  // -- 12 ------------------------------------------------------------------
  CriterionResult spatial_order() {
    const RefinementResult res =
        refinement_study(detail::refinement_scenario(), 4);
    const bool pass = res.spatial_applicable && res.spatial_order >= 1.8;
    std::string errs;
    for (std::size_t i = 0; i < res.spatial_errors.size(); ++i)
      errs += (i ? ", " : "") + detail::num(res.spatial_errors[i]);
    return {12, "spatial_order", pass,
            "observed spatial order " + detail::num(res.spatial_order) +
                " over grids 64..512 (need >= 1.8; errors " + errs + ")"};
  }
};

/** Formats one pass/fail table row. */
inline std::string format_criterion(const CriterionResult& c) {
  char head[48];
  std::snprintf(head, sizeof head, "[%2d] %-4s %-28s ", c.number,
                c.pass ? "PASS" : "FAIL", c.name.c_str());
  return std::string(head) + c.detail;
}

}  // namespace bilayer
