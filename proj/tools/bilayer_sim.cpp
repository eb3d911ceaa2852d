// Command-line driver: configured runs, epsilon sweeps, refinement studies,
// and the built-in invariant suite.
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilayer/checks.hpp"
#include "bilayer/config.hpp"
#include "bilayer/harness.hpp"
#include "bilayer/io.hpp"

namespace {

bilayer::ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return bilayer::parse_config_text(buf.str());
}

std::string snapshot_name(std::size_t step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "snapshot_%06zu.txt", step);
  return buf;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
  bilayer::ParsedConfig pc = load_config(config_path);
  if (!out_dir.empty()) pc.output.dir = out_dir;
  const bilayer::Scenario& s = pc.scenario;
  s.validate();
  bilayer::ensure_dir(pc.output.dir);
  const std::string tag = bilayer::model_tag(s.model);

  const bilayer::Problem prob = s.problem();
  const bilayer::EntropyConfig ecfg = bilayer::entropy_config_for(s);
  bilayer::DiagnosticsRecorder recorder(prob, s.solver, ecfg);

  auto write_snap = [&](const bilayer::FilmPair& state, double t,
                        const std::string& name) {
    const bilayer::PressurePair p =
        bilayer::pressures(state, s.params, s.pot, s.grid);
    bilayer::write_snapshot(pc.output.dir + "/" + name, t, s.grid, tag,
                            pc.hash, state, p);
  };

  auto sink = [&](const bilayer::FilmPair& state,
                  const bilayer::StepInfo& info) {
    recorder.observe(state, info);
    const std::size_t step = recorder.records().size() - 1;
    if (pc.output.snapshot_every > 0 && step > 0 &&
        step % static_cast<std::size_t>(pc.output.snapshot_every) == 0)
      write_snap(state, info.t, snapshot_name(step));
  };

  bilayer::RunReport report;
  report.scenario = s;
  report.entropy_cfg = ecfg;
  report.summary = bilayer::run(s.initial(), s.t_end, s.solver, prob, sink);
  report.records = recorder.records();
  bilayer::detail::evaluate_checks(report);

  if (pc.output.csv)
    bilayer::write_series(report.records, pc.output.dir + "/series.csv");
  write_snap(report.summary.final, report.summary.t_reached,
             "snapshot_final.txt");
  {
    std::ofstream cfg(pc.output.dir + "/config_resolved.json");
    cfg << pc.canonical << '\n';
  }

  std::cout << "run " << (report.summary.completed ? "completed" : "ABORTED")
            << ": t = " << bilayer::format_full(report.summary.t_reached)
            << ", accepted steps = " << report.summary.steps_accepted
            << ", rejected = " << report.summary.steps_rejected << '\n';
  if (!report.records.empty())
    std::cout << "final energy = "
              << bilayer::format_full(report.records.back().energy)
              << ", min heights = "
              << bilayer::format_full(report.records.back().min_u) << ", "
              << bilayer::format_full(report.records.back().min_v) << '\n';
  std::cout << "outputs in " << pc.output.dir << " (config " << pc.hash
            << ")\n";

  bool ok = true;
  for (const bilayer::CheckResult& c : report.checks) {
    std::cout << "  " << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << '\n';
    ok = ok && c.pass;
  }
  if (!ok) {
    for (const bilayer::CheckResult& c : report.checks)
      if (!c.pass) {
        std::cout << "invariant failure: " << c.name << '\n';
        break;
      }
    return 2;
  }
  return 0;
}

int run_sweep(const std::string& config_path,
              const std::vector<double>& eps_list) {
  const bilayer::ParsedConfig pc = load_config(config_path);
  const bilayer::EpsSweepResult sweep =
      bilayer::eps_sweep(pc.scenario, eps_list);
  std::cout << "epsilon        final min_u      final min_v      "
               "distance to previous\n";
  for (std::size_t i = 0; i < sweep.eps.size(); ++i) {
    double mn_u = sweep.finals[i].u[0], mn_v = sweep.finals[i].v[0];
    for (std::size_t k = 0; k < sweep.finals[i].size(); ++k) {
      mn_u = std::min(mn_u, sweep.finals[i].u[k]);
      mn_v = std::min(mn_v, sweep.finals[i].v[k]);
    }
    std::printf("%-14.6g %-16.9g %-16.9g %s\n", sweep.eps[i], mn_u, mn_v,
                i == 0 ? "-"
                       : bilayer::format_full(sweep.distances[i - 1]).c_str());
  }
  return 0;
}

int run_refine(const std::string& config_path, int levels) {
  const bilayer::ParsedConfig pc = load_config(config_path);
  const bilayer::RefinementResult res =
      bilayer::refinement_study(pc.scenario, levels);
  std::cout << "spatial refinement (fixed dt = "
            << bilayer::format_full(pc.scenario.solver.dt_init) << "):\n";
  for (std::size_t j = 0; j < res.spatial_errors.size(); ++j)
    std::printf("  n_cells %-6d error vs finest %.9g\n", res.grids[j],
                res.spatial_errors[j]);
  if (res.spatial_applicable)
    std::printf("  observed spatial order %.3f\n", res.spatial_order);
  else
    std::cout << "  spatial errors at roundoff; order not applicable\n";
  std::cout << "temporal refinement (grid n_cells = "
            << pc.scenario.grid.n_cells << "):\n";
  for (std::size_t j = 0; j < res.temporal_errors.size(); ++j)
    std::printf("  dt %-12.6g error vs finest %.9g\n", res.dts[j],
                res.temporal_errors[j]);
  if (res.temporal_applicable)
    std::printf("  observed temporal order %.3f\n", res.temporal_order);
  else
    std::cout << "  temporal errors at roundoff; order not applicable\n";
  return 0;
}

int run_check() {
  bilayer::AcceptanceSuite suite;
  const std::vector<bilayer::CriterionResult> results = suite.run_all();
  bool all = true;
  for (const bilayer::CriterionResult& c : results) {
    std::cout << bilayer::format_criterion(c) << '\n';
    all = all && c.pass;
  }
  if (!all) {
    for (const bilayer::CriterionResult& c : results)
      if (!c.pass) {
        std::cout << "invariant failure: " << c.name << '\n';
        break;
      }
    return 2;
  }
  std::cout << "all " << results.size() << " criteria passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-preserving two-layer thin-film simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<double> eps_list;
  int levels = 3;

  CLI::App* sim = app.add_subcommand("simulate", "Run one configured case");
  sim->add_option("--config", config_path, "JSON run configuration")
      ->required();
  sim->add_option("--out", out_dir, "output directory (overrides config)");

  CLI::App* sweep = app.add_subcommand(
      "sweep-eps", "Re-run one case over a list of regularization strengths");
  sweep->add_option("--config", config_path, "JSON run configuration")
      ->required();
  sweep
      ->add_option("--eps", eps_list,
                   "comma-separated epsilon values, non-increasing")
      ->required()
      ->delimiter(',');

  CLI::App* refine = app.add_subcommand(
      "refine", "Grid and step refinement study around one case");
  refine->add_option("--config", config_path, "JSON run configuration")
      ->required();
  refine->add_option("--levels", levels, "number of refinement levels (>= 3)");

  app.add_subcommand("check",
                     "Run the built-in invariant suite (pass/fail table)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("simulate")) return run_simulate(config_path, out_dir);
    if (app.got_subcommand("sweep-eps")) return run_sweep(config_path, eps_list);
    if (app.got_subcommand("refine")) return run_refine(config_path, levels);
    return run_check();
  } catch (const bilayer::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
