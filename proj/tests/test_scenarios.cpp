#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bilayer/harness.hpp"

using namespace bilayer;
using Catch::Approx;

namespace {

bool has_check(const RunReport& report, const std::string& name) {
  for (const CheckResult& c : report.checks)
    if (c.name == name) return true;
  return false;
}

const CheckResult& get_check(const RunReport& report, const std::string& name) {
  for (const CheckResult& c : report.checks)
    if (c.name == name) return c;
  throw std::runtime_error("missing check: " + name);
}

}  // namespace

TEST_CASE("constant and cosine profiles sample exactly") {
  const Grid grid(20);
  const FilmPair flat = realize(ConstantIC{1.25, 0.5}, grid);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    REQUIRE(flat.u[i] == 1.25);
    REQUIRE(flat.v[i] == 0.5);
  }

  const CosinePerturbedIC cp{1.0, 0.8, 0.1, -0.05, 2};
  const FilmPair wavy = realize(cp, grid);
  for (std::size_t i = 0; i < wavy.size(); ++i) {
    const double w = std::cos(2.0 * M_PI * grid.node(i));
    REQUIRE(wavy.u[i] == Approx(1.0 + 0.1 * w).margin(1e-15));
    REQUIRE(wavy.v[i] == Approx(0.8 - 0.05 * w).margin(1e-15));
  }
}

TEST_CASE("the touching-zero profile has an exact dead zone and C1 walls") {
  const Grid grid(40);  // dx = 0.025 puts nodes on x = 0.175 and x = 0.825
  const TouchingZeroIC tz{2.0, 1.0, 0.35, 0.65};
  const FilmPair s = realize(tz, grid);

  REQUIRE(s.u[0] == 2.0);  // full plateau height at the walls
  REQUIRE(s.v[0] == 1.0);
  REQUIRE(s.u[grid.n_cells] == 2.0);

  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = grid.node(i);
    REQUIRE(s.u[i] >= 0.0);
    if (x >= 0.35 && x <= 0.65) {
      REQUIRE(s.u[i] == 0.0);
      REQUIRE(s.v[i] == 0.0);
    }
  }

  REQUIRE(s.u[7] == Approx(1.0).margin(1e-14));   // halfway down the descent
  REQUIRE(s.u[33] == Approx(1.0).margin(1e-14));  // mirrored on the right

  // Zero slope at the wall: one-step drop is O(dx^2), not O(dx).
  const double drop = std::abs(s.u[0] - s.u[1]);
  REQUIRE(drop <= 3.0 * 2.0 * grid.dx * grid.dx / (0.35 * 0.35));

  // C1 touchdown: the profile flattens quadratically into the dead zone.
  const double near = detail::touching_profile(0.35 - grid.dx, 2.0, 0.35, 0.65);
  REQUIRE(near <= 3.0 * 2.0 * 2.0 * grid.dx * grid.dx / (0.35 * 0.35));
}

TEST_CASE("the quadratic cap is continuous, monotone, and exact at the knot") {
  REQUIRE(detail::quadratic_cap(0.0) == 1.0);
  REQUIRE(detail::quadratic_cap(-2.0) == 1.0);
  REQUIRE(detail::quadratic_cap(1.0) == 0.0);
  REQUIRE(detail::quadratic_cap(2.0) == 0.0);
  REQUIRE(detail::quadratic_cap(0.5) == 0.5);  // both branches meet here
  REQUIRE(1.0 - 2.0 * 0.5 * 0.5 == 0.5);
  REQUIRE(2.0 * (1.0 - 0.5) * (1.0 - 0.5) == 0.5);
  double prev = 1.0;
  for (int k = 1; k <= 20; ++k) {
    const double val = detail::quadratic_cap(k / 20.0);
    REQUIRE(val <= prev);
    prev = val;
  }
}

TEST_CASE("initial-condition validation rejects malformed profiles") {
  REQUIRE_THROWS_AS(validate(ICDescriptor{ConstantIC{-0.1, 1.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{CosinePerturbedIC{0.1, 1.0, 0.2, 0.0, 1}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{CosinePerturbedIC{1.0, 1.0, 0.1, 0.0, 0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{TouchingZeroIC{-1.0, 1.0, 0.3, 0.7}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{TouchingZeroIC{1.0, 1.0, 0.0, 0.7}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{TouchingZeroIC{1.0, 1.0, 0.6, 0.5}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(validate(ICDescriptor{TouchingZeroIC{1.0, 1.0, 0.3, 1.0}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(realize(ConstantIC{1.0, -2.0}, Grid(8)),
                    std::invalid_argument);
}

TEST_CASE("the built-in experiment catalogue is complete and well-formed") {
  const std::vector<Scenario> all = named_scenarios();
  REQUIRE(all.size() == 7);
  const std::vector<std::string> names = {
      "steady",       "relaxation",
      "dewetting",    "positivity",
      "touching_zero_noslip", "touching_zero_navierslip",
      "single_layer"};
  for (std::size_t i = 0; i < all.size(); ++i) {
    REQUIRE(all[i].name == names[i]);
    REQUIRE_NOTHROW(all[i].validate());
    const FilmPair init = all[i].initial();
    REQUIRE(init.size() == all[i].grid.node_count());
    for (double x : init.u) REQUIRE(x >= 0.0);
    for (double x : init.v) REQUIRE(x >= 0.0);
  }
  REQUIRE(find_scenario("dewetting").name == "dewetting");
  REQUIRE_THROWS_AS(find_scenario("melting"), std::invalid_argument);
  REQUIRE_THROWS_WITH(find_scenario("melting"), "unknown scenario: melting");

  const Scenario coarse = find_scenario("relaxation").with_grid(32);
  REQUIRE(coarse.grid.n_cells == 32);
  REQUIRE(coarse.name == "relaxation");
  REQUIRE(coarse.initial().size() == 33);
}

TEST_CASE("entropy configuration follows the model and the initial data") {
  const Scenario steady = find_scenario("steady");
  const EntropyConfig e1 = entropy_config_for(steady);
  REQUIRE(e1.A == 4.0);  // twice (largest initial height + 1)
  REQUIRE(std::pair{e1.n_u, e1.n_v} == std::pair{3, 2});
  REQUIRE(e1.eps == steady.solver.epsilon);

  const EntropyConfig e2 =
      entropy_config_for(find_scenario("touching_zero_navierslip"));
  REQUIRE(std::pair{e2.n_u, e2.n_v} == std::pair{2, 2});
}

TEST_CASE("the steady experiment passes its whole checklist without moving") {
  const RunReport report = run_scenario(find_scenario("steady"));
  REQUIRE(report.summary.completed);
  REQUIRE(report.all_passed());
  for (const std::string name :
       {"completed", "mass_conservation_u", "mass_conservation_v",
        "energy_nonincreasing", "cumulative_dissipation", "entropy_ceiling"}) {
    REQUIRE(has_check(report, name));
    REQUIRE(get_check(report, name).pass);
  }
  REQUIRE(!has_check(report, "nonnegativity"));      // not touching zero
  REQUIRE(!has_check(report, "positivity_barrier"));  // no potential
  REQUIRE(report.checks.size() == 6);
  REQUIRE(report.records.size() ==
          static_cast<std::size_t>(report.summary.steps_accepted) + 1);
  REQUIRE(report.snapshots.empty());

  const FilmPair init = report.scenario.initial();
  for (std::size_t i = 0; i < init.size(); ++i) {
    REQUIRE(report.summary.final.u[i] == init.u[i]);
    REQUIRE(report.summary.final.v[i] == init.v[i]);
  }
}

TEST_CASE("a shortened relaxation run decays and captures snapshots") {
  Scenario s = find_scenario("relaxation").with_grid(64);
  s.t_end = 0.02;
  RunScenarioOptions opts;
  opts.snapshot_times = {5e-3, 1e-2};
  const RunReport report = run_scenario(s, opts);
  REQUIRE(report.summary.completed);
  REQUIRE(report.all_passed());

  REQUIRE(report.snapshots.size() == 3);
  REQUIRE(report.snapshots[0].t == 0.0);
  REQUIRE(report.snapshots[1].t == Approx(5e-3).margin(1e-12));
  REQUIRE(report.snapshots[2].t == Approx(1e-2).margin(1e-12));

  const auto& recs = report.records;
  REQUIRE(recs.back().energy < recs.front().energy);
  auto spread = [](const std::vector<double>& f) {
    return *std::max_element(f.begin(), f.end()) -
           *std::min_element(f.begin(), f.end());
  };
  REQUIRE(spread(report.summary.final.u) < spread(report.scenario.initial().u));

  RunScenarioOptions capped;
  capped.max_steps = 5;
  const RunReport partial = run_scenario(s, capped);
  REQUIRE(!partial.summary.completed);
  REQUIRE(!partial.all_passed());
  REQUIRE(!get_check(partial, "completed").pass);
  REQUIRE(get_check(partial, "completed").note == "stopped before t_end");
}

TEST_CASE("a Born-stabilized run reports the positivity barrier") {
  Scenario s = find_scenario("positivity").with_grid(32);
  s.t_end = 0.02;
  const RunReport report = run_scenario(s);
  REQUIRE(report.summary.completed);
  REQUIRE(has_check(report, "positivity_barrier"));
  REQUIRE(!has_check(report, "entropy_ceiling"));
  const CheckResult& barrier = get_check(report, "positivity_barrier");
  REQUIRE(barrier.pass);
  REQUIRE(barrier.value >= barrier.threshold);
  REQUIRE(barrier.threshold ==
          Approx(0.1 * std::pow(0.1, 1.0 / 9.0)).epsilon(1e-12));
  REQUIRE(report.all_passed());
}

TEST_CASE("an epsilon sweep of a steady state is flat") {
  const Scenario s = find_scenario("steady").with_grid(16);
  const std::vector<double> eps = {1e-3, 1e-4, 1e-5};
  const EpsSweepResult cold = eps_sweep(s, eps);
  REQUIRE(cold.eps == eps);
  REQUIRE(cold.finals.size() == 3);
  REQUIRE(cold.distances.size() == 2);
  for (double d : cold.distances) REQUIRE(d == 0.0);

  const EpsSweepResult warm = eps_sweep(s, eps, true);
  for (double d : warm.distances) REQUIRE(d == 0.0);

  REQUIRE_THROWS_AS(eps_sweep(s, {1e-3, 1e-4}), std::invalid_argument);
  REQUIRE_THROWS_AS(eps_sweep(s, {1e-3, 0.0, 1e-5}), std::invalid_argument);
  REQUIRE_THROWS_AS(eps_sweep(s, {1e-5, 1e-4, 1e-3}), std::invalid_argument);
}

TEST_CASE("refinement of a steady state is reported as not applicable") {
  const Scenario s = find_scenario("steady").with_grid(8);
  const RefinementResult res = refinement_study(s, 3);
  REQUIRE(res.grids == std::vector<int>{8, 16, 32});
  REQUIRE(res.spatial_errors.size() == 2);
  REQUIRE(res.temporal_errors.size() == 2);
  for (double e : res.spatial_errors) REQUIRE(e <= 1e-13);
  for (double e : res.temporal_errors) REQUIRE(e <= 1e-13);
  REQUIRE(!res.spatial_applicable);
  REQUIRE(!res.temporal_applicable);
  REQUIRE(std::isnan(res.spatial_order));
  REQUIRE(std::isnan(res.temporal_order));
  REQUIRE_THROWS_AS(refinement_study(s, 2), std::invalid_argument);
}

TEST_CASE("the coupled solver degenerates to the scalar one on v = 0 data") {
  Scenario s = find_scenario("single_layer");
  s.t_end = 0.02;
  const double dev_cubic = single_layer_check(s);
  REQUIRE(dev_cubic <= 1e-6);

  Scenario quad = s;
  quad.model = NavierSlip{0.3};
  quad.t_end = 0.01;
  const double dev_quadratic = single_layer_check(quad);
  REQUIRE(dev_quadratic <= 1e-6);

  Scenario weak = s;
  weak.model = WeakSlip{};
  REQUIRE_THROWS_AS(single_layer_check(weak), std::invalid_argument);

  REQUIRE_THROWS_AS(single_layer_check(find_scenario("relaxation")),
                    std::invalid_argument);
}

TEST_CASE("scenario-level validation composes the member validators") {
  Scenario s = find_scenario("steady");
  s.t_end = 0.0;
  REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
  s = find_scenario("steady");
  s.params.mu = -1.0;
  REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
  s = find_scenario("steady");
  s.solver.newton_max_iter = 0;
  REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
  s = find_scenario("steady");
  s.ic = CosinePerturbedIC{0.05, 1.0, 0.2, 0.0, 1};
  REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
  REQUIRE_THROWS_AS(run_scenario(s), std::invalid_argument);
}