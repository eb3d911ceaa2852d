#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bilayer/entropy.hpp"
#include "bilayer/quadrature.hpp"

using namespace bilayer;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("gauss-legendre rules integrate polynomials exactly") {
  for (int order : {7, 15}) {
    const auto& [x, w] = gauss_legendre_rule(order);
    REQUIRE(static_cast<int>(x.size()) == order);
    double wsum = 0.0;
    for (double wi : w) wsum += wi;
    REQUIRE(wsum == Approx(2.0).epsilon(1e-14));
    // Exact for degree <= 2*order - 1.
    const int k = 2 * order - 2;
    double acc = 0.0;
    for (int i = 0; i < order; ++i) acc += w[i] * std::pow(x[i], k);
    REQUIRE(acc == Approx(2.0 / (k + 1)).epsilon(1e-12));
    double odd = 0.0;
    for (int i = 0; i < order; ++i) odd += w[i] * std::pow(x[i], 2 * order - 1);
    REQUIRE(odd == Approx(0.0).margin(1e-14));
  }
  REQUIRE_THROWS_AS(gauss_legendre_rule(0), std::invalid_argument);
  REQUIRE_THROWS_AS(gauss_legendre_rule(64), std::invalid_argument);
}

TEST_CASE("adaptive integration handles smooth and kinked integrands") {
  auto sq = [](double x) { return x * x; };
  REQUIRE(adaptive_integrate(sq, 0.0, 1.0, 1e-12) ==
          Approx(1.0 / 3.0).epsilon(1e-12));
  REQUIRE(adaptive_integrate(sq, 1.0, 0.0, 1e-12) ==
          Approx(-1.0 / 3.0).epsilon(1e-12));
  REQUIRE(adaptive_integrate(sq, 2.0, 2.0, 1e-12) == 0.0);
  // |r| has a kink at the origin; the split keeps each panel smooth.
  auto kink = [](double r) { return std::abs(r); };
  REQUIRE(adaptive_integrate(kink, -1.0, 2.0, 1e-12) ==
          Approx(2.5).epsilon(1e-12));
  // A sharply peaked integrand forces the bisection to do real work.
  auto peak = [](double x) { return 1.0 / std::sqrt(x); };
  REQUIRE(adaptive_integrate(peak, 1e-10, 1.0, 1e-10) ==
          Approx(2.0 - 2e-5).epsilon(1e-8));
  REQUIRE_THROWS_AS(adaptive_integrate(sq, 0.0, 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("entropy closed forms at reference points") {
  // Vanishes at the cap for both exponents.
  REQUIRE(entropy_value(1.0, 2, 0.0, 1.0) == 0.0);
  REQUIRE(entropy_value(4.0, 3, 0.0, 4.0) == Approx(0.0).margin(1e-14));
  // Quadratic exponent, A = 1, s = 1/2.
  const double expected2 = 1.0 - 0.5 - 0.5 * std::log(2.0);
  REQUIRE(expected2 == Approx(0.153426).margin(1e-6));
  REQUIRE(entropy_value(0.5, 2, 0.0, 1.0) == Approx(expected2).epsilon(1e-14));
  // Cubic exponent, A = 4, s = 1: 2 (sqrt(4) + 1/sqrt(4) - 2 sqrt(1)) = 1.
  REQUIRE(entropy_value(1.0, 3, 0.0, 4.0) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("entropy closed forms agree with the nested quadrature") {
  for (int n : {2, 3}) {
    for (double s : {0.01, 0.1, 0.35, 0.8, 1.0}) {
      const double closed = entropy_value(s, n, 0.0, 1.0);
      const double quad = entropy_value(s, n, 1e-12, 1.0);
      REQUIRE(std::abs(closed - quad) < 1e-8);
    }
  }
}

TEST_CASE("entropy stays finite at zero height and diverges below") {
  // Quadratic growth saturates at A, cubic at 2 sqrt(A); both finite at 0.
  REQUIRE(entropy_value(0.0, 2, 0.0, 1.0) == Approx(1.0).epsilon(1e-14));
  REQUIRE(entropy_value(0.0, 2, 0.0, 4.0) == Approx(4.0).epsilon(1e-14));
  REQUIRE(entropy_value(0.0, 3, 0.0, 4.0) == Approx(2.0 * 2.0).epsilon(1e-14));
  REQUIRE(std::isinf(entropy_value(-0.1, 2, 0.0, 1.0)));
  REQUIRE(std::isinf(entropy_value(-1e-9, 3, 0.0, 1.0)));
}

TEST_CASE("regularization only lowers the entropy") {
  for (int n : {2, 3}) {
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double A = 2.0;
      const double s = frac * A;
      const double g0 = entropy_value(s, n, 0.0, A);
      const double g3 = entropy_value(s, n, 1e-3, A);
      const double g1 = entropy_value(s, n, 1e-1, A);
      REQUIRE(g3 <= g0 + 1e-12);
      REQUIRE(g1 <= g3 + 1e-12);
    }
  }
}

TEST_CASE("entropy argument validation") {
  REQUIRE_THROWS_AS(entropy_value(0.5, 4, 0.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(entropy_value(0.5, 2, -1e-9, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(entropy_value(0.5, 2, 0.0, 0.0), std::invalid_argument);
  EntropyConfig bad;
  bad.n_u = 5;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  EntropyConfig neg;
  neg.A = -1.0;
  REQUIRE_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("entropy exponents follow the mobility law") {
  REQUIRE(entropy_exponents_for(NoSlip{}) == std::pair{3, 2});
  REQUIRE(entropy_exponents_for(NavierSlip{0.5}) == std::pair{2, 2});
  REQUIRE(entropy_exponents_for(WeakSlip{1.0, 0.0}) == std::pair{2, 2});
}

TEST_CASE("batched entropy evaluation matches the pointwise integral") {
  std::mt19937 rng(808);
  std::uniform_real_distribution<double> heights(0.02, 1.0);
  const double A = 1.0;
  for (int n : {2, 3}) {
    for (double eps : {1e-6, 1e-3}) {
      std::vector<double> s(24);
      for (double& x : s) x = heights(rng);
      const std::vector<double> batch = detail::entropy_batch(s, n, eps, A);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double direct = entropy_value(s[i], n, eps, A);
        REQUIRE(batch[i] == Approx(direct).margin(1e-8));
      }
    }
  }
}

TEST_CASE("batched entropy handles degenerate and slightly negative heights") {
  // The heights a run close to touchdown actually produces: exact zeros,
  // values deep inside the regularization layer, small undershoots, and
  // values next to the cap. The oracle collapses the double integral to
  // int_s^A (q - s) f(q) dq and evaluates it by adaptive quadrature.
  const std::vector<double> s = {0.0,    1e-12, 1e-9,  1e-6, 1e-4,  1e-2,
                                 -5e-3,  -1e-9, 0.35,  2.0,  5.999, 6.0};
  const double A = 6.0;
  for (int n : {2, 3}) {
    for (double eps : {1e-8, 1e-6}) {
      const std::vector<double> batch = detail::entropy_batch(s, n, eps, A);
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double si = s[i];
        const double direct = adaptive_integrate(
            [&](double q) {
              return (q - si) * detail::entropy_integrand(q, n, eps);
            },
            si, A, 1e-11);
        REQUIRE(batch[i] == Approx(direct).margin(1e-8));
        REQUIRE(batch[i] >= -1e-9);  // the entropy is nonnegative
      }
      REQUIRE(batch.back() == Approx(0.0).margin(1e-9));  // vanishes at A
    }
  }
}

TEST_CASE("total entropy of constant layers") {
  const Grid grid(32);
  EntropyConfig cfg;
  cfg.A = 1.0;
  cfg.n_u = 2;
  cfg.n_v = 2;
  cfg.eps = 0.0;

  FilmPair at_cap{std::vector<double>(grid.node_count(), 1.0),
                  std::vector<double>(grid.node_count(), 1.0)};
  REQUIRE(entropy_total(at_cap, cfg, grid) == Approx(0.0).margin(1e-14));

  FilmPair half{std::vector<double>(grid.node_count(), 0.5),
                std::vector<double>(grid.node_count(), 0.5)};
  const double per_node = 2.0 * (1.0 - 0.5 - 0.5 * std::log(2.0));
  REQUIRE(entropy_total(half, cfg, grid) ==
          Approx(per_node).epsilon(1e-13));
  REQUIRE(per_node == Approx(0.306853).margin(1e-6));

  // The regularized total agrees with per-node values under the same config.
  cfg.eps = 1e-4;
  double expected = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i)
    expected += grid.weight(i) * 2.0 * entropy_value(0.5, 2, cfg.eps, cfg.A);
  REQUIRE(entropy_total(half, cfg, grid) == Approx(expected).margin(1e-8));
}

TEST_CASE("entropy total rejects heights above the cap, naming the node") {
  const Grid grid(8);
  EntropyConfig cfg;
  cfg.A = 1.0;
  FilmPair state{std::vector<double>(grid.node_count(), 0.5),
                 std::vector<double>(grid.node_count(), 0.5)};
  state.u[3] = 1.25;
  REQUIRE_THROWS_WITH(entropy_total(state, cfg, grid),
                      ContainsSubstring("node 3"));
  state.u[3] = 0.5;
  state.v[6] = -1.5;  // magnitude above the cap on the other layer
  REQUIRE_THROWS_WITH(entropy_total(state, cfg, grid),
                      ContainsSubstring("node 6"));
}
