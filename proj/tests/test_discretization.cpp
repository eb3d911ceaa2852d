#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bilayer/grid.hpp"

using namespace bilayer;
using Catch::Approx;

namespace {

std::vector<double> sample(const Grid& grid, double (*f)(double)) {
  std::vector<double> out(grid.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid.node(i));
  return out;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid grid(8);
  REQUIRE(grid.node_count() == 9);
  REQUIRE(grid.face_count() == 8);
  REQUIRE(grid.dx == Approx(0.125));
  REQUIRE(grid.node(0) == 0.0);
  REQUIRE(grid.node(8) == Approx(1.0));
  REQUIRE(grid.face(0) == Approx(0.0625));
  REQUIRE(grid.weight(0) == Approx(0.0625));
  REQUIRE(grid.weight(4) == Approx(0.125));
  REQUIRE(grid.weight(8) == Approx(0.0625));
  double total = 0.0;
  for (std::size_t i = 0; i < grid.node_count(); ++i) total += grid.weight(i);
  REQUIRE(total == Approx(1.0).epsilon(1e-14));
  REQUIRE_THROWS_AS(Grid(1), std::invalid_argument);
  REQUIRE_THROWS_AS(Grid(0), std::invalid_argument);
}

TEST_CASE("trapezoidal integration") {
  const Grid grid(16);
  const std::vector<double> ones(grid.node_count(), 3.5);
  REQUIRE(integrate(ones, grid) == Approx(3.5).epsilon(1e-14));
  // Affine functions are integrated exactly.
  const std::vector<double> lin = sample(grid, [](double x) { return x; });
  REQUIRE(integrate(lin, grid) == Approx(0.5).epsilon(1e-14));
  // The trapezoid rule on x^2 carries the textbook dx^2/6 correction, exactly.
  const std::vector<double> quad =
      sample(grid, [](double x) { return x * x; });
  REQUIRE(integrate(quad, grid) ==
          Approx(1.0 / 3.0 + grid.dx * grid.dx / 6.0).epsilon(1e-14));
  REQUIRE_THROWS_AS(integrate(std::vector<double>(3, 0.0), grid),
                    std::invalid_argument);
}

TEST_CASE("second difference is exact on quadratics in the interior") {
  const Grid grid(20);
  const std::vector<double> f = sample(grid, [](double x) { return x * x; });
  const std::vector<double> lap = laplacian_neumann(f, grid);
  for (std::size_t i = 1; i + 1 < lap.size(); ++i)
    REQUIRE(lap[i] == Approx(2.0).epsilon(1e-10));
  const std::vector<double> c(grid.node_count(), 7.0);
  for (double x : laplacian_neumann(c, grid)) REQUIRE(x == 0.0);
}

TEST_CASE("second difference converges at second order with reflected ghosts") {
  // cos(pi x) satisfies the zero-slope boundary condition, so the boundary
  // rows are consistent too and the error is O(dx^2) everywhere.
  auto worst = [](int n) {
    const Grid grid(n);
    const std::vector<double> f =
        sample(grid, [](double x) { return std::cos(M_PI * x); });
    const std::vector<double> lap = laplacian_neumann(f, grid);
    double err = 0.0;
    for (std::size_t i = 0; i < lap.size(); ++i) {
      const double want = -M_PI * M_PI * std::cos(M_PI * grid.node(i));
      err = std::max(err, std::abs(lap[i] - want));
    }
    return err;
  };
  const double e64 = worst(64);
  const double e128 = worst(128);
  REQUIRE(e64 <= 0.01);
  REQUIRE(e64 / e128 == Approx(4.0).margin(0.6));
}

TEST_CASE("face gradient is the exact midpoint derivative for quadratics") {
  const Grid grid(10);
  const std::vector<double> c(grid.node_count(), 2.0);
  for (double g : face_gradient(c, grid).values) REQUIRE(g == 0.0);
  const std::vector<double> lin =
      sample(grid, [](double x) { return 3.0 * x; });
  for (double g : face_gradient(lin, grid).values)
    REQUIRE(g == Approx(3.0).epsilon(1e-13));
  const std::vector<double> quad =
      sample(grid, [](double x) { return x * x; });
  const FaceField g = face_gradient(quad, grid);
  for (std::size_t f = 0; f < g.size(); ++f)
    REQUIRE(g[f] == Approx(2.0 * grid.face(f)).epsilon(1e-12));
}

TEST_CASE("divergence telescopes to zero total for any flux") {
  const Grid grid(33);
  FaceField zero;
  zero.values.assign(grid.face_count(), 0.0);
  for (double d : divergence_zero_flux(zero, grid)) REQUIRE(d == 0.0);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> amp(-5.0, 5.0);
  for (int trial = 0; trial < 25; ++trial) {
    FaceField flux;
    flux.values.resize(grid.face_count());
    for (double& x : flux.values) x = amp(rng);
    const std::vector<double> div = divergence_zero_flux(flux, grid);
    double weighted_sum = 0.0;
    for (std::size_t i = 0; i < div.size(); ++i)
      weighted_sum += grid.weight(i) * div[i];
    REQUIRE(std::abs(weighted_sum) <= 1e-14 * grid.face_count());
  }
}

TEST_CASE("constant flux concentrates the divergence at the walls") {
  const Grid grid(12);
  const double c = 1.75;
  FaceField flux;
  flux.values.assign(grid.face_count(), c);
  const std::vector<double> div = divergence_zero_flux(flux, grid);
  REQUIRE(div.front() == Approx(c / (0.5 * grid.dx)).epsilon(1e-14));
  REQUIRE(div.back() == Approx(-c / (0.5 * grid.dx)).epsilon(1e-14));
  for (std::size_t i = 1; i + 1 < div.size(); ++i) REQUIRE(div[i] == 0.0);
  FaceField bad;
  bad.values.assign(grid.face_count() + 1, 0.0);
  REQUIRE_THROWS_AS(divergence_zero_flux(bad, grid), std::invalid_argument);
}

TEST_CASE("divergence and face gradient satisfy summation by parts") {
  // sum_i w_i z_i (div J)_i = -dx sum_f J_f (grad z)_f for every z and J;
  // this identity is what turns the flux form into an energy estimate.
  const Grid grid(27);
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> z(grid.node_count());
    for (double& x : z) x = amp(rng);
    FaceField flux;
    flux.values.resize(grid.face_count());
    for (double& x : flux.values) x = amp(rng);

    const std::vector<double> div = divergence_zero_flux(flux, grid);
    double lhs = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      lhs += grid.weight(i) * z[i] * div[i];
    const FaceField gz = face_gradient(z, grid);
    double rhs = 0.0;
    for (std::size_t f = 0; f < gz.size(); ++f) rhs -= grid.dx * flux[f] * gz[f];
    REQUIRE(lhs == Approx(rhs).margin(1e-12));
  }
}

TEST_CASE("laplacian equals divergence of the face gradient") {
  const Grid grid(41);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> z(grid.node_count());
  for (double& x : z) x = amp(rng);
  const std::vector<double> lap = laplacian_neumann(z, grid);
  const std::vector<double> divgrad =
      divergence_zero_flux(face_gradient(z, grid), grid);
  for (std::size_t i = 0; i < z.size(); ++i)
    REQUIRE(lap[i] == Approx(divgrad[i]).margin(1e-9));
}

TEST_CASE("laplacian row coefficients reproduce the operator") {
  const Grid grid(9);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> z(grid.node_count());
  for (double& x : z) x = amp(rng);
  const std::vector<double> lap = laplacian_neumann(z, grid);
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(z.size()); ++j) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(z.size()); ++k)
      acc += detail::lap_coef(grid, j, k) * z[k];
    REQUIRE(acc == Approx(lap[j]).margin(1e-10));
  }
  REQUIRE(detail::lap_coef(grid, -1, 0) == 0.0);
  REQUIRE(detail::lap_coef(grid, 0, 5) == 0.0);
}

TEST_CASE("face mobility averages heights before the matrix law") {
  const PhysicalParams params{1.0, 1.0};
  const Grid grid(4);
  FilmPair constant{std::vector<double>(grid.node_count(), 0.8),
                    std::vector<double>(grid.node_count(), 0.6)};
  const auto faces = face_mobility(constant, NoSlip{}, params, 1e-7, grid);
  const SymMatrix2 nodal = mobility_eval(NoSlip{}, params, 0.8, 0.6, 1e-7);
  REQUIRE(faces.size() == grid.face_count());
  for (const SymMatrix2& m : faces) {
    REQUIRE(m.m11 == Approx(nodal.m11).epsilon(1e-15));
    REQUIRE(m.m12 == Approx(nodal.m12).epsilon(1e-15));
    REQUIRE(m.m22 == Approx(nodal.m22).epsilon(1e-15));
  }

  // Adjacent heights 0 and 2 average to 1 across the shared face.
  FilmPair ramp{std::vector<double>{0.0, 2.0, 2.0, 2.0, 2.0},
                std::vector<double>(grid.node_count(), 1.0)};
  const auto ramp_faces = face_mobility(ramp, NoSlip{}, params, 0.0, grid);
  const SymMatrix2 at_one = mobility_eval(NoSlip{}, params, 1.0, 1.0, 0.0);
  REQUIRE(ramp_faces[0].m11 == Approx(at_one.m11).epsilon(1e-15));
  REQUIRE(ramp_faces[0].m12 == Approx(at_one.m12).epsilon(1e-15));
  REQUIRE(ramp_faces[0].m22 == Approx(at_one.m22).epsilon(1e-15));
}

TEST_CASE("face mobility stays positive semidefinite for random states") {
  const PhysicalParams params{1.0, 2.5};
  const Grid grid(17);
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> amp(-3.0, 3.0);
  for (const MobilityModel& model :
       {MobilityModel{NoSlip{}}, MobilityModel{NavierSlip{1.0}},
        MobilityModel{WeakSlip{0.5, 0.5}}}) {
    for (int trial = 0; trial < 30; ++trial) {
      FilmPair state{std::vector<double>(grid.node_count()),
                     std::vector<double>(grid.node_count())};
      for (double& x : state.u) x = amp(rng);
      for (double& x : state.v) x = amp(rng);
      for (const SymMatrix2& m :
           face_mobility(state, model, params, 0.0, grid))
        REQUIRE(m.eigen_min() >= -1e-12);
    }
  }
}

TEST_CASE("harmonic face averaging variant") {
  REQUIRE(detail::face_average(1.0, 1.0, FaceAveraging::HarmonicMean) ==
          Approx(1.0));
  REQUIRE(detail::face_average(0.0, 2.0, FaceAveraging::HarmonicMean) == 0.0);
  REQUIRE(detail::face_average(1.0, 3.0, FaceAveraging::HarmonicMean) ==
          Approx(1.5));
  REQUIRE(detail::face_average(0.0, 0.0, FaceAveraging::HarmonicMean) == 0.0);
  REQUIRE(detail::face_average(1.0, 3.0, FaceAveraging::ArithmeticMean) ==
          Approx(2.0));
}

TEST_CASE("layer masses are the trapezoidal integrals") {
  const Grid grid(32);
  FilmPair state{std::vector<double>(grid.node_count()),
                 std::vector<double>(grid.node_count())};
  for (std::size_t i = 0; i < state.size(); ++i) {
    state.u[i] = 1.0 + 0.2 * std::cos(M_PI * grid.node(i));
    state.v[i] = 0.5;
  }
  const auto [mu_mass, mv_mass] = masses(state, grid);
  // The cosine integrates to zero exactly (trapezoid sums a symmetric mode).
  REQUIRE(mu_mass == Approx(1.0).margin(1e-14));
  REQUIRE(mv_mass == Approx(0.5).margin(1e-14));
}
