#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bilayer/banded.hpp"

using namespace bilayer;
using Catch::Approx;

namespace {

/// Plain dense Gaussian elimination with partial pivoting; the oracle the
/// banded LAPACK path is checked against.
std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    REQUIRE(std::abs(a[col][col]) > 0.0);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace

TEST_CASE("band storage addressing") {
  BandedMatrix m(6, 2, 1);
  REQUIRE(m.ldab() == 6);
  REQUIRE(m.in_band(0, 0));
  REQUIRE(m.in_band(2, 0));
  REQUIRE(!m.in_band(3, 0));  // below the band
  REQUIRE(!m.in_band(0, 2));  // above the band
  REQUIRE(!m.in_band(-1, 0));
  REQUIRE(!m.in_band(0, 6));

  m.at(1, 2) = 4.5;
  REQUIRE(m.get(1, 2) == 4.5);
  REQUIRE(m.get(0, 2) == 0.0);  // outside the band reads as zero
  REQUIRE_THROWS_AS(m.at(0, 2), std::out_of_range);
  REQUIRE_THROWS_AS(m.at(5, 1), std::out_of_range);
  REQUIRE_THROWS_AS(BandedMatrix(0, 1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(BandedMatrix(4, -1, 1), std::invalid_argument);

  m.clear();
  REQUIRE(m.get(1, 2) == 0.0);
}

TEST_CASE("matvec agrees with dense multiplication") {
  const int n = 9, kl = 2, ku = 3;
  BandedMatrix m(n, kl, ku);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> amp(-2.0, 2.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.in_band(i, j)) {
        const double x = amp(rng);
        m.at(i, j) = x;
        dense[i][j] = x;
      }
  std::vector<double> v(n);
  for (double& x : v) x = amp(rng);
  const std::vector<double> got = m.matvec(v);
  for (int i = 0; i < n; ++i) {
    double want = 0.0;
    for (int j = 0; j < n; ++j) want += dense[i][j] * v[j];
    REQUIRE(got[i] == Approx(want).margin(1e-13));
  }
  REQUIRE_THROWS_AS(m.matvec(std::vector<double>(n + 1, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("banded solve matches dense elimination on random systems") {
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  for (const auto& [n, kl, ku] :
       {std::tuple{12, 1, 1}, std::tuple{40, 2, 3}, std::tuple{66, 5, 5}}) {
    BandedMatrix m(n, kl, ku);
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (m.in_band(i, j)) {
          double x = amp(rng);
          if (i == j) x += 4.0;  // keep the system comfortably nonsingular
          m.at(i, j) = x;
          dense[i][j] = x;
        }
    std::vector<double> rhs(n);
    for (double& x : rhs) x = amp(rng);

    const std::vector<double> got = solve(m, rhs);
    const std::vector<double> want = dense_solve(dense, rhs);
    for (int i = 0; i < n; ++i)
      REQUIRE(got[i] == Approx(want[i]).margin(1e-11));

    // And the solution actually solves the system.
    const std::vector<double> back = m.matvec(got);
    for (int i = 0; i < n; ++i)
      REQUIRE(back[i] == Approx(rhs[i]).margin(1e-11));
  }
}

TEST_CASE("identity band returns the right-hand side") {
  const int n = 15;
  BandedMatrix m(n, 2, 2);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = 0.5 * i - 3.0;
  const std::vector<double> x = solve(m, rhs);
  for (int i = 0; i < n; ++i) REQUIRE(x[i] == Approx(rhs[i]).epsilon(1e-15));
}

TEST_CASE("singular systems are reported, not silently solved") {
  BandedMatrix zero(5, 1, 1);
  REQUIRE_THROWS_AS(solve(zero, std::vector<double>(5, 1.0)), SingularMatrix);

  BandedMatrix rank_deficient(3, 1, 1);
  rank_deficient.at(0, 0) = 1.0;
  rank_deficient.at(1, 1) = 1.0;  // last row/column stays zero
  REQUIRE_THROWS_AS(solve(rank_deficient, std::vector<double>(3, 1.0)),
                    SingularMatrix);

  BandedMatrix ok(3, 1, 1);
  ok.at(0, 0) = ok.at(1, 1) = ok.at(2, 2) = 2.0;
  REQUIRE_THROWS_AS(solve(ok, std::vector<double>(4, 0.0)),
                    std::invalid_argument);
}
