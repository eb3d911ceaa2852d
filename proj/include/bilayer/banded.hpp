#pragma once

#include <stdexcept>
#include <vector>

extern "C" {
void dgbsv_(const int* n, const int* kl, const int* ku, const int* nrhs,
            double* ab, const int* ldab, int* ipiv, double* b, const int* ldb,
            int* info);
}

/**
 * Banded matrix in LAPACK general-band layout plus a direct solver. The
 * Newton systems of the stepper are block-pentadiagonal with interleaved
 * unknowns, giving a fixed bandwidth of 5 coupled node pairs.
 */
namespace bilayer {

/** Raised when the banded factorization encounters an exactly zero pivot. */
struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** General band matrix with kl sub- and ku superdiagonals (column-major). */
struct BandedMatrix {
  int n = 0;
  int kl = 0;
  int ku = 0;
  std::vector<double> ab;  ///< (2*kl+ku+1) x n, extra kl rows for pivot fill

  BandedMatrix(int n_, int kl_, int ku_)
      : n(n_), kl(kl_), ku(ku_),
        ab(static_cast<std::size_t>(2 * kl_ + ku_ + 1) * n_, 0.0) {
    if (n_ < 1 || kl_ < 0 || ku_ < 0)
      throw std::invalid_argument("BandedMatrix: bad dimensions");
  }

  int ldab() const { return 2 * kl + ku + 1; }

  bool in_band(int i, int j) const {
    return i >= 0 && j >= 0 && i < n && j < n && j - ku <= i && i <= j + kl;
  }

  /** Mutable entry (i, j); must lie inside the band. */
  double& at(int i, int j) {
    if (!in_band(i, j)) throw std::out_of_range("BandedMatrix::at outside band");
    return ab[static_cast<std::size_t>(j) * ldab() + (kl + ku + i - j)];
  }

  /** Entry (i, j), zero outside the band. */
  double get(int i, int j) const {
    if (!in_band(i, j)) return 0.0;
    return ab[static_cast<std::size_t>(j) * ldab() + (kl + ku + i - j)];
  }

  void clear() { ab.assign(ab.size(), 0.0); }

  /** y = M x. */
  std::vector<double> matvec(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n)
      throw std::invalid_argument("BandedMatrix::matvec size mismatch");
    std::vector<double> y(x.size(), 0.0);
    for (int j = 0; j < n; ++j) {
      const int lo = std::max(0, j - ku);
      const int hi = std::min(n - 1, j + kl);
      for (int i = lo; i <= hi; ++i) y[i] += get(i, j) * x[j];
    }
    return y;
  }
};

/**
 * Solves M x = rhs by banded LU with partial pivoting (LAPACK dgbsv). The
 * matrix is taken by value because the factorization overwrites it.
 */
inline std::vector<double> solve(BandedMatrix m, std::vector<double> rhs) {
  if (static_cast<int>(rhs.size()) != m.n)
    throw std::invalid_argument("solve: rhs size mismatch");
  const int nrhs = 1;
  const int ldab = m.ldab();
  const int ldb = m.n;
  std::vector<int> ipiv(static_cast<std::size_t>(m.n));
  int info = 0;
  dgbsv_(&m.n, &m.kl, &m.ku, &nrhs, m.ab.data(), &ldab, ipiv.data(),
         rhs.data(), &ldb, &info);
  if (info != 0) throw SingularMatrix("banded solve: singular factor");
  return rhs;
}

}  // namespace bilayer
