#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * Core value types shared across the library: nodal height pairs, nodal
 * pressure pairs, and symmetric 2x2 matrices used for mobility evaluations.
 */
namespace bilayer {

/** Heights of the two layers sampled at the grid nodes. */
struct FilmPair {
  std::vector<double> u;  ///< lower-layer height per node
  std::vector<double> v;  ///< upper-layer height per node

  FilmPair() = default;
  FilmPair(std::vector<double> u_, std::vector<double> v_)
      : u(std::move(u_)), v(std::move(v_)) {
    if (u.size() != v.size())
      throw std::invalid_argument("FilmPair: u and v must have equal length");
  }

  std::size_t size() const { return u.size(); }
};

/** Pressures of the two layers sampled at the grid nodes. */
struct PressurePair {
  std::vector<double> p1;  ///< lower-layer pressure per node
  std::vector<double> p2;  ///< upper-layer pressure per node

  std::size_t size() const { return p1.size(); }
};

/** Symmetric 2x2 matrix stored as (m11, m12, m22). */
struct SymMatrix2 {
  double m11 = 0.0;
  double m12 = 0.0;
  double m22 = 0.0;

  double trace() const { return m11 + m22; }
  double det() const { return m11 * m22 - m12 * m12; }

  /** Smallest eigenvalue; exact closed form for the symmetric 2x2 case. */
  double eigen_min() const {
    const double mean = 0.5 * (m11 + m22);
    const double diff = 0.5 * (m11 - m22);
    return mean - std::hypot(diff, m12);
  }

  /** Largest eigenvalue. */
  double eigen_max() const {
    const double mean = 0.5 * (m11 + m22);
    const double diff = 0.5 * (m11 - m22);
    return mean + std::hypot(diff, m12);
  }

  SymMatrix2 operator+(const SymMatrix2& o) const {
    return {m11 + o.m11, m12 + o.m12, m22 + o.m22};
  }
  SymMatrix2 operator*(double a) const { return {a * m11, a * m12, a * m22}; }
};

/** Throws std::invalid_argument unless both members of `s` have `n` entries. */
inline void require_size(const FilmPair& s, std::size_t n, const char* where) {
  if (s.u.size() != n || s.v.size() != n)
    throw std::invalid_argument(std::string(where) +
                                ": state size does not match grid");
}

}  // namespace bilayer
