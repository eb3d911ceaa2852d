#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "bilayer/types.hpp"

/**
 * Continuous model: physical parameters, the three mobility laws, and the
 * intermolecular potential laws. All evaluations are pure and know nothing
 * about grids.
 */
namespace bilayer {

/** Dimensionless ratios of the two layers' material constants. */
struct PhysicalParams {
  double sigma = 1.0;  ///< surface-tension ratio, > 0
  double mu = 1.0;     ///< viscosity ratio, > 0

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  }
};

/** No-slip conditions at both interfaces (cubic mobility law). */
struct NoSlip {};

/** Strong-slip limit with slip parameter alpha >= 0 (quadratic mobility law). */
struct NavierSlip {
  double alpha = 0.0;
};

/** Weak-slip conditions with slip lengths b1 > 0 (substrate) and b >= 0. */
struct WeakSlip {
  double b1 = 1.0;
  double b = 0.0;

  /** Slip parameter of the associated quadratic law: (b/b1)(mu+1). */
  double navier_limit_alpha(double mu) const { return b / b1 * (mu + 1.0); }
};

using MobilityModel = std::variant<NoSlip, NavierSlip, WeakSlip>;

inline void validate(const MobilityModel& model) {
  if (const auto* ns = std::get_if<NavierSlip>(&model)) {
    if (!(ns->alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  } else if (const auto* ws = std::get_if<WeakSlip>(&model)) {
    if (!(ws->b1 > 0.0)) throw std::invalid_argument("b1 must be > 0");
    if (!(ws->b >= 0.0)) throw std::invalid_argument("b must be >= 0");
  }
}

/** Short lowercase tag used in file headers and logs. */
inline std::string model_tag(const MobilityModel& model) {
  if (std::holds_alternative<NoSlip>(model)) return "no_slip";
  if (std::holds_alternative<NavierSlip>(model)) return "navier_slip";
  return "weak_slip";
}

/**
 * Mobility matrix M(|u|,|v|) with eps added to both diagonal entries.
 *
 * The absolute-value convention keeps the matrix positive semidefinite for
 * arbitrary sign patterns; eps > 0 makes it positive definite.
 */
inline SymMatrix2 mobility_eval(const MobilityModel& model,
                                const PhysicalParams& params, double u,
                                double v, double eps) {
  if (!std::isfinite(u) || !std::isfinite(v))
    throw std::invalid_argument("mobility_eval: non-finite height");
  const double a = std::abs(u);
  const double c = std::abs(v);
  const double mu = params.mu;
  SymMatrix2 m;
  if (std::holds_alternative<NoSlip>(model)) {
    m.m11 = a * a * a / (3.0 * mu);
    m.m12 = a * a * c / (2.0 * mu);
    m.m22 = c * c * c / 3.0 + a * c * c / mu;
  } else if (const auto* ns = std::get_if<NavierSlip>(&model)) {
    m.m11 = a * a / mu;
    m.m12 = a * c / mu;
    m.m22 = (1.0 + ns->alpha) * c * c / mu;
  } else {
    const auto& ws = std::get<WeakSlip>(model);
    m.m11 = (a * a * a / 3.0 + ws.b1 * a * a) / mu;
    m.m12 = (a * a * c / 2.0 + ws.b1 * a * c) / mu;
    m.m22 = c * c * c / 3.0 +
            (a * c * c + ws.b1 * c * c + ws.b * (mu + 1.0) * c * c) / mu;
  }
  m.m11 += eps;
  m.m22 += eps;
  return m;
}

/** Partial derivatives of the mobility entries with respect to u and v. */
struct MobilityDerivs {
  SymMatrix2 du;  ///< d m_ij / d u
  SymMatrix2 dv;  ///< d m_ij / d v
};

/**
 * Derivatives of mobility_eval at (u, v). The eps shift is constant and does
 * not appear. At u = 0 or v = 0 the derivative of |.| is taken as 0.
 */
inline MobilityDerivs mobility_derivs(const MobilityModel& model,
                                      const PhysicalParams& params, double u,
                                      double v) {
  const double a = std::abs(u);
  const double c = std::abs(v);
  const double su = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  const double sv = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  const double mu = params.mu;
  SymMatrix2 da, dc;  // derivatives w.r.t. a = |u| and c = |v|
  if (std::holds_alternative<NoSlip>(model)) {
    da = {a * a / mu, a * c / mu, c * c / mu};
    dc = {0.0, a * a / (2.0 * mu), c * c + 2.0 * a * c / mu};
  } else if (const auto* ns = std::get_if<NavierSlip>(&model)) {
    da = {2.0 * a / mu, c / mu, 0.0};
    dc = {0.0, a / mu, 2.0 * (1.0 + ns->alpha) * c / mu};
  } else {
    const auto& ws = std::get<WeakSlip>(model);
    da = {(a * a + 2.0 * ws.b1 * a) / mu, (a * c + ws.b1 * c) / mu,
          c * c / mu};
    dc = {0.0, (a * a / 2.0 + ws.b1 * a) / mu,
          c * c + (2.0 * a * c + 2.0 * ws.b1 * c +
                   2.0 * ws.b * (mu + 1.0) * c) / mu};
  }
  return {da * su, dc * sv};
}

/** No intermolecular forces. */
struct ForceFree {};

/**
 * Born repulsion / van der Waals attraction law
 * Pi_k(s) = s^-n - gamma_k s^-m with n < m.
 *
 * Below `floor` the force is evaluated at `floor` (bounded forces for the
 * implicit solver); the energy is continued linearly there so that the
 * primitive relation U' = Pi holds for every height.
 */
struct BornVdW {
  double n = 3.0;
  double m = 12.0;
  double gamma1 = 0.1;
  double gamma2 = 0.1;
  double floor = 1e-4;

  void validate() const {
    if (!(n > 0.0) || !(m > 0.0))
      throw std::invalid_argument("potential exponents must be > 0");
    if (!(n < m)) throw std::invalid_argument("potential.n must be < potential.m");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
      throw std::invalid_argument("potential gamma must be > 0");
    if (!(floor > 0.0)) throw std::invalid_argument("potential floor must be > 0");
  }

  double gamma(int kind) const { return kind == 1 ? gamma1 : gamma2; }

  /** Height at which Pi_k vanishes: gamma_k^{1/(m-n)}. */
  double force_root(int kind) const {
    return std::pow(gamma(kind), 1.0 / (m - n));
  }
};

using PotentialModel = std::variant<ForceFree, BornVdW>;

inline void validate(const PotentialModel& pot) {
  if (const auto* bv = std::get_if<BornVdW>(&pot)) bv->validate();
}

inline bool has_potential(const PotentialModel& pot) {
  return std::holds_alternative<BornVdW>(pot);
}

namespace detail {

inline void check_kind(int kind) {
  if (kind != 1 && kind != 2)
    throw std::invalid_argument("potential kind must be 1 or 2");
}

/** x^p with a fast path for small integer exponents. */
inline double pow_real(double x, double p) {
  const double r = std::round(p);
  if (r == p && std::abs(r) <= 16.0) {
    double acc = 1.0;
    double base = (r < 0.0) ? 1.0 / x : x;
    for (int k = 0; k < static_cast<int>(std::abs(r)); ++k) acc *= base;
    return acc;
  }
  return std::pow(x, p);
}

}  // namespace detail

/**
 * Intermolecular force Pi_k(s) = s^-n - gamma_k s^-m for layer `kind`.
 * Heights below the floor evaluate at the floor; with strict = true a
 * nonpositive height is a domain error instead.
 */
inline double potential_force(const PotentialModel& pot, int kind, double s,
                              bool strict = false) {
  detail::check_kind(kind);
  const auto* bv = std::get_if<BornVdW>(&pot);
  if (bv == nullptr) return 0.0;
  if (strict && !(s > 0.0))
    throw std::domain_error("potential_force: height must be > 0");
  const double sc = std::max(s, bv->floor);
  return detail::pow_real(sc, -bv->n) -
         bv->gamma(kind) * detail::pow_real(sc, -bv->m);
}

/** Derivative d Pi_k / d s; zero below the floor (the force is constant there). */
inline double potential_force_deriv(const PotentialModel& pot, int kind,
                                    double s) {
  detail::check_kind(kind);
  const auto* bv = std::get_if<BornVdW>(&pot);
  if (bv == nullptr) return 0.0;
  if (s < bv->floor) return 0.0;
  return -bv->n * detail::pow_real(s, -bv->n - 1.0) +
         bv->gamma(kind) * bv->m * detail::pow_real(s, -bv->m - 1.0);
}

/**
 * Potential energy U_k(s) = gamma_k s^{1-m}/(m-1) - s^{1-n}/(n-1), the
 * primitive of Pi_k vanishing at infinity. Below the floor the energy is
 * continued linearly with slope Pi_k(floor).
 */
inline double potential_energy(const PotentialModel& pot, int kind, double s) {
  detail::check_kind(kind);
  const auto* bv = std::get_if<BornVdW>(&pot);
  if (bv == nullptr) return 0.0;
  if (!(bv->n > 1.0) || !(bv->m > 1.0))
    throw std::invalid_argument(
        "potential_energy: exponents must exceed 1 for a convergent tail");
  auto tail = [&](double r) {
    return bv->gamma(kind) * detail::pow_real(r, 1.0 - bv->m) / (bv->m - 1.0) -
           detail::pow_real(r, 1.0 - bv->n) / (bv->n - 1.0);
  };
  if (s >= bv->floor) return tail(s);
  return tail(bv->floor) + potential_force(pot, kind, bv->floor) * (s - bv->floor);
}

}  // namespace bilayer
