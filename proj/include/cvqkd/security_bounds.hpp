#pragma once

// Closed-form eavesdropping bounds, Shannon informations and secret key rates
// for coherent-state protocols with homodyne or heterodyne detection.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "cvqkd/channel.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/tolerances.hpp"

namespace cvqkd {

enum class Protocol { homodyne, heterodyne_old, heterodyne_new, heterodyne_measured };
enum class Direction { direct, reverse };

constexpr std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::homodyne: return "homodyne";
    case Protocol::heterodyne_old: return "heterodyne_old";
    case Protocol::heterodyne_new: return "heterodyne_new";
    case Protocol::heterodyne_measured: return "heterodyne_measured";
  }
  return "?";
}

constexpr std::string_view to_string(Direction d) { return d == Direction::direct ? "DR" : "RR"; }

namespace detail {

inline void require_variance(double v) {
  if (!(v >= 1.0) || !std::isfinite(v)) throw error(errc::domain, "V must be >= 1, got " + std::to_string(v));
}

inline void require_transmission(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw error(errc::domain, "T must be positive, got " + std::to_string(t));
}

inline void require_chi(double chi) {
  if (!(chi >= 0.0)) throw error(errc::domain, "chi must be >= 0, got " + std::to_string(chi));
}

}  // namespace detail

inline double chi_total(double transmission, double excess_noise) {
  detail::require_transmission(transmission);
  if (!(excess_noise >= 0.0)) throw error(errc::domain, "eps must be >= 0, got " + std::to_string(excess_noise));
  return 1.0 / transmission + excess_noise - 1.0;
}

/// Minimal conditional variance of B' given Eve when Eve keeps her modes in
/// quantum memory and measures Bob's quadrature: V / (T (1 + chi V)).
inline double homodyne_rr_bound(double variance, double transmission, double chi) {
  detail::require_variance(variance);
  detail::require_transmission(transmission);
  detail::require_chi(chi);
  return variance / (transmission * (1.0 + chi * variance));
}

/// Eve's equivalent noise in direct-reconciliation homodyne: 1 / chi.
inline double homodyne_dr_chi(double chi) {
  detail::require_chi(chi);
  return chi == 0.0 ? infinite_noise : 1.0 / chi;
}

/// Minimum equivalent noise Eve can reach on both heterodyne quadratures.
inline double hetero_chi_E_min(double transmission, double excess_noise) {
  detail::require_transmission(transmission);
  if (!(excess_noise >= 0.0 && excess_noise <= 2.0)) {
    throw error(errc::domain, "eps must lie in [0, 2], got " + std::to_string(excess_noise));
  }
  const double inner = 2.0 - 2.0 * transmission + transmission * excess_noise;
  if (inner < 0.0) {
    throw error(errc::domain, "2 - 2T + T eps must be >= 0 (T=" + std::to_string(transmission) +
                                  ", eps=" + std::to_string(excess_noise) + ")");
  }
  const double root = std::sqrt(inner) + std::sqrt(excess_noise);
  if (root == 0.0) return infinite_noise;
  const double gap = 2.0 - excess_noise;
  return transmission * gap * gap / (root * root) + 1.0;
}

/// (V chi_E + 1) / (V + chi_E); tends to V as chi_E grows.
inline double hetero_V_min(double variance, double chi_e) {
  detail::require_variance(variance);
  if (!(chi_e >= 0.0)) throw error(errc::domain, "chi_E must be >= 0");
  if (std::isinf(chi_e)) return variance;
  return (variance * chi_e + 1.0) / (variance + chi_e);
}

/// Conditional variance at Bob's heterodyne detector under the previous bound:
/// the homodyne bound per quadrature, halved with the added vacuum.
inline double hetero_old_conditional(double variance, double transmission, double chi) {
  return 0.5 * (homodyne_rr_bound(variance, transmission, chi) + 1.0);
}

/// 1/2 log2(variance / conditional).
inline double half_log_ratio(double variance, double conditional) {
  if (!(variance > 0.0) || !(conditional > 0.0)) {
    throw error(errc::domain, "information needs positive variances (got " + std::to_string(variance) + " / " +
                                  std::to_string(conditional) + ")");
  }
  return 0.5 * std::log2(variance / conditional);
}

/// 1/2 log2((V + chi) / (1 + chi)): information on one quadrature of Alice's
/// data for an equivalent input noise chi. Zero for infinite noise.
inline double shannon_information(double variance, double chi) {
  if (std::isinf(chi)) return 0.0;
  if (!(chi > -1.0)) throw error(errc::domain, "equivalent noise must exceed -1");
  return half_log_ratio(variance + chi, 1.0 + chi);
}

struct RateReport {
  Protocol protocol = Protocol::homodyne;
  Direction direction = Direction::reverse;
  double i_ab = 0.0;
  double i_eve = 0.0;  // I_BE for reverse, I_AE for direct reconciliation
  double delta_i = 0.0;
  double delta_i_eff = 0.0;
  double beta = 1.0;
};

namespace detail {

inline RateReport finish(Protocol protocol, Direction direction, double i_ab, double i_eve, double beta) {
  return {protocol, direction, i_ab, i_eve, i_ab - i_eve, beta * i_ab - i_eve, beta};
}

inline void require_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw error(errc::domain, "beta must lie in [0, 1]");
}

inline void require_symmetric(const ChannelParams& c) {
  if (!c.symmetric(default_tolerances.symmetric_channel)) {
    throw error(errc::domain, "heterodyne bounds assume T_X = T_P and chi_X = chi_P");
  }
}

// Bob's heterodyne output variance per quadrature.
inline double heterodyne_bob_variance(const QuadratureChannel& q, double variance) {
  return 0.5 * (q.transmission * (variance + q.chi) + 1.0);
}

}  // namespace detail

inline double homodyne_i_ab(double variance, double chi) { return half_log_ratio(variance + chi, 1.0 + chi); }

inline double heterodyne_i_ab(double variance, double transmission, double chi) {
  return 2.0 * half_log_ratio(transmission * (variance + chi) + 1.0, transmission * (1.0 + chi) + 1.0);
}

/// Rates for a protocol evaluated at its eavesdropping bound. Homodyne averages
/// Bob's two quadrature choices and so accepts asymmetric channels; the
/// heterodyne bounds need a symmetric one.
inline RateReport mutual_informations(const ChannelParams& c, Protocol protocol, Direction direction,
                                      double beta = 1.0) {
  detail::require_beta(beta);
  const double v = c.modulation_variance;
  detail::require_variance(v);
  switch (protocol) {
    case Protocol::homodyne: {
      double i_ab = 0.0;
      double i_eve = 0.0;
      for (int k = 0; k < 2; ++k) {
        const QuadratureChannel& mine = k == 0 ? c.x : c.p;
        const QuadratureChannel& other = k == 0 ? c.p : c.x;
        i_ab += 0.5 * homodyne_i_ab(v, mine.chi);
        if (direction == Direction::reverse) {
          const double vb = mine.transmission * (v + mine.chi);
          i_eve += 0.5 * half_log_ratio(vb, homodyne_rr_bound(v, other.transmission, other.chi));
        } else {
          i_eve += 0.5 * shannon_information(v, homodyne_dr_chi(other.chi));
        }
      }
      return detail::finish(protocol, direction, i_ab, i_eve, beta);
    }
    case Protocol::heterodyne_old:
    case Protocol::heterodyne_new: {
      detail::require_symmetric(c);
      const QuadratureChannel& q = c.x;
      const double i_ab = heterodyne_i_ab(v, q.transmission, q.chi);
      if (protocol == Protocol::heterodyne_old) {
        if (direction == Direction::direct) {
          throw error(errc::domain, "the previous heterodyne bound is defined for reverse reconciliation only");
        }
        const double vb = detail::heterodyne_bob_variance(q, v);
        const double i_eve = 2.0 * half_log_ratio(vb, hetero_old_conditional(v, q.transmission, q.chi));
        return detail::finish(protocol, direction, i_ab, i_eve, beta);
      }
      const double chi_e = hetero_chi_E_min(q.transmission, q.excess_noise);
      double i_eve = 0.0;
      if (direction == Direction::reverse) {
        const double vb = detail::heterodyne_bob_variance(q, v);
        i_eve = 2.0 * half_log_ratio(vb, 0.5 * (hetero_V_min(v, chi_e) + 1.0));
      } else {
        i_eve = 2.0 * shannon_information(v, chi_e);
      }
      return detail::finish(protocol, direction, i_ab, i_eve, beta);
    }
    case Protocol::heterodyne_measured:
      break;
  }
  throw error(errc::parameter, "measured heterodyne rates need Eve's noises and conditional variances");
}

/// Heterodyne rates against a concrete attack, from Eve's equivalent noises
/// (direct) or B' conditional variances (reverse) on each quadrature.
inline RateReport mutual_informations(const ChannelParams& c, Direction direction, double chi_xe, double chi_pe,
                                      double v_x_cond, double v_p_cond, double beta = 1.0) {
  detail::require_beta(beta);
  const double v = c.modulation_variance;
  detail::require_variance(v);
  const double i_ab = 0.5 * heterodyne_i_ab(v, c.x.transmission, c.x.chi) +
                      0.5 * heterodyne_i_ab(v, c.p.transmission, c.p.chi);
  double i_eve = 0.0;
  if (direction == Direction::reverse) {
    i_eve = half_log_ratio(detail::heterodyne_bob_variance(c.x, v), 0.5 * (v_x_cond + 1.0)) +
            half_log_ratio(detail::heterodyne_bob_variance(c.p, v), 0.5 * (v_p_cond + 1.0));
  } else {
    i_eve = shannon_information(v, chi_xe) + shannon_information(v, chi_pe);
  }
  return detail::finish(Protocol::heterodyne_measured, direction, i_ab, i_eve, beta);
}

/// Channel noise at which the heterodyne and homodyne bounds coincide.
inline double coincidence_chi(double transmission, double variance, Direction direction) {
  detail::require_transmission(transmission);
  if (direction == Direction::reverse) {
    detail::require_variance(variance);
    return std::sqrt(1.0 - transmission + transmission / (variance * variance)) / transmission - 1.0 / variance;
  }
  if (!(transmission >= 1.0)) {
    throw error(errc::domain, "direct-reconciliation coincidence needs T >= 1, got " + std::to_string(transmission));
  }
  return std::sqrt(1.0 - 1.0 / transmission);
}

/// Output covariance parameterisation of a symmetric three-mode attack in terms of
/// its symplectic invariants:
///   X block (B', Em, En): [[V_B', c_m, c_n], [c_m, V_Em, c], [c_n, c, V_En]]
///   P block (B', En, Em): the same with the roles of m and n exchanged.
struct InvariantSolution {
  double v_bprime = 0.0;  // T (V + chi)
  double c = 0.0;
  double x = 0.0;  // c_m c_n
  double y = 0.0;  // V_Em V_En
  double z = 0.0;  // V_Em c_n^2 + V_En c_m^2
  int sigma_prime = 1;
  double conditional_variance = 0.0;  // V_{B'|E}
  double discriminant = 0.0;          // z^2 - 4 y x^2
};

namespace detail {

struct InvariantParts {
  double v_bprime, c, x, y, z;
};

inline InvariantParts invariant_parts(double transmission, double chi, double variance, double y) {
  const double vb = transmission * (variance + chi);
  const double c = 0.5 * (variance - vb);
  const double spread = variance * variance - vb * vb;
  const double x = 0.25 * (2.0 * (1.0 - c * c - y) + spread);
  const double z = vb * y - variance - c * c * (vb + c) + 0.5 * c * (2.0 * (1.0 - y) + spread);
  return {vb, c, x, y, z};
}

inline double top_y(double transmission, double chi, double variance) {
  const double c = 0.5 * (variance - transmission * (variance + chi));
  return c * c + transmission * (variance * chi + 1.0);
}

}  // namespace detail

/// Conditional variance of B' given Eve, solved from invariant constancy with y
/// at the top of its admissible interval (the value the homodyne optimality forces).
inline InvariantSolution invariant_solution(double transmission, double chi, double variance,
                                            const Tolerances& tol = default_tolerances) {
  detail::require_transmission(transmission);
  detail::require_variance(variance);
  const double rho_low = transmission * chi + transmission - 1.0;
  const double rho_high = transmission * chi - transmission + 1.0;
  if (rho_low * rho_high < -tol.symmetry) {
    throw error(errc::not_symmetrizable, "rho = (T chi)^2 - (1 - T)^2 is negative");
  }
  const auto parts = detail::invariant_parts(transmission, chi, variance, detail::top_y(transmission, chi, variance));
  const double direct = parts.z * parts.z - 4.0 * parts.y * parts.x * parts.x;
  // z^2 - 4 y x^2 at this y, in a form free of cancellation.
  const double vsq = variance * variance - 1.0;
  const double factored = transmission * vsq * vsq * std::max(rho_low, 0.0) * std::max(rho_high, 0.0);
  const double scale = std::max(1.0, parts.z * parts.z);
  if (direct < -std::sqrt(tol.symplectic_residual) * scale || std::abs(direct - factored) > 1e-6 * scale) {
    throw error(errc::inconsistent_solution, "invariant equations have no real solution (z^2 - 4yx^2 = " +
                                                 std::to_string(direct) + ")");
  }
  InvariantSolution s;
  s.v_bprime = parts.v_bprime;
  s.c = parts.c;
  s.x = parts.x;
  s.y = parts.y;
  s.z = parts.z;
  s.sigma_prime = 1;
  s.discriminant = factored;
  s.conditional_variance = parts.v_bprime - (parts.z + std::sqrt(factored)) / (2.0 * parts.y);
  return s;
}

/// V_{B'|E} at an arbitrary y, or nothing where the invariant equations have no real solution.
inline std::optional<double> invariant_conditional_variance_at(double transmission, double chi, double variance,
                                                               double y) {
  const auto parts = detail::invariant_parts(transmission, chi, variance, y);
  const double disc = parts.z * parts.z - 4.0 * parts.y * parts.x * parts.x;
  if (disc < 0.0 || !(parts.y > 0.0)) return std::nullopt;
  return parts.v_bprime - (parts.z + std::sqrt(disc)) / (2.0 * parts.y);
}

/// Materialises the three-mode output covariance for a solution, splitting y
/// evenly (V_Em = V_En = sqrt(y)).
inline CovarianceMatrix materialize_covariance(const InvariantSolution& s) {
  const double u = std::max(0.0, (s.z + s.sigma_prime * std::sqrt(s.discriminant)) / (2.0 * s.y));  // c_m^2 / V_Em
  const double w = std::max(0.0, s.z / s.y - u);                                                     // c_n^2 / V_En
  const double v_em = std::sqrt(s.y);
  const double v_en = s.y / v_em;
  const double c_m = std::sqrt(u * v_em);
  const double c_n = c_m != 0.0 ? s.x / c_m : std::sqrt(w * v_en);
  Matrix g = Matrix::Zero(6, 6);
  g.topLeftCorner(3, 3) << s.v_bprime, c_m, c_n, c_m, v_em, s.c, c_n, s.c, v_en;
  g.bottomRightCorner(3, 3) << s.v_bprime, c_n, c_m, c_n, v_en, s.c, c_m, s.c, v_em;
  return CovarianceMatrix(std::move(g));
}

struct InvariantYScan {
  std::size_t feasible = 0;
  std::size_t infeasible = 0;
  bool monotone_nonincreasing = true;
  bool top_is_minimum = true;
  double top_value = 0.0;
  double min_value = 0.0;
};

/// Evaluates V_{B'|E} on `points` evenly spaced y in [c^2, c^2 + T(V chi + 1)].
inline InvariantYScan scan_invariant_y(double transmission, double chi, double variance, std::size_t points,
                                       double slack = 1e-12) {
  if (points < 2) throw error(errc::parameter, "scan needs at least two points");
  const InvariantSolution top = invariant_solution(transmission, chi, variance);
  const double y_low = top.c * top.c;
  const double y_high = top.y;
  InvariantYScan scan;
  scan.top_value = top.conditional_variance;
  scan.min_value = top.conditional_variance;
  std::optional<double> previous;
  for (std::size_t k = 0; k < points; ++k) {
    const bool last = k + 1 == points;
    const double y = y_low + (y_high - y_low) * static_cast<double>(k) / static_cast<double>(points - 1);
    const std::optional<double> value =
        last ? std::optional<double>(top.conditional_variance)
             : invariant_conditional_variance_at(transmission, chi, variance, y);
    if (!value) {
      ++scan.infeasible;
      continue;
    }
    ++scan.feasible;
    const double tolerance = slack * std::max(1.0, std::abs(*value));
    if (previous && *value > *previous + tolerance) scan.monotone_nonincreasing = false;
    if (*value < scan.top_value - tolerance) scan.top_is_minimum = false;
    scan.min_value = std::min(scan.min_value, *value);
    previous = value;
  }
  return scan;
}

}  // namespace cvqkd
