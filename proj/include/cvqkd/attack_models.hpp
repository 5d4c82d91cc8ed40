#pragma once

// Channel and eavesdropper parameters of block-diagonal attacks, the symmetric
// one-parameter family of three-mode attacks, and the four explicit attacks
// that reach the heterodyne bound.
//
// Mode 0 is B' (Alice -> Bob). In three-mode attacks Eve measures X on mode 1
// (E1) and P on mode 2 (E2) unless an EveMeasurement says otherwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cvqkd/channel.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/security_bounds.hpp"
#include "cvqkd/tolerances.hpp"

namespace cvqkd {

/// Transmission and input-referred noise read off the first row of one
/// quadrature block: T = S(0,0)^2, chi = sum_{k>0} S(0,k)^2 / T.
inline QuadratureChannel quadrature_channel_from(const Matrix& block) {
  const double t = block(0, 0) * block(0, 0);
  if (t == 0.0) throw error(errc::degenerate_channel, "B' is decoupled from Alice's mode (S(0,0) = 0)");
  const double chi = block.row(0).tail(block.cols() - 1).squaredNorm() / t;
  return {t, excess_from_chi(t, chi), chi};
}

inline ChannelParams channel_params_from(const BlockDiagSymplectic& s, double variance) {
  if (!(variance >= 1.0)) throw error(errc::parameter, "V must be >= 1");
  if (s.n_modes() < 2) throw error(errc::dimension, "an attack needs at least one ancilla mode");
  return {quadrature_channel_from(s.x()), quadrature_channel_from(s.p()), variance, 1.0};
}

struct EveMeasurement {
  Index x_mode = 1;
  Index p_mode = 2;
};

struct EveView {
  double chi_xe1 = infinite_noise;  // Eve's equivalent input noise on her X measurement
  double chi_pe2 = infinite_noise;  // ... and on her P measurement
  double v_x_cond = 0.0;            // V_{X_B'|X_E1}
  double v_p_cond = 0.0;            // V_{P_B'|P_E2}
};

namespace detail {

inline double eve_noise(const Matrix& block, Index mode) {
  const double coupling = block(mode, 0) * block(mode, 0);
  if (coupling == 0.0) return infinite_noise;
  return (block.row(mode).squaredNorm() - coupling) / coupling;
}

inline void check_measurement(const BlockDiagSymplectic& s, const EveMeasurement& m) {
  const Index n = s.n_modes();
  if (m.x_mode < 1 || m.x_mode >= n || m.p_mode < 1 || m.p_mode >= n) {
    throw error(errc::dimension, "Eve's measured modes must be ancillas of the attack");
  }
}

// (V chi + 1) / (chi + 1), equal to V for infinite chi.
inline double weighted_noise(double variance, double chi) {
  return std::isinf(chi) ? variance : (variance * chi + 1.0) / (chi + 1.0);
}

// (chi + 1) / (V + chi), equal to 1 for infinite chi.
inline double noise_ratio(double variance, double chi) {
  return std::isinf(chi) ? 1.0 : (chi + 1.0) / (variance + chi);
}

}  // namespace detail

/// Eve's noises from the attack matrix and the conditional variances of B'
/// given her results, from the propagated covariance matrix.
inline EveView eve_view_from(const BlockDiagSymplectic& s, double variance, const EveMeasurement& m = {}) {
  detail::check_measurement(s, m);
  const Index n = s.n_modes();
  const CovarianceMatrix gamma = propagate(s, CovarianceMatrix::coherent_input(n, variance));
  EveView view;
  view.chi_xe1 = detail::eve_noise(s.x(), m.x_mode);
  view.chi_pe2 = detail::eve_noise(s.p(), m.p_mode);
  const std::array<Index, 1> gx{m.x_mode};
  const std::array<Index, 1> gp{n + m.p_mode};
  view.v_x_cond = conditional_variance(gamma, 0, gx);
  view.v_p_cond = conditional_variance(gamma, n, gp);
  return view;
}

/// The same view from the closed forms in (s1, r) of a three-mode attack with
/// the default measurement, where s1 and r = a s1 / s2 are read back from S_X.
inline EveView eve_view_closed_form(const BlockDiagSymplectic& s, double variance) {
  if (s.n_modes() != 3) throw error(errc::unsupported_dimension, "closed forms cover three-mode attacks");
  if (!(variance >= 1.0)) throw error(errc::parameter, "V must be >= 1");
  const Vector row0 = s.x().row(0).transpose();
  const Vector row1 = s.x().row(1).transpose();
  const double s1 = row0.norm();
  const Vector b_row = row0 / s1;
  const double a_s1 = row1.dot(b_row);
  const double s2 = (row1 - a_s1 * b_row).norm();
  const double r = a_s1 / s2;
  EveView view;
  view.chi_xe1 = detail::eve_noise(s.x(), 1);
  view.chi_pe2 = detail::eve_noise(s.p(), 2);
  const double s1sq = s1 * s1;
  const double rsq1 = r * r + 1.0;
  view.v_x_cond = s1sq / rsq1 * detail::weighted_noise(variance, view.chi_pe2) *
                  detail::noise_ratio(variance, view.chi_xe1);
  view.v_p_cond = rsq1 / s1sq * detail::weighted_noise(variance, view.chi_xe1) *
                  detail::noise_ratio(variance, view.chi_pe2);
  return view;
}

// ---------------------------------------------------------------------------
// Symmetric family

struct SymmetricAttackFamily {
  double transmission = 1.0;
  double chi = 0.0;
  double s1 = 1.0;  // s1^2 = T (1 + chi)
  double b1 = 1.0;  // b1^2 = 1 / (1 + chi)
  double b4 = 0.0;
  int sigma = 1;
  double r = 0.0;
  double delta = 0.0;
  double rho = 0.0;
};

struct SymmetricAttack {
  SymmetricAttackFamily family;
  IwasawaParams factors;
  BlockDiagSymplectic matrix;
};

/// (T chi)^2 - (1 - T)^2, written as a product to keep its sign exact near zero.
inline double family_rho(double transmission, double chi) {
  const double rho = (transmission * chi + transmission - 1.0) * (transmission * chi - transmission + 1.0);
  return std::abs(rho) < 1e-15 ? 0.0 : rho;
}

/// Orthogonal matrix whose first column is `column`; the remaining columns come
/// from Gram-Schmidt on the canonical basis, each step taking the basis vector
/// with the largest residual (lowest index on ties).
inline Matrix complete_orthogonal(const Vector& column) {
  const Index n = column.size();
  Matrix q = Matrix::Zero(n, n);
  q.col(0) = column.normalized();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Index k = 1; k < n; ++k) {
    Vector best;
    double best_norm = -1.0;
    Index best_index = -1;
    for (Index e = 0; e < n; ++e) {
      if (used[static_cast<std::size_t>(e)]) continue;
      Vector v = Vector::Unit(n, e);
      for (Index j = 0; j < k; ++j) v -= q.col(j).dot(v) * q.col(j);
      const double norm = v.norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = v;
        best_index = e;
      }
    }
    used[static_cast<std::size_t>(best_index)] = true;
    q.col(k) = best / best_norm;
  }
  return q;
}

/// Three-mode attack with symmetric channel (T, chi), fixed by b4 and the sign sigma.
/// The free factors are set to s2 = s3 = 1 and c = 0.
inline SymmetricAttack symmetrize(double transmission, double chi, double b4, int sigma) {
  if (!(transmission > 0.0)) throw error(errc::parameter, "T must be positive");
  if (!(chi >= 0.0)) throw error(errc::parameter, "chi must be >= 0");
  if (sigma != 1 && sigma != -1) throw error(errc::parameter, "sigma must be +1 or -1");
  const double rho = family_rho(transmission, chi);
  if (rho < 0.0) {
    throw error(errc::not_symmetrizable,
                "rho = " + std::to_string(rho) + " < 0: no symmetric attack reproduces this channel");
  }
  SymmetricAttackFamily f;
  f.transmission = transmission;
  f.chi = chi;
  f.s1 = std::sqrt(transmission * (1.0 + chi));
  f.b1 = 1.0 / std::sqrt(1.0 + chi);
  f.b4 = b4;
  f.sigma = sigma;
  f.rho = rho;
  const double free_room = chi / (1.0 + chi);  // 1 - b1^2
  if (free_room == 0.0) {
    // Only the lossless, noiseless channel has chi = 0 with rho >= 0.
    if (b4 != 0.0) throw error(errc::parameter, "b4 must be 0 when chi = 0");
    IwasawaParams p = IwasawaParams::three_mode(0.0, 0.0, 0.0, {f.s1, 1.0, 1.0}, Matrix::Identity(3, 3));
    BlockDiagSymplectic m = compose_iwasawa(p);
    return {f, std::move(p), std::move(m)};
  }
  if (!(b4 * b4 < free_room)) {
    throw error(errc::parameter, "b4^2 must be < chi/(1+chi) = " + std::to_string(free_room));
  }
  const double b7_sq = free_room - b4 * b4;
  const double b7 = std::sqrt(b7_sq);
  if (b7 == 0.0) throw error(errc::degenerate_basis, "b7 = 0");
  Vector col(3);
  col << f.b1, b4, b7;
  const Matrix passive = complete_orthogonal(col);
  const double s1sq = f.s1 * f.s1;
  f.r = (f.b1 * b4 * (1.0 - s1sq) + sigma * std::sqrt(b7_sq * rho)) / free_room;
  const double s2 = 1.0;
  const double s3 = 1.0;
  const double a = f.r * s2 / f.s1;
  f.delta = s3 * (f.b1 * (s1sq - 1.0) / f.s1 + a * b4 / s2) / b7;
  const double c = 0.0;
  const double b = a * c - f.delta;
  IwasawaParams p = IwasawaParams::three_mode(a, b, c, {f.s1, s2, s3}, passive);
  BlockDiagSymplectic m = compose_iwasawa(p);
  return {f, std::move(p), std::move(m)};
}

/// The b4 at which both I_AE and I_BE of the symmetric family are extremal.
inline double optimal_b4(double transmission, double chi, int sigma) {
  if (!(transmission > 0.0)) throw error(errc::parameter, "T must be positive");
  if (sigma != 1 && sigma != -1) throw error(errc::parameter, "sigma must be +1 or -1");
  if (family_rho(transmission, chi) < 0.0) throw error(errc::not_symmetrizable, "rho < 0");
  const double s1sq = transmission * (1.0 + chi);
  const double b1sq = 1.0 / (1.0 + chi);
  double gain = s1sq - 1.0;
  if (gain < 0.0) {
    if (gain > -1e-15) {
      gain = 0.0;
    } else {
      throw error(errc::domain, "T (1 + chi) < 1: the optimal b4 is outside the family's coverage");
    }
  }
  const double outer = 1.0 - s1sq * (2.0 * b1sq - 1.0);
  if (outer < 0.0) throw error(errc::domain, "1 - s1^2 (2 b1^2 - 1) < 0");
  return sigma * (std::sqrt(s1sq) * std::sqrt(outer) - std::sqrt(b1sq * gain)) / (s1sq + 1.0);
}

// ---------------------------------------------------------------------------
// Optical building blocks on n modes (block-diagonal symplectic maps)

namespace optics {

inline BlockDiagSymplectic passive(const Matrix& orthogonal) { return BlockDiagSymplectic(orthogonal, orthogonal); }

/// Beam-splitter of intensity transmission t between modes i and j:
/// X_i -> sqrt(t) X_i - sqrt(1-t) X_j, X_j -> sqrt(1-t) X_i + sqrt(t) X_j.
inline BlockDiagSymplectic beam_splitter(Index n, double t, Index i, Index j) {
  if (!(t >= 0.0 && t <= 1.0)) throw error(errc::parameter, "beam-splitter transmission must lie in [0, 1]");
  Matrix q = Matrix::Identity(n, n);
  q(i, i) = std::sqrt(t);
  q(i, j) = -std::sqrt(1.0 - t);
  q(j, i) = std::sqrt(1.0 - t);
  q(j, j) = std::sqrt(t);
  return passive(q);
}

inline BlockDiagSymplectic swap(Index n, Index i, Index j) {
  Matrix q = Matrix::Identity(n, n);
  q(i, i) = q(j, j) = 0.0;
  q(i, j) = q(j, i) = 1.0;
  return passive(q);
}

inline BlockDiagSymplectic squeezers(const Vector& x_scale) {
  return BlockDiagSymplectic(Matrix(x_scale.asDiagonal()), Matrix(x_scale.cwiseInverse().asDiagonal()));
}

/// X_to += g X_from, with the back-action P_from -= g P_to.
inline BlockDiagSymplectic x_gain(Index n, double g, Index to, Index from) {
  Matrix sx = Matrix::Identity(n, n);
  Matrix sp = Matrix::Identity(n, n);
  sx(to, from) = g;
  sp(from, to) = -g;
  return BlockDiagSymplectic(sx, sp);
}

/// P_to += g P_from, with the back-action X_from -= g X_to.
inline BlockDiagSymplectic p_gain(Index n, double g, Index to, Index from) {
  Matrix sx = Matrix::Identity(n, n);
  Matrix sp = Matrix::Identity(n, n);
  sp(to, from) = g;
  sx(from, to) = -g;
  return BlockDiagSymplectic(sx, sp);
}

/// Phase-insensitive amplifier of gain G with idler mode j.
inline BlockDiagSymplectic amplifier(Index n, double gain, Index i, Index j) {
  if (!(gain >= 1.0)) throw error(errc::parameter, "amplifier gain must be >= 1");
  const double a = std::sqrt(gain);
  const double b = std::sqrt(gain - 1.0);
  Matrix sx = Matrix::Identity(n, n);
  Matrix sp = Matrix::Identity(n, n);
  sx(i, i) = sx(j, j) = a;
  sx(i, j) = sx(j, i) = b;
  sp(i, i) = sp(j, j) = a;
  sp(i, j) = sp(j, i) = -b;
  return BlockDiagSymplectic(sx, sp);
}

/// EPR pair on modes 1 and 2 of a three-mode system: single-mode squeezers
/// (1/s, s) on X followed by a balanced beam-splitter.
inline BlockDiagSymplectic epr_pair(double s) {
  Vector scale(3);
  scale << 1.0, 1.0 / s, s;
  return beam_splitter(3, 0.5, 1, 2).then_after(squeezers(scale));
}

/// Balanced mixer on Eve's modes: X_1 -> (X_1 + X_2)/sqrt2, X_2 -> (X_2 - X_1)/sqrt2.
inline BlockDiagSymplectic eve_mixer() { return beam_splitter(3, 0.5, 2, 1); }

}  // namespace optics

// ---------------------------------------------------------------------------
// Named optimal attacks

enum class AttackKind { feed_forward, cloning, teleportation, entangling_cloner };

constexpr std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::feed_forward: return "feedforward";
    case AttackKind::cloning: return "cloning";
    case AttackKind::teleportation: return "teleportation";
    case AttackKind::entangling_cloner: return "entangling-cloner";
  }
  return "?";
}

inline std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  if (name == "feedforward" || name == "feed-forward") return AttackKind::feed_forward;
  if (name == "cloning") return AttackKind::cloning;
  if (name == "teleportation") return AttackKind::teleportation;
  if (name == "entangling-cloner" || name == "entangling_cloner") return AttackKind::entangling_cloner;
  return std::nullopt;
}

struct FeedForwardTuning {
  double gain = 0.0;              // g_E
  double tap_transmission = 1.0;  // T_E
};

struct CloningTuning {
  double tap_transmission = 1.0;  // T_E
  double amplifier_gain = 1.0;    // G
};

struct TeleportationTuning {
  double gain = 0.0;       // g_E
  double squeezing = 1.0;  // s
};

struct EntanglingClonerTuning {
  double tap_transmission = 1.0;  // T_E
  double squeezing = 1.0;         // s
};

using AttackTuning = std::variant<FeedForwardTuning, CloningTuning, TeleportationTuning, EntanglingClonerTuning>;

struct NamedAttack {
  AttackKind kind;
  AttackTuning tuning;
  BlockDiagSymplectic matrix;
};

namespace detail {

inline void require_attack_channel(double transmission, double excess_noise, double max_eps = 2.0) {
  if (!(transmission > 0.0) || !std::isfinite(transmission)) {
    throw error(errc::domain, "T must be positive, got " + std::to_string(transmission));
  }
  if (!(excess_noise >= 0.0 && excess_noise <= max_eps)) {
    throw error(errc::domain, "eps must lie in [0, 2], got " + std::to_string(excess_noise));
  }
}

inline double clamp_unit(double t, const char* what) {
  constexpr double slack = 1e-12;
  if (t < -slack || t > 1.0 + slack) {
    throw error(errc::unrealizable, std::string(what) + " = " + std::to_string(t) + " lies outside [0, 1]");
  }
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace detail

/// Eve taps 1 - T_E of the beam, heterodynes it and displaces Bob's mode by g_E
/// times her results.
inline NamedAttack build_feed_forward(double transmission, double excess_noise) {
  detail::require_attack_channel(transmission, excess_noise);
  const double t = transmission;
  const double e = excess_noise;
  const double inner = 2.0 - 2.0 * t + t * e;
  if (inner < 0.0) throw error(errc::unrealizable, "2 - 2T + T eps < 0");
  const double g = std::sqrt(e * t);
  const double te = detail::clamp_unit(
      4.0 * (2.0 - std::sqrt(e * inner)) / ((2.0 + t * e) * (2.0 + t * e) / t) - t * (2.0 - e) / (2.0 + t * e),
      "tap transmission T_E");
  const BlockDiagSymplectic s = optics::p_gain(3, -g, 0, 2)
                                    .then_after(optics::x_gain(3, g, 0, 1))
                                    .then_after(optics::eve_mixer())
                                    .then_after(optics::beam_splitter(3, te, 0, 1));
  return {AttackKind::feed_forward, FeedForwardTuning{g, te}, s};
}

/// Eve teleports the signal to Bob through an EPR pair; X and P of the
/// interferometer outputs feed Bob's displacement with gain g_E.
inline NamedAttack build_teleportation(double transmission, double excess_noise) {
  detail::require_attack_channel(transmission, excess_noise);
  const double t = transmission;
  const double e = excess_noise;
  const double root_t = std::sqrt(t);
  if (std::abs(1.0 - root_t) < 1e-12) {
    throw error(errc::singular_tuning, "teleportation tuning divides by (1 - sqrt(T))^2 = 0 at T = 1");
  }
  const double inner = 2.0 - 2.0 * t + t * e;
  if (inner < 0.0) throw error(errc::unrealizable, "2 - 2T + T eps < 0");
  const double s_sq = (1.0 - t + t * e - std::sqrt(t * e * inner)) / ((1.0 - root_t) * (1.0 - root_t));
  if (!(s_sq > 0.0)) throw error(errc::unrealizable, "EPR squeezing s^2 = " + std::to_string(s_sq) + " <= 0");
  const double g = std::sqrt(2.0 * t);
  const double s = std::sqrt(s_sq);
  const BlockDiagSymplectic m = optics::p_gain(3, g, 0, 2)
                                    .then_after(optics::x_gain(3, g, 0, 1))
                                    .then_after(optics::swap(3, 0, 2))
                                    .then_after(optics::beam_splitter(3, 0.5, 0, 1))
                                    .then_after(optics::epr_pair(s));
  return {AttackKind::teleportation, TeleportationTuning{g, s}, m};
}

/// Eve replaces the line by a beam-splitter T_E = T fed with one arm of an EPR
/// pair and measures the tapped beam jointly with the other arm.
inline NamedAttack build_entangling_cloner(double transmission, double excess_noise) {
  detail::require_attack_channel(transmission, excess_noise, infinite_noise);
  const double t = transmission;
  if (!(t < 1.0)) throw error(errc::singular_tuning, "entangling-cloner tuning needs T < 1");
  // (s^4 + 1) / (2 s^2) = noise; the root with s^2 <= 1 matches Eve's mixer orientation.
  const double noise = t * excess_noise / (1.0 - t) + 1.0;
  const double s_sq = 1.0 / (noise + std::sqrt(noise * noise - 1.0));
  const double s = std::sqrt(s_sq);
  const BlockDiagSymplectic m = optics::beam_splitter(3, 0.5, 1, 2)
                                    .then_after(optics::beam_splitter(3, t, 0, 1))
                                    .then_after(optics::epr_pair(s));
  return {AttackKind::entangling_cloner, EntanglingClonerTuning{t, s}, m};
}

/// Eve amplifies the signal with gain G (idler in E2), taps 1 - T_E of it into
/// E1, then mixes E1 and E2 on a balanced beam-splitter before measuring.
inline NamedAttack build_cloning(double transmission, double excess_noise) {
  detail::require_attack_channel(transmission, excess_noise);
  if (excess_noise == 2.0) throw error(errc::unrealizable, "eps = 2 requires an infinite amplifier gain");
  const double te = detail::clamp_unit(transmission * (1.0 - excess_noise / 2.0), "tap transmission T_E");
  const double gain = 1.0 / (1.0 - excess_noise / 2.0);
  const BlockDiagSymplectic m = optics::eve_mixer()
                                    .then_after(optics::beam_splitter(3, te, 0, 1))
                                    .then_after(optics::amplifier(3, gain, 0, 2));
  return {AttackKind::cloning, CloningTuning{te, gain}, m};
}

inline NamedAttack build_attack(AttackKind kind, double transmission, double excess_noise) {
  switch (kind) {
    case AttackKind::feed_forward: return build_feed_forward(transmission, excess_noise);
    case AttackKind::cloning: return build_cloning(transmission, excess_noise);
    case AttackKind::teleportation: return build_teleportation(transmission, excess_noise);
    case AttackKind::entangling_cloner: return build_entangling_cloner(transmission, excess_noise);
  }
  throw error(errc::parameter, "unknown attack kind");
}

/// Pure-loss attack: Eve taps 1 - T of the beam and heterodynes it, splitting
/// it evenly between E1 (X measured) and E2 (P measured).
inline BlockDiagSymplectic beam_splitting_attack(double transmission) {
  return optics::eve_mixer().then_after(optics::beam_splitter(3, detail::clamp_unit(transmission, "T"), 0, 1));
}

/// Largest deviation of a view from the heterodyne bounds for the channel (T, eps).
inline double saturation_residual(const EveView& view, double transmission, double excess_noise, double variance) {
  const double chi_min = hetero_chi_E_min(transmission, excess_noise);
  const double v_min = hetero_V_min(variance, chi_min);
  auto gap = [](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b ? 0.0 : infinite_noise;
    return std::abs(a - b);
  };
  return std::max({gap(view.chi_xe1, chi_min), gap(view.chi_pe2, chi_min), gap(view.v_x_cond, v_min),
                   gap(view.v_p_cond, v_min)});
}

/// Largest deviation of the attack's channel from (T, eps) over both quadratures.
inline double roundtrip_residual(const ChannelParams& c, double transmission, double excess_noise) {
  return std::max({std::abs(c.x.transmission - transmission), std::abs(c.p.transmission - transmission),
                   std::abs(c.x.excess_noise - excess_noise), std::abs(c.p.excess_noise - excess_noise)});
}

}  // namespace cvqkd
