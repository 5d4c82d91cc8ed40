#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "cvqkd/attack_models.hpp"
#include "oracles.hpp"

using namespace cvqkd;

namespace {

constexpr double kT = 0.5;
constexpr double kEps = 0.02;
constexpr double kV = 11.0;
const double kChi = 1.0 / kT + kEps - 1.0;

template <class F>
void expect_code(errc code, F f) {
  try {
    f();
    FAIL() << "expected " << to_string(code);
  } catch (const error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

void expect_view_near(const EveView& a, const EveView& b, double tol) {
  EXPECT_NEAR(a.chi_xe1, b.chi_xe1, tol);
  EXPECT_NEAR(a.chi_pe2, b.chi_pe2, tol);
  EXPECT_NEAR(a.v_x_cond, b.v_x_cond, tol);
  EXPECT_NEAR(a.v_p_cond, b.v_p_cond, tol);
}

double family_ibe(double b4, int sigma) {
  const auto a = symmetrize(kT, kChi, b4, sigma);
  const auto view = eve_view_from(a.matrix, kV);
  return oracle::het_ibe(kV, kT, kChi, view.v_x_cond, view.v_p_cond);
}

double family_iae(double b4, int sigma) {
  const auto view = eve_view_from(symmetrize(kT, kChi, b4, sigma).matrix, kV);
  return oracle::het_iae(kV, view.chi_xe1, view.chi_pe2);
}

const std::array<AttackKind, 4> kKinds{AttackKind::feed_forward, AttackKind::cloning, AttackKind::teleportation,
                                       AttackKind::entangling_cloner};

}  // namespace

TEST(ChannelParamsFrom, Identity) {
  const auto c = channel_params_from(BlockDiagSymplectic::identity(3), kV);
  EXPECT_EQ(c.x.transmission, 1.0);
  EXPECT_EQ(c.p.transmission, 1.0);
  EXPECT_EQ(c.x.chi, 0.0);
  EXPECT_EQ(c.x.excess_noise, 0.0);
  EXPECT_EQ(c.p.excess_noise, 0.0);
}

TEST(ChannelParamsFrom, PureLoss) {
  const double te = 0.37;
  const auto c = channel_params_from(beam_splitting_attack(te), kV);
  EXPECT_NEAR(c.x.transmission, te, 1e-15);
  EXPECT_NEAR(c.p.transmission, te, 1e-15);
  EXPECT_NEAR(c.x.excess_noise, 0.0, 1e-14);
  EXPECT_NEAR(c.x.chi, 1.0 / te - 1.0, 1e-14);
  EXPECT_NEAR(c.x.chi, 1.0 / c.x.transmission + c.x.excess_noise - 1.0, 1e-12);
}

TEST(ChannelParamsFrom, DecoupledChannelIsDegenerate) {
  expect_code(errc::degenerate_channel, [] { channel_params_from(optics::swap(3, 0, 1), kV); });
}

TEST(ChannelParamsFrom, FeedForwardRoundTrip) {
  const auto c = channel_params_from(build_feed_forward(kT, kEps).matrix, kV);
  EXPECT_LE(roundtrip_residual(c, kT, kEps), 1e-10);
}

TEST(EveView, IdentityHasInfiniteNoise) {
  const auto view = eve_view_from(BlockDiagSymplectic::identity(3), kV);
  EXPECT_TRUE(std::isinf(view.chi_xe1));
  EXPECT_TRUE(std::isinf(view.chi_pe2));
  EXPECT_EQ(view.v_x_cond, kV);
  const auto closed = eve_view_closed_form(BlockDiagSymplectic::identity(3), kV);
  EXPECT_TRUE(std::isinf(closed.chi_xe1));
  EXPECT_NEAR(closed.v_p_cond, kV, 1e-14);
}

TEST(EveView, BalancedBeamSplitterSchurAndClosedFormAgree) {
  const auto s = beam_splitting_attack(0.5);
  const auto view = eve_view_from(s, kV);
  const Matrix g = propagate(s, CovarianceMatrix::coherent_input(3, kV)).entries();
  EXPECT_NEAR(view.v_x_cond, oracle::schur(g, 0, {1}), 1e-10);
  const auto closed = eve_view_closed_form(s, kV);
  EXPECT_NEAR(view.v_x_cond, closed.v_x_cond, 1e-10);
  EXPECT_NEAR(view.chi_xe1, closed.chi_xe1, 1e-10);
}

TEST(EveView, ClosedFormMatchesSchurOnRandomAttacks) {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto p = IwasawaParams::three_mode(normal(gen), normal(gen), normal(gen),
                                             {std::exp(u(gen)), std::exp(u(gen)), std::exp(u(gen))},
                                             random_orthogonal(3, gen));
    const auto s = compose_iwasawa(p);
    const auto a = eve_view_from(s, kV);
    const auto b = eve_view_closed_form(s, kV);
    const Matrix g = propagate(s, CovarianceMatrix::coherent_input(3, kV)).entries();
    const double ref_x = oracle::schur(g, 0, {1});
    const double ref_p = oracle::schur(g, 3, {5});
    EXPECT_NEAR(a.v_x_cond, ref_x, 1e-10 * std::max(1.0, ref_x));
    EXPECT_NEAR(a.v_p_cond, ref_p, 1e-10 * std::max(1.0, ref_p));
    EXPECT_NEAR(a.v_x_cond, b.v_x_cond, 1e-10 * std::max(1.0, ref_x));
    EXPECT_NEAR(a.v_p_cond, b.v_p_cond, 1e-10 * std::max(1.0, ref_p));
  }
}

TEST(EveView, MeasuredModesMustBeAncillas) {
  const EveMeasurement bad{0, 2};
  expect_code(errc::dimension, [&] { eve_view_from(BlockDiagSymplectic::identity(3), kV, bad); });
}

TEST(Symmetrize, LosslessNoiselessChannelIsIdentity) {
  const auto a = symmetrize(1.0, 0.0, 0.0, 1);
  EXPECT_LE((a.matrix.x() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((a.matrix.p() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  expect_code(errc::parameter, [] { symmetrize(1.0, 0.0, 0.1, 1); });
}

TEST(Symmetrize, RhoArithmetic) {
  EXPECT_NEAR(family_rho(kT, kChi), 0.0101, 1e-15);
  EXPECT_NEAR(symmetrize(kT, kChi, 0.2, 1).family.rho, 0.0101, 1e-15);
}

TEST(Symmetrize, RoundTripBothSigns) {
  for (int sigma : {1, -1}) {
    for (double b4 : {0.2, -0.3, 0.0, 0.6}) {
      const auto a = symmetrize(kT, kChi, b4, sigma);
      const auto c = channel_params_from(a.matrix, kV);
      EXPECT_LE(roundtrip_residual(c, kT, kEps), 1e-10) << "b4=" << b4 << " sigma=" << sigma;
      EXPECT_TRUE(c.symmetric(1e-10));
      EXPECT_LE(a.matrix.residual(), 1e-12);
      EXPECT_NEAR(a.factors.delta(), a.family.delta, 1e-14);
      EXPECT_NEAR(a.factors.passive(1, 0), b4, 1e-15);
    }
  }
}

TEST(Symmetrize, Errors) {
  expect_code(errc::not_symmetrizable, [] { symmetrize(0.5, 0.5, 0.0, 1); });
  expect_code(errc::parameter, [] { symmetrize(kT, kChi, 0.75, 1); });
  expect_code(errc::parameter, [] { symmetrize(kT, kChi, 0.1, 0); });
}

TEST(Symmetrize, OrthogonalCompletionIsDeterministic) {
  Vector col(3);
  col << 0.6, 0.0, 0.8;
  const Matrix q = complete_orthogonal(col);
  EXPECT_LE((q * q.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(q.col(0), col);
  EXPECT_EQ(q, complete_orthogonal(col));
}

TEST(OptimalB4, ClosedFormValue) {
  const double b4 = optimal_b4(kT, kChi, 1);
  EXPECT_NEAR(b4, 0.46748, 5e-6);
  EXPECT_NEAR(b4, oracle::b4_star(kT, kChi, 1), 1e-15);
  EXPECT_LT(b4 * b4, kChi / (1.0 + kChi));
  EXPECT_NEAR(kChi / (1.0 + kChi), 0.50495, 5e-6);
  EXPECT_NEAR(optimal_b4(kT, kChi, -1), -b4, 1e-15);
}

TEST(OptimalB4, DenseGridMaximumAgrees) {
  const double limit = std::sqrt(kChi / (1.0 + kChi));
  const int n = 10000;
  double best = -1e300;
  double best_b4 = 0.0;
  for (int i = 1; i < n; ++i) {
    const double b4 = -limit + 2.0 * limit * i / n;
    const double ibe = family_ibe(b4, 1);
    if (ibe > best) {
      best = ibe;
      best_b4 = b4;
    }
  }
  const double step = 2.0 * limit / n;
  const double b4 = optimal_b4(kT, kChi, 1);
  EXPECT_NEAR(best_b4, b4, 2.0 * step);
  EXPECT_GE(family_ibe(b4, 1), best - 1e-12);
}

TEST(OptimalB4, SaturatesEquationNine) {
  const auto a = symmetrize(kT, kChi, optimal_b4(kT, kChi, 1), 1);
  const auto view = eve_view_from(a.matrix, kV);
  EXPECT_NEAR(view.chi_xe1, view.chi_pe2, 1e-10);
  EXPECT_NEAR(view.chi_xe1, 2.4915, 5e-5);
  EXPECT_NEAR(view.chi_xe1, oracle::chi_e_min(kT, kEps), 1e-8);
  EXPECT_NEAR(view.v_x_cond, oracle::v_min(kV, oracle::chi_e_min(kT, kEps)), 1e-8);
}

TEST(OptimalB4, DominatesRandomAdmissibleValues) {
  std::mt19937_64 gen(43);
  const double limit = std::sqrt(kChi / (1.0 + kChi));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (int sigma : {1, -1}) {
    const double star = optimal_b4(kT, kChi, sigma);
    const double ibe_star = family_ibe(star, sigma);
    const double iae_star = family_iae(star, sigma);
    for (int k = 0; k < 1000; ++k) {
      const double b4 = u(gen);
      if (b4 * b4 >= limit * limit) continue;
      EXPECT_LE(family_ibe(b4, sigma), ibe_star + 1e-9);
      EXPECT_LE(family_iae(b4, sigma), iae_star + 1e-9);
    }
  }
}

TEST(OptimalB4, OutsideCoverage) {
  // rho >= 0 but T (1 + chi) < 1 needs chi < 0.
  expect_code(errc::domain, [] { optimal_b4(0.5, -1.2, 1); });
  expect_code(errc::not_symmetrizable, [] { optimal_b4(0.5, 0.5, 1); });
}

TEST(FeedForward, Tuning) {
  const auto a = build_feed_forward(kT, kEps);
  const auto& t = std::get<FeedForwardTuning>(a.tuning);
  EXPECT_NEAR(t.gain * t.gain, 0.01, 1e-15);
  EXPECT_NEAR(t.tap_transmission, 0.42718, 5e-6);
  EXPECT_NEAR(t.tap_transmission, oracle::feed_forward_te(kT, kEps), 1e-15);
  EXPECT_LE(roundtrip_residual(channel_params_from(a.matrix, kV), kT, kEps), 1e-10);
  EXPECT_LE(saturation_residual(eve_view_from(a.matrix, kV), kT, kEps, kV), 1e-8);
}

TEST(FeedForward, NoiselessLimitIsBeamSplitting) {
  const auto a = build_feed_forward(kT, 0.0);
  EXPECT_EQ(std::get<FeedForwardTuning>(a.tuning).gain, 0.0);
  expect_view_near(eve_view_from(a.matrix, kV), eve_view_from(beam_splitting_attack(kT), kV), 1e-10);
}

TEST(Teleportation, Tuning) {
  const auto a = build_teleportation(kT, kEps);
  const auto& t = std::get<TeleportationTuning>(a.tuning);
  EXPECT_NEAR(t.gain * t.gain, 1.0, 1e-15);
  EXPECT_NEAR(t.squeezing * t.squeezing, oracle::teleportation_s2(kT, kEps), 1e-12);
  EXPECT_NEAR(t.squeezing * t.squeezing, 4.7735, 5e-4);
  EXPECT_LE(roundtrip_residual(channel_params_from(a.matrix, kV), kT, kEps), 1e-10);
  expect_view_near(eve_view_from(a.matrix, kV), eve_view_from(build_feed_forward(kT, kEps).matrix, kV), 1e-8);
}

TEST(Teleportation, SingularAtUnitTransmission) {
  expect_code(errc::singular_tuning, [] { build_teleportation(1.0, kEps); });
}

TEST(EntanglingCloner, Tuning) {
  const auto a = build_entangling_cloner(kT, kEps);
  const auto& t = std::get<EntanglingClonerTuning>(a.tuning);
  const double s2 = t.squeezing * t.squeezing;
  // Roots of s^4 - 2.04 s^2 + 1 = 0.
  EXPECT_NEAR(s2 * s2 - 2.04 * s2 + 1.0, 0.0, 1e-14);
  EXPECT_NEAR(s2, 0.81900, 5e-5);
  EXPECT_EQ(t.tap_transmission, kT);
  const auto view = eve_view_from(a.matrix, kV);
  EXPECT_NEAR(view.v_x_cond, 2.1055, 5e-5);
  EXPECT_NEAR(view.v_x_cond, oracle::v_min(kV, oracle::chi_e_min(kT, kEps)), 1e-8);
}

TEST(EntanglingCloner, NoiselessLimit) {
  const auto a = build_entangling_cloner(kT, 0.0);
  EXPECT_EQ(std::get<EntanglingClonerTuning>(a.tuning).squeezing, 1.0);
  expect_code(errc::singular_tuning, [] { build_entangling_cloner(1.0, kEps); });
}

TEST(Cloning, Tuning) {
  const auto a = build_cloning(kT, kEps);
  const auto& t = std::get<CloningTuning>(a.tuning);
  EXPECT_NEAR(t.amplifier_gain, 1.0 / 0.99, 1e-15);
  EXPECT_NEAR(t.tap_transmission, 0.495, 1e-15);
  expect_view_near(eve_view_from(a.matrix, kV), eve_view_from(build_entangling_cloner(kT, kEps).matrix, kV), 1e-8);
}

TEST(Cloning, Limits) {
  const auto a = build_cloning(kT, 0.0);
  EXPECT_EQ(std::get<CloningTuning>(a.tuning).amplifier_gain, 1.0);
  EXPECT_EQ(std::get<CloningTuning>(a.tuning).tap_transmission, kT);
  expect_code(errc::unrealizable, [] { build_cloning(kT, 2.0); });
}

TEST(NamedAttacks, RoundTripAndSaturationOnGrid) {
  for (AttackKind kind : kKinds) {
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      for (double eps : {0.0, 0.005, 0.02, 0.1}) {
        for (double v : {2.0, 11.0, 40.0}) {
          const auto a = build_attack(kind, t, eps);
          EXPECT_LE(roundtrip_residual(channel_params_from(a.matrix, v), t, eps), 1e-10);
          EXPECT_LE(saturation_residual(eve_view_from(a.matrix, v), t, eps, v), 1e-8)
              << to_string(kind) << " T=" << t << " eps=" << eps << " V=" << v;
        }
      }
    }
  }
}

TEST(NamedAttacks, SwappingEveRolesLeavesViewUnchanged) {
  const std::array<Index, 3> perm{0, 2, 1};
  const EveMeasurement swapped{2, 1};
  for (AttackKind kind : kKinds) {
    const auto a = build_attack(kind, kT, kEps);
    expect_view_near(eve_view_from(a.matrix.relabeled(perm), kV, swapped), eve_view_from(a.matrix, kV), 1e-10);
  }
}

TEST(NamedAttacks, KindNames) {
  for (AttackKind kind : kKinds) EXPECT_EQ(parse_attack_kind(to_string(kind)), kind);
  EXPECT_FALSE(parse_attack_kind("beam-splitter").has_value());
  expect_code(errc::domain, [] { build_attack(AttackKind::cloning, -0.5, kEps); });
}
