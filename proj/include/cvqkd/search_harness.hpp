#pragma once

// Randomized search over Iwasawa-parameterized attacks with 1..5 ancilla pairs:
// checks that homodyne conditional variances equal their closed forms and that
// no symmetric attack beats the heterodyne bound.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "cvqkd/attack_models.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/gaussian_core.hpp"
#include "cvqkd/security_bounds.hpp"
#include "cvqkd/tolerances.hpp"

namespace cvqkd {

struct SamplingRanges {
  double log_squeezing_min = -2.0;  // D entries are exp(U[min, max])
  double log_squeezing_max = 2.0;
  double feed_forward_stddev = 1.0;  // A subdiagonal entries ~ N(0, stddev^2)
  bool sample_passive = true;        // Haar B; identity otherwise

  static SamplingRanges zero_spread() { return {0.0, 0.0, 0.0, false}; }
};

enum class ChannelSampling {
  symmetrize,  // generate attacks whose channel is exactly (T, eps) on both quadratures
  condition,   // sample generic attacks and keep those that happen to be symmetric
};

struct SearchConfig {
  int n_ancilla_pairs = 1;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  SamplingRanges ranges{};
  double variance = 11.0;         // V, heterodyne search only
  double transmission = 0.5;      // T
  double excess_noise = 0.02;     // eps
  ChannelSampling channel_sampling = ChannelSampling::symmetrize;
  double symmetric_channel_tolerance = 1e-6;
  unsigned workers = 0;           // 0: hardware concurrency
  int max_resamples = 16;
  Tolerances tol{};

  Index n_modes() const { return 2 * static_cast<Index>(n_ancilla_pairs) + 1; }

  void validate() const {
    if (n_ancilla_pairs < 1 || n_ancilla_pairs > 5) throw error(errc::parameter, "n_ancilla_pairs must lie in 1..5");
    if (samples < 1) throw error(errc::parameter, "samples must be >= 1");
    if (!std::isfinite(ranges.log_squeezing_min) || !std::isfinite(ranges.log_squeezing_max) ||
        ranges.log_squeezing_min > ranges.log_squeezing_max) {
      throw error(errc::parameter, "squeezing exponent range must be finite with min <= max");
    }
    if (!(ranges.feed_forward_stddev >= 0.0) || !std::isfinite(ranges.feed_forward_stddev)) {
      throw error(errc::parameter, "feed-forward spread must be finite and >= 0");
    }
    if (!(variance >= 1.0) || !std::isfinite(variance)) throw error(errc::parameter, "V must be >= 1");
    if (!(transmission > 0.0 && transmission <= 1.0)) throw error(errc::parameter, "T must lie in (0, 1]");
    if (!(excess_noise >= 0.0 && excess_noise <= 2.0)) throw error(errc::parameter, "eps must lie in [0, 2]");
    if (!(symmetric_channel_tolerance >= 0.0)) throw error(errc::parameter, "symmetry tolerance must be >= 0");
    if (max_resamples < 0) throw error(errc::parameter, "max_resamples must be >= 0");
  }
};

/// Counter-based seed for sample `index` (and resampling attempt), independent of scheduling.
inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ index) ^ (attempt * 0xd1b54a32d192ed03ULL));
}

struct SampledAttack {
  BlockDiagSymplectic matrix;
  int resamples = 0;
};

namespace detail {

inline IwasawaParams draw_iwasawa(const SearchConfig& cfg, std::mt19937_64& gen) {
  const Index n = cfg.n_modes();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_s(cfg.ranges.log_squeezing_min, cfg.ranges.log_squeezing_max);
  IwasawaParams p;
  p.feed_forward = Matrix::Identity(n, n);
  for (Index i = 1; i < n; ++i)
    for (Index j = 0; j < i; ++j) p.feed_forward(i, j) = cfg.ranges.feed_forward_stddev * normal(gen);
  p.squeezing = Vector(n);
  for (Index i = 0; i < n; ++i) {
    p.squeezing[i] = cfg.ranges.log_squeezing_min == cfg.ranges.log_squeezing_max
                         ? std::exp(cfg.ranges.log_squeezing_min)
                         : std::exp(log_s(gen));
  }
  p.passive = cfg.ranges.sample_passive ? random_orthogonal(n, gen) : Matrix::Identity(n, n);
  return p;
}

template <class Draw>
SampledAttack sample_with_retries(const SearchConfig& cfg, std::int64_t index, Draw draw) {
  for (int attempt = 0; attempt <= cfg.max_resamples; ++attempt) {
    std::mt19937_64 gen(sample_seed(cfg.seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(attempt)));
    try {
      return {draw(gen), attempt};
    } catch (const error& e) {
      if (e.code() != errc::parameter && e.code() != errc::conditioning) throw;
    }
  }
  throw error(errc::conditioning, "no numerically sound attack after " + std::to_string(cfg.max_resamples) +
                                      " resamples at index " + std::to_string(index));
}

}  // namespace detail

/// Random attack on 2 n_pairs + 1 modes, deterministic in (seed, index). Draws
/// that fail the symplectic check are redrawn with the next attempt counter.
inline SampledAttack random_attack_sampled(const SearchConfig& cfg, std::int64_t index) {
  return detail::sample_with_retries(cfg, index, [&](std::mt19937_64& gen) {
    return compose_iwasawa(detail::draw_iwasawa(cfg, gen));
  });
}

inline BlockDiagSymplectic random_attack(const SearchConfig& cfg, std::int64_t index) {
  cfg.validate();
  return random_attack_sampled(cfg, index).matrix;
}

namespace detail {

// Random attack with channel (T, chi) on both quadratures. B's first column is
// (b1, sqrt(1 - b1^2) u) and the first column of A^{-1} is solved so that
// row 0 of S_P has the same transmission and norm as row 0 of S_X.
inline BlockDiagSymplectic draw_symmetric(const SearchConfig& cfg, double transmission, double chi,
                                          std::mt19937_64& gen) {
  const Index n = cfg.n_modes();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_s(cfg.ranges.log_squeezing_min, cfg.ranges.log_squeezing_max);
  const double s1 = std::sqrt(transmission * (1.0 + chi));
  const double b1 = 1.0 / std::sqrt(1.0 + chi);

  auto unit = [&](Index m) {
    Vector v(m);
    for (Index i = 0; i < m; ++i) v[i] = normal(gen);
    const double norm = v.norm();
    if (!(norm > 0.0)) throw error(errc::conditioning, "zero random direction");
    return Vector(v / norm);
  };

  Vector first(n);
  first[0] = b1;
  first.tail(n - 1) = std::sqrt(1.0 - b1 * b1) * unit(n - 1);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = normal(gen);
  z.col(0) = first;
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix passive = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) passive.col(j) *= -1.0;
  }

  Vector squeezing(n);
  squeezing[0] = s1;
  for (Index i = 1; i < n; ++i) {
    squeezing[i] = cfg.ranges.log_squeezing_min == cfg.ranges.log_squeezing_max
                       ? std::exp(cfg.ranges.log_squeezing_min)
                       : std::exp(log_s(gen));
  }

  const Vector tail = first.tail(n - 1);
  const double tail_sq = tail.squaredNorm();
  if (!(tail_sq > 0.0)) throw error(errc::not_symmetrizable, "chi = 0 leaves no room for a symmetric attack");
  const double m = b1 * (s1 * s1 - 1.0) / s1;
  const double q = s1 * s1 - 1.0 / (s1 * s1);
  const double rest = q - m * m / tail_sq;
  if (rest < -1e-12) throw error(errc::not_symmetrizable, "channel is outside the symmetric attack family");
  Vector perp(n - 1);
  for (Index i = 0; i < n - 1; ++i) perp[i] = normal(gen);
  perp -= perp.dot(tail) / tail_sq * tail;
  const double perp_norm = perp.norm();
  if (!(perp_norm > 0.0)) throw error(errc::conditioning, "degenerate orthogonal direction");
  const Vector w = m / tail_sq * tail + std::sqrt(std::max(rest, 0.0)) * (perp / perp_norm);

  Matrix a_inv = Matrix::Identity(n, n);
  for (Index i = 2; i < n; ++i)
    for (Index j = 1; j < i; ++j) a_inv(i, j) = cfg.ranges.feed_forward_stddev * normal(gen);
  for (Index i = 1; i < n; ++i) a_inv(i, 0) = w[i - 1] * squeezing[i];

  IwasawaParams p;
  p.feed_forward = unit_lower_inverse(a_inv);
  p.feed_forward.diagonal().setOnes();
  p.feed_forward.triangularView<Eigen::StrictlyUpper>().setZero();
  p.squeezing = squeezing;
  p.passive = passive;
  return compose_iwasawa(p);
}

}  // namespace detail

/// Random attack whose channel is symmetric with the configured (T, eps).
inline SampledAttack symmetric_random_attack(const SearchConfig& cfg, std::int64_t index) {
  const double chi = chi_total(cfg.transmission, cfg.excess_noise);
  return detail::sample_with_retries(cfg, index, [&](std::mt19937_64& gen) {
    return detail::draw_symmetric(cfg, cfg.transmission, chi, gen);
  });
}

// ---------------------------------------------------------------------------
// Per-sample records

struct HomodyneRecord {
  std::int64_t index = 0;
  bool degenerate = false;
  int resamples = 0;
  ChannelParams channel{};
  // [quadrature X, P]: Bob measures Q on B', Eve measures Q on every ancilla.
  std::array<double, 2> rr{};
  std::array<double, 2> rr_reference{};
  std::array<double, 2> dr{};
  std::array<double, 2> dr_reference{};
  double max_relative_deviation = 0.0;
  double max_absolute_deviation = 0.0;
};

enum class SampleStatus { retained, degenerate, asymmetric, rejected };

struct HeterodyneRecord {
  std::int64_t index = 0;
  SampleStatus status = SampleStatus::retained;
  int resamples = 0;
  ChannelParams channel{};
  double v_x_cond = 0.0;
  double v_p_cond = 0.0;
  double product = 0.0;        // (V_X|E + 1)(V_P|E + 1)
  double product_bound = 0.0;  // (V_min + 1)^2
  double i_be = 0.0;
  double i_be_bound = 0.0;
  double i_ae = 0.0;
  double i_ae_bound = 0.0;
};

/// Homodyne conditional variances of a single attack against their closed forms.
inline HomodyneRecord evaluate_homodyne(const BlockDiagSymplectic& s, double variance,
                                        const Tolerances& tol = default_tolerances) {
  HomodyneRecord rec;
  const Index n = s.n_modes();
  try {
    rec.channel = channel_params_from(s, variance);
  } catch (const error& e) {
    if (e.code() != errc::degenerate_channel) throw;
    rec.degenerate = true;
    return rec;
  }
  std::vector<Index> eve(static_cast<std::size_t>(n - 1));
  std::vector<Index> eve_aug(static_cast<std::size_t>(n - 1));
  for (Index k = 1; k < n; ++k) {
    eve[static_cast<std::size_t>(k - 1)] = k;
    eve_aug[static_cast<std::size_t>(k - 1)] = k + 1;
  }
  Vector root_d = Vector::Ones(n);
  root_d[0] = std::sqrt(variance);
  const double root_mod = std::sqrt(variance - 1.0);
  for (int k = 0; k < 2; ++k) {
    const Matrix& block = k == 0 ? s.x() : s.p();
    const QuadratureChannel& other = k == 0 ? rec.channel.p : rec.channel.x;
    const Matrix factor = block * root_d.asDiagonal();
    // Alice's modulation as an extra row: gamma_aug = F_aug F_aug^T.
    Matrix aug = Matrix::Zero(n + 1, n + 1);
    aug(0, 0) = root_mod;
    aug.block(1, 0, n, 1) = block.col(0) * root_mod;
    aug.block(1, 1, n, n) = block;
    try {
      rec.rr[k] = conditional_variance_factored(factor, 0, eve, tol);
      rec.dr[k] = conditional_variance_factored(aug, 0, eve_aug, tol);
    } catch (const error& e) {
      if (e.code() != errc::conditioning) throw;
      rec.degenerate = true;
      return rec;
    }
    rec.rr_reference[k] = variance / (other.transmission * (variance * other.chi + 1.0));
    rec.dr_reference[k] = (variance - 1.0) * (1.0 + other.chi) / (variance * other.chi + 1.0);
    for (auto [got, want] : {std::pair{rec.rr[k], rec.rr_reference[k]}, std::pair{rec.dr[k], rec.dr_reference[k]}}) {
      const double abs_dev = std::abs(got - want);
      const double rel_dev = want == 0.0 ? abs_dev : abs_dev / std::abs(want);
      rec.max_absolute_deviation = std::max(rec.max_absolute_deviation, abs_dev);
      rec.max_relative_deviation = std::max(rec.max_relative_deviation, rel_dev);
    }
  }
  return rec;
}

/// Heterodyne quantities of one attack: Eve measures X on ancillas 1..pairs and
/// P on ancillas pairs+1..2 pairs. Bounds use the channel (T, eps) given.
inline HeterodyneRecord evaluate_heterodyne(const BlockDiagSymplectic& s, double variance, double transmission,
                                            double excess_noise, const Tolerances& tol = default_tolerances) {
  HeterodyneRecord rec;
  const Index n = s.n_modes();
  if (n < 3 || n % 2 == 0) throw error(errc::dimension, "heterodyne search needs 2 p + 1 modes");
  const Index pairs = (n - 1) / 2;
  try {
    rec.channel = channel_params_from(s, variance);
  } catch (const error& e) {
    if (e.code() != errc::degenerate_channel) throw;
    rec.status = SampleStatus::degenerate;
    return rec;
  }
  std::vector<Index> xs, ps, xs_aug, ps_aug;
  for (Index k = 1; k <= pairs; ++k) {
    xs.push_back(k);
    xs_aug.push_back(k + 1);
    ps.push_back(pairs + k);
    ps_aug.push_back(pairs + k + 1);
  }
  Vector root_d = Vector::Ones(n);
  root_d[0] = std::sqrt(variance);
  const double root_mod = std::sqrt(variance - 1.0);
  auto augmented = [&](const Matrix& block) {
    Matrix aug = Matrix::Zero(n + 1, n + 1);
    aug(0, 0) = root_mod;
    aug.block(1, 0, n, 1) = block.col(0) * root_mod;
    aug.block(1, 1, n, n) = block;
    return aug;
  };
  double a_x = 0.0;
  double a_p = 0.0;
  try {
    rec.v_x_cond = conditional_variance_factored(s.x() * root_d.asDiagonal(), 0, xs, tol);
    rec.v_p_cond = conditional_variance_factored(s.p() * root_d.asDiagonal(), 0, ps, tol);
    if (variance > 1.0) {
      a_x = conditional_variance_factored(augmented(s.x()), 0, xs_aug, tol);
      a_p = conditional_variance_factored(augmented(s.p()), 0, ps_aug, tol);
    }
  } catch (const error& e) {
    if (e.code() != errc::conditioning) throw;
    rec.status = SampleStatus::degenerate;
    return rec;
  }
  const double chi_e = hetero_chi_E_min(transmission, excess_noise);
  const double v_min = hetero_V_min(variance, chi_e);
  rec.product = (rec.v_x_cond + 1.0) * (rec.v_p_cond + 1.0);
  rec.product_bound = (v_min + 1.0) * (v_min + 1.0);
  const double vb_x = detail::heterodyne_bob_variance(rec.channel.x, variance);
  const double vb_p = detail::heterodyne_bob_variance(rec.channel.p, variance);
  rec.i_be = half_log_ratio(vb_x, 0.5 * (rec.v_x_cond + 1.0)) + half_log_ratio(vb_p, 0.5 * (rec.v_p_cond + 1.0));
  const QuadratureChannel q = quadrature_channel(transmission, excess_noise);
  rec.i_be_bound = 2.0 * half_log_ratio(detail::heterodyne_bob_variance(q, variance), 0.5 * (v_min + 1.0));
  if (variance > 1.0) {
    rec.i_ae = half_log_ratio(variance - 1.0, a_x) + half_log_ratio(variance - 1.0, a_p);
  }
  rec.i_ae_bound = 2.0 * shannon_information(variance, chi_e);
  return rec;
}

// ---------------------------------------------------------------------------
// Search runs

struct SearchSummary {
  std::string mode;
  int n_ancilla_pairs = 0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::int64_t retained = 0;
  std::int64_t degenerate = 0;
  std::int64_t skipped = 0;  // asymmetric or unsymmetrizable samples
  std::int64_t resampled = 0;
  double max_deviation = 0.0;  // homodyne: relative deviation; heterodyne: largest bound excess
  double max_absolute_deviation = 0.0;
  double min_product_margin = infinite_noise;
  double max_i_be_excess = -infinite_noise;
  double max_i_ae_excess = -infinite_noise;
  std::int64_t violations = 0;
  double tolerance = 0.0;
  bool passed = false;

  double rejected_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(degenerate + skipped) / static_cast<double>(samples);
  }
};

template <class Record>
struct SearchOutcome {
  std::vector<Record> records;
  SearchSummary summary;
};

namespace detail {

// Evaluates f(index) for every sample; records land at their index so the
// outcome does not depend on the number of workers.
template <class Record, class F>
std::vector<Record> run_parallel(const SearchConfig& cfg, F f) {
  const auto total = static_cast<std::size_t>(cfg.samples);
  std::vector<Record> records(total);
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    constexpr std::size_t chunk = 256;
    while (true) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= total) return;
      const std::size_t end = std::min(total, begin + chunk);
      try {
        for (std::size_t i = begin; i < end; ++i) records[i] = f(static_cast<std::int64_t>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace detail

inline SearchOutcome<HomodyneRecord> verify_homodyne_optimality(const SearchConfig& cfg) {
  cfg.validate();
  SearchOutcome<HomodyneRecord> out;
  out.records = detail::run_parallel<HomodyneRecord>(cfg, [&](std::int64_t i) {
    const SampledAttack a = random_attack_sampled(cfg, i);
    HomodyneRecord r = evaluate_homodyne(a.matrix, cfg.variance, cfg.tol);
    r.index = i;
    r.resamples = a.resamples;
    return r;
  });
  SearchSummary& s = out.summary;
  s.mode = "homodyne";
  s.n_ancilla_pairs = cfg.n_ancilla_pairs;
  s.samples = cfg.samples;
  s.seed = cfg.seed;
  s.tolerance = cfg.tol.homodyne_equality;
  for (const auto& r : out.records) {
    s.resampled += r.resamples;
    if (r.degenerate) {
      ++s.degenerate;
      continue;
    }
    ++s.retained;
    s.max_deviation = std::max(s.max_deviation, r.max_relative_deviation);
    s.max_absolute_deviation = std::max(s.max_absolute_deviation, r.max_absolute_deviation);
    if (!(r.max_relative_deviation <= s.tolerance)) ++s.violations;
  }
  s.passed = s.violations == 0 && s.retained > 0;
  return out;
}

inline SearchOutcome<HeterodyneRecord> verify_heterodyne_bound(const SearchConfig& cfg) {
  cfg.validate();
  hetero_chi_E_min(cfg.transmission, cfg.excess_noise);  // domain check before sampling
  SearchOutcome<HeterodyneRecord> out;
  out.records = detail::run_parallel<HeterodyneRecord>(cfg, [&](std::int64_t i) {
    HeterodyneRecord r;
    SampledAttack a{BlockDiagSymplectic::identity(cfg.n_modes())};
    if (cfg.channel_sampling == ChannelSampling::symmetrize) {
      try {
        a = symmetric_random_attack(cfg, i);
      } catch (const error& e) {
        if (e.code() != errc::not_symmetrizable) throw;
        r.index = i;
        r.status = SampleStatus::rejected;
        return r;
      }
    } else {
      a = random_attack_sampled(cfg, i);
    }
    double t = cfg.transmission;
    double eps = cfg.excess_noise;
    if (cfg.channel_sampling == ChannelSampling::condition) {
      ChannelParams c;
      try {
        c = channel_params_from(a.matrix, cfg.variance);
      } catch (const error& e) {
        if (e.code() != errc::degenerate_channel) throw;
        r.index = i;
        r.status = SampleStatus::degenerate;
        return r;
      }
      const bool usable = c.symmetric(cfg.symmetric_channel_tolerance) && c.x.transmission <= 1.0 &&
                          c.x.excess_noise >= 0.0 && c.x.excess_noise <= 2.0 &&
                          2.0 - 2.0 * c.x.transmission + c.x.transmission * c.x.excess_noise >= 0.0;
      if (!usable) {
        r.index = i;
        r.status = SampleStatus::asymmetric;
        r.channel = c;
        return r;
      }
      t = c.x.transmission;
      eps = c.x.excess_noise;
    }
    r = evaluate_heterodyne(a.matrix, cfg.variance, t, eps, cfg.tol);
    r.index = i;
    r.resamples = a.resamples;
    return r;
  });
  SearchSummary& s = out.summary;
  s.mode = "heterodyne";
  s.n_ancilla_pairs = cfg.n_ancilla_pairs;
  s.samples = cfg.samples;
  s.seed = cfg.seed;
  s.tolerance = cfg.tol.heterodyne_bound;
  double worst = -infinite_noise;
  for (const auto& r : out.records) {
    s.resampled += r.resamples;
    switch (r.status) {
      case SampleStatus::degenerate: ++s.degenerate; continue;
      case SampleStatus::asymmetric:
      case SampleStatus::rejected: ++s.skipped; continue;
      case SampleStatus::retained: break;
    }
    ++s.retained;
    const double margin = r.product - r.product_bound;
    const double be_excess = r.i_be - r.i_be_bound;
    const double ae_excess = r.i_ae - r.i_ae_bound;
    s.min_product_margin = std::min(s.min_product_margin, margin);
    s.max_i_be_excess = std::max(s.max_i_be_excess, be_excess);
    s.max_i_ae_excess = std::max(s.max_i_ae_excess, ae_excess);
    worst = std::max({worst, -margin, be_excess, ae_excess});
    if (margin < -s.tolerance || be_excess > s.tolerance || ae_excess > s.tolerance) ++s.violations;
  }
  s.max_deviation = worst;
  s.passed = s.violations == 0 && s.retained > 0;
  return out;
}

// ---------------------------------------------------------------------------
// Reporting

inline csv::Table summary_table(const std::vector<SearchSummary>& summaries) {
  csv::Table t({"mode", "n_pairs", "samples", "seed", "retained", "degenerate", "skipped", "resampled",
                "max_deviation", "min_product_margin", "max_I_BE_excess", "max_I_AE_excess", "violations",
                "tolerance", "passed"});
  for (const auto& s : summaries) {
    const bool het = s.mode == "heterodyne";
    t.add({s.mode, std::to_string(s.n_ancilla_pairs), std::to_string(s.samples), std::to_string(s.seed),
           std::to_string(s.retained), std::to_string(s.degenerate), std::to_string(s.skipped),
           std::to_string(s.resampled), csv::number(s.max_deviation),
           het ? csv::number(s.min_product_margin) : "", het ? csv::number(s.max_i_be_excess) : "",
           het ? csv::number(s.max_i_ae_excess) : "", std::to_string(s.violations), csv::number(s.tolerance),
           s.passed ? "1" : "0"});
  }
  return t;
}

inline std::string summary_line(const SearchSummary& s) {
  if (s.mode == "homodyne") {
    return fmt::format("{} homodyne-optimality n_pairs={} samples={} retained={} degenerate={} "
                       "max_rel_deviation={:.3e} (tol {:.0e}) violations={}",
                       s.passed ? "PASS" : "FAIL", s.n_ancilla_pairs, s.samples, s.retained, s.degenerate,
                       s.max_deviation, s.tolerance, s.violations);
  }
  return fmt::format("{} heterodyne-bound n_pairs={} samples={} retained={} skipped={} degenerate={} "
                     "min_product_margin={:.3e} max_I_BE_excess={:.3e} max_I_AE_excess={:.3e} (tol {:.0e}) "
                     "violations={}",
                     s.passed ? "PASS" : "FAIL", s.n_ancilla_pairs, s.samples, s.retained, s.skipped, s.degenerate,
                     s.min_product_margin, s.max_i_be_excess, s.max_i_ae_excess, s.tolerance, s.violations);
}

}  // namespace cvqkd
