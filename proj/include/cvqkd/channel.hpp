#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "cvqkd/error.hpp"

namespace cvqkd {

/// Stand-in for an infinite equivalent noise (Eve decoupled from the signal).
inline constexpr double infinite_noise = std::numeric_limits<double>::infinity();

struct QuadratureChannel {
  double transmission = 1.0;
  double excess_noise = 0.0;
  double chi = 0.0;  // 1/T + eps - 1
};

/// Channel seen by Alice and Bob, in shot-noise units.
struct ChannelParams {
  QuadratureChannel x;
  QuadratureChannel p;
  double modulation_variance = 1.0;  // V: modulation (V - 1) plus shot noise
  double shot_noise = 1.0;

  bool symmetric(double tolerance) const {
    return std::abs(x.transmission - p.transmission) <= tolerance && std::abs(x.chi - p.chi) <= tolerance;
  }
};

inline double excess_from_chi(double transmission, double chi) { return chi - 1.0 / transmission + 1.0; }

inline QuadratureChannel quadrature_channel(double transmission, double excess_noise) {
  if (!(transmission > 0.0) || !std::isfinite(transmission)) {
    throw error(errc::domain, "transmission T must be positive, got " + std::to_string(transmission));
  }
  return {transmission, excess_noise, 1.0 / transmission + excess_noise - 1.0};
}

inline ChannelParams symmetric_channel(double transmission, double excess_noise, double variance) {
  if (!(variance >= 1.0)) throw error(errc::domain, "V must be >= 1, got " + std::to_string(variance));
  const QuadratureChannel q = quadrature_channel(transmission, excess_noise);
  return {q, q, variance, 1.0};
}

}  // namespace cvqkd
