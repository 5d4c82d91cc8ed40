#pragma once

namespace cvqkd {

/// Numerical tolerances shared by the library, the test suites and the CLI.
struct Tolerances {
  double symplectic_residual = 1e-10;
  double determinant = 1e-8;
  double symmetry = 1e-12;
  double physicality = 1e-8;
  double orthogonality = 1e-10;
  double schur_agreement = 1e-10;
  double invariants = 1e-8;
  double channel_roundtrip = 1e-10;
  double symmetric_channel = 1e-10;
  double saturation = 1e-8;
  double dominance = 1e-9;
  double cross_derivation = 1e-9;
  double coincidence = 1e-9;
  double homodyne_equality = 1e-8;
  double heterodyne_bound = 1e-8;
  // Relative pivot threshold below which a conditioning block counts as singular.
  double singular_pivot = 1e-13;
};

inline constexpr Tolerances default_tolerances{};

}  // namespace cvqkd
