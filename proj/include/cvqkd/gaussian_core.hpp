#pragma once

// Linear-algebra substrate for Gaussian attacks: symplectic maps, their
// Iwasawa composition, covariance propagation and conditional variances.
//
// Quadrature ordering is fixed to (X_1 ... X_n, P_1 ... P_n) and every
// variance is expressed in shot-noise units (N0 = 1).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/error.hpp"
#include "cvqkd/tolerances.hpp"

namespace cvqkd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Quadrature { X, P };

constexpr Quadrature conjugate(Quadrature q) { return q == Quadrature::X ? Quadrature::P : Quadrature::X; }

inline Index quadrature_index(Quadrature q, Index mode, Index n_modes) {
  return q == Quadrature::X ? mode : n_modes + mode;
}

/// The form [[0, I_n], [-I_n, 0]].
inline Matrix symplectic_form(Index n_modes) {
  Matrix beta = Matrix::Zero(2 * n_modes, 2 * n_modes);
  beta.topRightCorner(n_modes, n_modes).setIdentity();
  beta.bottomLeftCorner(n_modes, n_modes) = -Matrix::Identity(n_modes, n_modes);
  return beta;
}

/// max-norm of S beta S^T - beta.
inline double symplectic_residual(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0 || s.rows() % 2 != 0) {
    throw error(errc::dimension, "symplectic matrix must be square with even dimension, got " +
                                     std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
  const Matrix beta = symplectic_form(s.rows() / 2);
  return (s * beta * s.transpose() - beta).cwiseAbs().maxCoeff();
}

class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(Matrix entries, double tolerance = default_tolerances.symplectic_residual)
      : entries_(std::move(entries)) {
    const double res = symplectic_residual(entries_);
    if (!(res <= tolerance)) {
      throw error(errc::parameter, "matrix is not symplectic (residual " + std::to_string(res) + ")");
    }
  }

  static SymplecticMatrix identity(Index n_modes) {
    return SymplecticMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }

  Index n_modes() const { return entries_.rows() / 2; }
  const Matrix& entries() const { return entries_; }
  double residual() const { return symplectic_residual(entries_); }
  double determinant() const { return entries_.determinant(); }

 private:
  Matrix entries_;
};

/// A symplectic map that does not mix X and P: S = diag(S_X, S_P) with S_P = S_X^{-T}.
class BlockDiagSymplectic {
 public:
  BlockDiagSymplectic(Matrix sx, Matrix sp, double tolerance = default_tolerances.symplectic_residual)
      : sx_(std::move(sx)), sp_(std::move(sp)) {
    if (sx_.rows() != sx_.cols() || sp_.rows() != sp_.cols() || sx_.rows() != sp_.rows() || sx_.rows() == 0) {
      throw error(errc::dimension, "S_X and S_P must be square blocks of equal size");
    }
    const double res = residual();
    if (!(res <= tolerance)) {
      throw error(errc::parameter, "S_P is not the inverse transpose of S_X (residual " + std::to_string(res) + ")");
    }
  }

  static BlockDiagSymplectic from_x(const Matrix& sx) {
    Eigen::FullPivLU<Matrix> lu(sx);
    if (!lu.isInvertible()) throw error(errc::conditioning, "S_X is singular");
    return BlockDiagSymplectic(sx, lu.inverse().transpose());
  }

  static BlockDiagSymplectic identity(Index n_modes) {
    return BlockDiagSymplectic(Matrix::Identity(n_modes, n_modes), Matrix::Identity(n_modes, n_modes));
  }

  Index n_modes() const { return sx_.rows(); }
  const Matrix& x() const { return sx_; }
  const Matrix& p() const { return sp_; }
  const Matrix& block(Quadrature q) const { return q == Quadrature::X ? sx_ : sp_; }

  /// Equals the symplectic residual of embed().
  double residual() const {
    return (sx_ * sp_.transpose() - Matrix::Identity(sx_.rows(), sx_.rows())).cwiseAbs().maxCoeff();
  }

  Matrix embedded() const {
    const Index n = n_modes();
    Matrix s = Matrix::Zero(2 * n, 2 * n);
    s.topLeftCorner(n, n) = sx_;
    s.bottomRightCorner(n, n) = sp_;
    return s;
  }

  SymplecticMatrix embed() const { return SymplecticMatrix(embedded()); }

  // Product this * other (apply other first).
  BlockDiagSymplectic then_after(const BlockDiagSymplectic& other) const {
    return BlockDiagSymplectic(sx_ * other.sx_, sp_ * other.sp_);
  }

  /// Conjugates by a mode permutation: mode k of the result is mode perm[k] of this map,
  /// on both the input and output side.
  BlockDiagSymplectic relabeled(std::span<const Index> perm) const {
    const Index n = n_modes();
    if (static_cast<Index>(perm.size()) != n) throw error(errc::dimension, "permutation size mismatch");
    Matrix p = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) p(k, perm[static_cast<std::size_t>(k)]) = 1.0;
    return BlockDiagSymplectic(p * sx_ * p.transpose(), p * sp_ * p.transpose());
  }

 private:
  Matrix sx_;
  Matrix sp_;
};

/// Iwasawa factors of a block-diagonal symplectic map:
/// S_X = A diag(D) B, S_P = A^{-T} diag(D)^{-1} B.
struct IwasawaParams {
  Matrix feed_forward;  // A: lower triangular, unit diagonal
  Vector squeezing;     // D: strictly positive
  Matrix passive;       // B: orthogonal

  Index n_modes() const { return squeezing.size(); }

  /// For three modes with A = [[1,0,0],[a,1,0],[b,c,1]]: delta = a c - b, the
  /// top-right entry of A^{-T}.
  double delta() const {
    if (n_modes() != 3) throw error(errc::unsupported_dimension, "delta is defined for three modes");
    return feed_forward(1, 0) * feed_forward(2, 1) - feed_forward(2, 0);
  }

  void validate(double tolerance = default_tolerances.orthogonality) const {
    const Index n = n_modes();
    if (n < 1 || feed_forward.rows() != n || feed_forward.cols() != n || passive.rows() != n ||
        passive.cols() != n) {
      throw error(errc::dimension, "Iwasawa factors must all be n x n");
    }
    for (Index i = 0; i < n; ++i) {
      if (!(squeezing[i] > 0.0) || !std::isfinite(squeezing[i])) {
        throw error(errc::parameter, "squeezing factor " + std::to_string(i) + " must be positive");
      }
      if (feed_forward(i, i) != 1.0) throw error(errc::parameter, "feed-forward matrix must have unit diagonal");
      for (Index j = i + 1; j < n; ++j) {
        if (feed_forward(i, j) != 0.0) throw error(errc::parameter, "feed-forward matrix must be lower triangular");
      }
    }
    const double orth = (passive * passive.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(orth <= tolerance)) {
      throw error(errc::parameter, "passive factor is not orthogonal (residual " + std::to_string(orth) + ")");
    }
  }

  static IwasawaParams three_mode(double a, double b, double c, const std::array<double, 3>& s,
                                  const Matrix& passive) {
    IwasawaParams p;
    p.feed_forward = Matrix::Identity(3, 3);
    p.feed_forward(1, 0) = a;
    p.feed_forward(2, 0) = b;
    p.feed_forward(2, 1) = c;
    p.squeezing = Vector(3);
    p.squeezing << s[0], s[1], s[2];
    p.passive = passive;
    return p;
  }
};

/// Rz(phi) Ry(theta) Rz(psi), with the last column negated when determinant_sign < 0.
inline Matrix euler_orthogonal(double phi, double theta, double psi, int determinant_sign = 1) {
  auto rz = [](double a) {
    Matrix r = Matrix::Identity(3, 3);
    r(0, 0) = std::cos(a);
    r(0, 1) = -std::sin(a);
    r(1, 0) = std::sin(a);
    r(1, 1) = std::cos(a);
    return r;
  };
  Matrix ry = Matrix::Identity(3, 3);
  ry(0, 0) = std::cos(theta);
  ry(0, 2) = std::sin(theta);
  ry(2, 0) = -std::sin(theta);
  ry(2, 2) = std::cos(theta);
  Matrix q = rz(phi) * ry * rz(psi);
  if (determinant_sign < 0) q.col(2) *= -1.0;
  return q;
}

inline Matrix unit_lower_inverse(const Matrix& a) {
  return a.triangularView<Eigen::UnitLower>().solve(Matrix::Identity(a.rows(), a.cols()));
}

inline BlockDiagSymplectic compose_iwasawa(const IwasawaParams& p) {
  p.validate();
  const Matrix a_inv_t = unit_lower_inverse(p.feed_forward).transpose();
  const Matrix sx = p.feed_forward * p.squeezing.asDiagonal() * p.passive;
  const Matrix sp = a_inv_t * p.squeezing.cwiseInverse().asDiagonal() * p.passive;
  return BlockDiagSymplectic(sx, sp);
}

/// Symplectic eigenvalues of a positive-definite gamma, ascending. With
/// gamma = L L^T, L^T beta L is antisymmetric and its singular values are the
/// symplectic eigenvalues, each appearing twice.
inline Vector symplectic_eigenvalues(const Matrix& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0 || gamma.rows() == 0) {
    throw error(errc::dimension, "covariance matrix must be square with even dimension");
  }
  Eigen::LLT<Matrix> llt(gamma);
  if (llt.info() != Eigen::Success) throw error(errc::parameter, "covariance matrix is not positive definite");
  const Matrix l = llt.matrixL();
  const Index n = gamma.rows() / 2;
  const Matrix m = l.transpose() * symplectic_form(n) * l;
  Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  std::sort(sv.data(), sv.data() + sv.size());
  Vector nu(n);
  for (Index k = 0; k < n; ++k) nu[k] = 0.5 * (sv[2 * k] + sv[2 * k + 1]);
  return nu;
}

class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix entries, const Tolerances& tol = default_tolerances)
      : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() % 2 != 0 || entries_.rows() == 0) {
      throw error(errc::dimension, "covariance matrix must be square with even dimension");
    }
    const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
    const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= tol.symmetry * scale)) throw error(errc::parameter, "covariance matrix is not symmetric");
    const Vector nu = cvqkd::symplectic_eigenvalues(entries_);
    if (!(nu.minCoeff() >= 1.0 - tol.physicality)) {
      throw error(errc::parameter,
                  "covariance matrix violates the uncertainty principle (min symplectic eigenvalue " +
                      std::to_string(nu.minCoeff()) + ")");
    }
  }

  static CovarianceMatrix vacuum(Index n_modes) {
    return CovarianceMatrix(Matrix::Identity(2 * n_modes, 2 * n_modes));
  }

  /// Alice's mode (mode 0) with total variance V on both quadratures, every other mode in vacuum.
  static CovarianceMatrix coherent_input(Index n_modes, double variance) {
    if (!(variance >= 1.0)) throw error(errc::parameter, "total variance V must be >= 1");
    Matrix g = Matrix::Identity(2 * n_modes, 2 * n_modes);
    g(0, 0) = variance;
    g(n_modes, n_modes) = variance;
    return CovarianceMatrix(std::move(g));
  }

  Index n_modes() const { return entries_.rows() / 2; }
  const Matrix& entries() const { return entries_; }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  Vector symplectic_eigenvalues() const { return cvqkd::symplectic_eigenvalues(entries_); }

 private:
  Matrix entries_;
};

inline CovarianceMatrix propagate(const SymplecticMatrix& s, const CovarianceMatrix& gamma) {
  if (s.entries().rows() != gamma.entries().rows()) {
    throw error(errc::dimension, "symplectic map acts on " + std::to_string(s.n_modes()) +
                                     " modes but covariance has " + std::to_string(gamma.n_modes()));
  }
  Matrix out = s.entries() * gamma.entries() * s.entries().transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return CovarianceMatrix(std::move(out));
}

inline CovarianceMatrix propagate(const BlockDiagSymplectic& s, const CovarianceMatrix& gamma) {
  return propagate(s.embed(), gamma);
}

namespace detail {

inline void check_conditioning_indices(Index dim, Index target, std::span<const Index> given) {
  if (given.empty()) throw error(errc::parameter, "conditioning set must be nonempty");
  if (target < 0 || target >= dim) throw error(errc::dimension, "target index out of range");
  std::vector<Index> sorted(given.begin(), given.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw error(errc::parameter, "conditioning set has repeated indices");
  }
  for (Index g : sorted) {
    if (g < 0 || g >= dim) throw error(errc::dimension, "conditioning index out of range");
    if (g == target) throw error(errc::parameter, "target cannot be in the conditioning set");
  }
}

}  // namespace detail

/// Schur complement gamma_tt - gamma_tg gamma_gg^{-1} gamma_gt: the variance of
/// quadrature `target` left after optimal linear estimation from `given`.
inline double conditional_variance(const Matrix& gamma, Index target, std::span<const Index> given,
                                   const Tolerances& tol = default_tolerances) {
  detail::check_conditioning_indices(gamma.rows(), target, given);
  const std::vector<Index> g(given.begin(), given.end());
  const Matrix block = gamma(g, g);
  const Vector cross = gamma(g, std::vector<Index>{target});
  Eigen::LDLT<Matrix> ldlt(block);
  const Vector d = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > tol.singular_pivot * d.maxCoeff())) {
    throw error(errc::conditioning, "conditioning block is singular");
  }
  return gamma(target, target) - cross.dot(ldlt.solve(cross));
}

inline double conditional_variance(const CovarianceMatrix& gamma, Index target, std::span<const Index> given,
                                   const Tolerances& tol = default_tolerances) {
  return conditional_variance(gamma.entries(), target, given, tol);
}

/// det(gamma restricted to {target} + given) / det(gamma restricted to given).
inline double conditional_variance_det_ratio(const Matrix& gamma, Index target, std::span<const Index> given) {
  detail::check_conditioning_indices(gamma.rows(), target, given);
  std::vector<Index> g(given.begin(), given.end());
  const double den = gamma(g, g).partialPivLu().determinant();
  g.insert(g.begin(), target);
  const double num = gamma(g, g).partialPivLu().determinant();
  if (den == 0.0 || !std::isfinite(den)) throw error(errc::conditioning, "conditioning block is singular");
  return num / den;
}

/// Conditional variance when gamma = F F^T is known through its factor F (rows
/// indexed by quadrature): the squared distance from row `target` to the span of
/// the `given` rows. Avoids squaring the condition number of F.
inline double conditional_variance_factored(const Matrix& factor, Index target, std::span<const Index> given,
                                            const Tolerances& tol = default_tolerances) {
  detail::check_conditioning_indices(factor.rows(), target, given);
  const std::vector<Index> g(given.begin(), given.end());
  const Matrix basis = factor(g, Eigen::all).transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  qr.setThreshold(tol.singular_pivot);
  const Index k = static_cast<Index>(g.size());
  if (qr.rank() < k) throw error(errc::conditioning, "conditioning rows are linearly dependent");
  const Vector coords = qr.householderQ().adjoint() * factor.row(target).transpose();
  return coords.tail(coords.size() - k).squaredNorm();
}

/// Sum of all principal minors of the given order.
inline double principal_minor_sum(const Matrix& m, Index order) {
  const Index n = m.rows();
  if (order < 1 || order > n) throw error(errc::dimension, "minor order out of range");
  std::vector<Index> idx(static_cast<std::size_t>(order));
  for (Index i = 0; i < order; ++i) idx[static_cast<std::size_t>(i)] = i;
  double total = 0.0;
  while (true) {
    total += m(idx, idx).partialPivLu().determinant();
    Index pos = order - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - order + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < order; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return total;
}

struct InvariantTriple {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

/// Three-mode symplectic invariants: Delta_j is the sum of the 2j x 2j principal
/// minors of beta gamma, i.e. the j-th elementary symmetric polynomial of the
/// squared symplectic eigenvalues.
inline InvariantTriple symplectic_invariants(const Matrix& gamma) {
  if (gamma.rows() != 6 || gamma.cols() != 6) {
    throw error(errc::unsupported_dimension, "symplectic invariants are implemented for three modes only");
  }
  const Matrix m = symplectic_form(3) * gamma;
  return {principal_minor_sum(m, 2), principal_minor_sum(m, 4), principal_minor_sum(m, 6)};
}

inline InvariantTriple symplectic_invariants(const CovarianceMatrix& gamma) {
  return symplectic_invariants(gamma.entries());
}

/// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian
/// matrix, with the sign of each column fixed by diag(R).
template <class Generator>
Matrix random_orthogonal(Index n, Generator& gen) {
  if (n < 1) throw error(errc::parameter, "orthogonal matrix dimension must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = normal(gen);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

inline Matrix random_orthogonal(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return random_orthogonal(n, gen);
}

}  // namespace cvqkd
