#pragma once

// Dense complex linear algebra used by every other part of the library.
//
// Index convention: for a composite space C^m (x) C^n the basis vector |i>|j>
// sits at row i*n + j. A pure state sum a_ij |ij> has coefficient matrix A
// with A(i, j) = a_ij.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qtele {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = std::vector<double>;

/// Default tolerance for structural predicates (unitarity, orthonormality).
inline constexpr double kStructuralTol = 1e-9;
/// Default tolerance for decomposition residuals.
inline constexpr double kResidualTol = 1e-10;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Side { A, B };

struct Dims {
  std::size_t m = 1;
  std::size_t n = 1;

  [[nodiscard]] std::size_t total() const { return m * n; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct SpectralDecomposition {
  RealVector eigenvalues;      // descending
  ComplexMatrix eigenvectors;  // column k belongs to eigenvalues[k]
};

/// M = left * diag(singulars) * right, with left and right unitary.
struct SingularDecomposition {
  ComplexMatrix left;
  RealVector singulars;  // descending, length min(rows, cols)
  ComplexMatrix right;
};

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

inline ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

inline ComplexVector basis_vector(std::size_t dim, std::size_t index) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

inline ComplexMatrix outer(const ComplexVector& a, const ComplexVector& b) { return a * b.adjoint(); }

/// Kronecker product; (a (x) b)(i*rows(b)+k, j*cols(b)+l) = a(i,j) b(k,l).
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Traces out the factor named by `side` of an operator on C^m (x) C^n.
inline ComplexMatrix partial_trace(const ComplexMatrix& op, Dims dims, Side side) {
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  if (op.rows() != m * n || op.cols() != m * n)
    throw DimensionError("partial_trace: operator is " + std::to_string(op.rows()) + "x" +
                         std::to_string(op.cols()) + ", expected square of size " +
                         std::to_string(m * n));
  if (side == Side::B) {
    ComplexMatrix out = ComplexMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index j = 0; j < n; ++j) out(i, k) += op(i * n + j, k * n + j);
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index i = 0; i < m; ++i) out(j, l) += op(i * n + j, i * n + l);
  return out;
}

namespace detail {

/// Phase that makes the first entry with modulus above `floor` real positive.
inline Complex canonical_phase(const ComplexVector& v, double floor = 1e-12) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > floor) return std::conj(v(i)) / mag;
  }
  return 1.0;
}

}  // namespace detail

/// Full singular value decomposition with descending singular values. Each
/// left singular vector is phase-fixed so its first nonzero entry is real
/// positive; the matching right vector absorbs the conjugate phase.
inline SingularDecomposition svd(const ComplexMatrix& m) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ComplexMatrix u = solver.matrixU();
  ComplexMatrix v = solver.matrixV();
  const auto& s = solver.singularValues();
  const Eigen::Index r = std::min(rows, cols);
  for (Eigen::Index k = 0; k < r; ++k) {
    const Complex phase = detail::canonical_phase(u.col(k));
    u.col(k) *= phase;
    v.col(k) *= phase;
  }
  SingularDecomposition out;
  out.left = std::move(u);
  out.right = v.adjoint();
  out.singulars.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index k = 0; k < r; ++k) out.singulars.push_back(s(k));
  return out;
}

/// Rectangular diag(singulars) of shape rows x cols.
inline ComplexMatrix singular_matrix(const SingularDecomposition& sd, Eigen::Index rows,
                                     Eigen::Index cols) {
  ComplexMatrix d = ComplexMatrix::Zero(rows, cols);
  for (std::size_t k = 0; k < sd.singulars.size(); ++k)
    d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = sd.singulars[k];
  return d;
}

inline double hermiticity_error(const ComplexMatrix& m) { return (m - m.adjoint()).norm(); }

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending. The input
/// is symmetrized before decomposition; eigenvectors are phase-fixed so their
/// first nonzero entry is real positive.
inline SpectralDecomposition eig_hermitian(const ComplexMatrix& m, double tol = kResidualTol) {
  if (m.rows() != m.cols()) throw DimensionError("eig_hermitian: matrix is not square");
  const double herr = hermiticity_error(m);
  if (herr > tol * std::max(1.0, m.norm()))
    throw InvariantError("eig_hermitian: matrix is not Hermitian (||M - M^dag||_F = " +
                         std::to_string(herr) + ")");
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  const Eigen::Index dim = m.rows();
  SpectralDecomposition out;
  out.eigenvalues.resize(static_cast<std::size_t>(dim));
  out.eigenvectors.resize(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Eigen::Index src = dim - 1 - k;
    out.eigenvalues[static_cast<std::size_t>(k)] = solver.eigenvalues()(src);
    ComplexVector v = solver.eigenvectors().col(src);
    v *= detail::canonical_phase(v);
    out.eigenvectors.col(k) = v;
  }
  return out;
}

/// Returns c with ||M^dag M - c^2 I||_F <= tol, where c^2 = tr(M^dag M)/dim.
inline std::optional<double> is_unitary_up_to_scale(const ComplexMatrix& m, double tol = kStructuralTol) {
  if (m.rows() != m.cols()) throw DimensionError("is_unitary_up_to_scale: matrix is not square");
  const ComplexMatrix gram = m.adjoint() * m;
  const double c2 = gram.trace().real() / static_cast<double>(m.cols());
  const double residual = (gram - c2 * ComplexMatrix::Identity(m.cols(), m.cols())).norm();
  if (residual > tol) return std::nullopt;
  return std::sqrt(std::max(c2, 0.0));
}

/// Same test for a tall matrix whose columns should be orthogonal with a
/// common length (a scaled isometry).
inline std::optional<double> isometry_scale(const ComplexMatrix& m, double tol = kStructuralTol) {
  if (m.rows() < m.cols()) return std::nullopt;
  const ComplexMatrix gram = m.adjoint() * m;
  const double c2 = gram.trace().real() / static_cast<double>(m.cols());
  const double residual = (gram - c2 * ComplexMatrix::Identity(m.cols(), m.cols())).norm();
  if (residual > tol) return std::nullopt;
  return std::sqrt(std::max(c2, 0.0));
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kStructuralTol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())).norm() <= tol;
}

/// Unitary factor U of the polar decomposition M = U P.
inline ComplexMatrix polar_unitary(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("polar_unitary: matrix is not square");
  const SingularDecomposition sd = svd(m);
  const double largest = sd.singulars.empty() ? 0.0 : sd.singulars.front();
  if (sd.singulars.empty() || sd.singulars.back() <= 1e-12 * std::max(1.0, largest))
    throw InvariantError("polar_unitary: matrix is rank deficient");
  return sd.left * sd.right;
}

/// Isometry W (rows x cols) closest to a tall matrix: the polar factor built
/// from its top-`cols` singular subspace. Rank deficiency is tolerated; the
/// missing directions come from the SVD completion.
inline ComplexMatrix closest_isometry(const ComplexMatrix& m) {
  const SingularDecomposition sd = svd(m);
  const Eigen::Index k = m.cols();
  return sd.left.leftCols(k) * sd.right.topRows(k);
}

/// Orthonormal basis (as columns) of the complement of the column span of
/// `frame` in C^dim. Built by Gram-Schmidt over |0>, |1>, ... in order, so
/// the result is deterministic.
inline ComplexMatrix orthonormal_complement(const ComplexMatrix& frame, std::size_t dim) {
  const auto full = static_cast<Eigen::Index>(dim);
  const Eigen::Index have = frame.cols();
  if (frame.cols() > 0 && frame.rows() != full)
    throw DimensionError("orthonormal_complement: frame has wrong row count");
  const Eigen::Index need = full - have;
  ComplexMatrix basis(full, have + std::max<Eigen::Index>(need, 0));
  if (have > 0) basis.leftCols(have) = frame;
  Eigen::Index count = have;
  for (Eigen::Index e = 0; e < full && count < full; ++e) {
    ComplexVector v = ComplexVector::Zero(full);
    v(e) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < count; ++c) v -= basis.col(c) * basis.col(c).dot(v);
    const double norm = v.norm();
    if (norm > 1e-8) basis.col(count++) = v / norm;
  }
  if (count != full) throw InvariantError("orthonormal_complement: frame is not orthonormal");
  return basis.rightCols(need);
}

/// Orthonormal basis of range(frame) obtained by Gram-Schmidt on the columns
/// of the projector F F^dag, in index order. Depends only on the span.
inline ComplexMatrix canonical_frame(const ComplexMatrix& frame) {
  const ComplexMatrix p = frame * frame.adjoint();
  ComplexMatrix out(frame.rows(), frame.cols());
  Eigen::Index count = 0;
  for (Eigen::Index e = 0; e < p.cols() && count < frame.cols(); ++e) {
    ComplexVector v = p.col(e);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < count; ++c) v -= out.col(c) * out.col(c).dot(v);
    const double norm = v.norm();
    if (norm > 1e-6) out.col(count++) = v / norm;
  }
  if (count != frame.cols()) throw InvariantError("canonical_frame: frame is not orthonormal");
  return out;
}

/// Unitary on C^dim whose first rows are the conjugate-transposed columns of
/// the isometry W and whose remaining rows span the complement. It maps the
/// range of W onto the first cols(W) computational directions.
inline ComplexMatrix complete_to_unitary(const ComplexMatrix& isometry) {
  const auto dim = static_cast<std::size_t>(isometry.rows());
  const ComplexMatrix rest = orthonormal_complement(isometry, dim);
  ComplexMatrix u(isometry.rows(), isometry.rows());
  u.topRows(isometry.cols()) = isometry.adjoint();
  u.bottomRows(rest.cols()) = rest.adjoint();
  return u;
}

/// Smallest ||a - e^{i theta} b||_F over theta.
inline double distance_up_to_phase(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).norm();
}

/// Groups descending values into clusters whose members lie within `tol` of
/// the cluster's first element. Returns [begin, end) index ranges.
inline std::vector<std::pair<std::size_t, std::size_t>> cluster_descending(const RealVector& values,
                                                                           double tol) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= values.size(); ++i) {
    if (i == values.size() || std::abs(values[i] - values[begin]) > tol) {
      if (begin < values.size()) groups.emplace_back(begin, i);
      begin = i;
    }
  }
  return groups;
}

}  // namespace qtele
