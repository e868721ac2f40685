#pragma once

// Alice's complete projective measurements on C^d (x) C^m: Weyl operators,
// the generalized Bell basis, block-structured bases and basis validation.

#include <numbers>
#include <string>
#include <vector>

#include "qtele/states.hpp"

namespace qtele {

struct MeasurementBasis {
  std::size_t d = 0;  // input dimension
  std::size_t m = 0;  // Alice's share of the resource
  std::vector<BipartitePure> states;

  [[nodiscard]] Dims dims() const { return {d, m}; }
  [[nodiscard]] std::size_t size() const { return states.size(); }
};

/// Shift h|j> = |j+1 mod d>.
inline ComplexMatrix shift_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) h((j + 1) % n, j) = 1.0;
  return h;
}

/// Clock g|j> = w^j |j>, w = exp(-2 pi i / d).
inline ComplexMatrix clock_operator(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix g = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    g(j, j) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(d));
  return g;
}

/// U_st = h^t g^s with 1 <= s, t <= d.
inline ComplexMatrix weyl_operator(std::size_t s, std::size_t t, std::size_t d) {
  if (d == 0 || s < 1 || s > d || t < 1 || t > d)
    throw DimensionError("weyl_operator: indices must satisfy 1 <= s, t <= d (got s=" + std::to_string(s) +
                         ", t=" + std::to_string(t) + ", d=" + std::to_string(d) + ")");
  const auto n = static_cast<Eigen::Index>(d);
  // h^t g^s |j> = w^{s j} |j + t mod d>
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto phase = static_cast<double>((static_cast<std::size_t>(j) * s) % d);
    u((j + static_cast<Eigen::Index>(t)) % n, j) =
        std::polar(1.0, -2.0 * std::numbers::pi * phase / static_cast<double>(d));
  }
  return u;
}

namespace detail {

/// Coefficient matrix (d x g) of the (s, t) maximally entangled state on
/// C^d (x) C^g: entry (j, j+t mod g) = w^{-s j} / sqrt(d). For g = d this is
/// U_st^dag / sqrt(d), the state (U_st^dag (x) I) sum_j |jj> / sqrt(d).
inline ComplexMatrix shifted_block_coefficients(std::size_t s, std::size_t t, std::size_t d, std::size_t g) {
  ComplexMatrix c = ComplexMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(g));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const auto phase = static_cast<double>((j * s) % d);
    c(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>((j + t) % g)) =
        std::polar(scale, 2.0 * std::numbers::pi * phase / static_cast<double>(d));
  }
  return c;
}

inline double frame_orthonormality_error(const ComplexMatrix& frame) {
  return (frame.adjoint() * frame - ComplexMatrix::Identity(frame.cols(), frame.cols())).norm();
}

}  // namespace detail

/// Maximally entangled basis of C^d (x) span(frame) followed by product
/// completion states on the orthogonal remainder of C^m.
///
/// Each frame is an m x g matrix with orthonormal columns, g >= d. A frame
/// of width g contributes d*g states ordered (s, t) lexicographically with
/// s = 1..d, t = 1..g; for g = d they are the generalized Bell states.
/// Completion states |i>|r_k> use the lexicographic Gram-Schmidt complement.
inline MeasurementBasis block_basis(std::size_t d, const std::vector<ComplexMatrix>& frames, std::size_t m) {
  if (d == 0) throw DimensionError("block_basis: d must be positive");
  std::size_t used = 0;
  for (const auto& f : frames) {
    if (static_cast<std::size_t>(f.rows()) != m)
      throw DimensionError("block_basis: frame has " + std::to_string(f.rows()) + " rows, expected m=" +
                           std::to_string(m));
    if (static_cast<std::size_t>(f.cols()) < d) throw DimensionError("block_basis: block narrower than d");
    if (detail::frame_orthonormality_error(f) > 1e-8)
      throw InvariantError("block_basis: block frame is not orthonormal");
    used += static_cast<std::size_t>(f.cols());
  }
  if (used > m) throw DimensionError("block_basis: blocks need " + std::to_string(used) + " > m=" + std::to_string(m));
  ComplexMatrix all(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(used));
  {
    Eigen::Index c = 0;
    for (const auto& f : frames) {
      all.middleCols(c, f.cols()) = f;
      c += f.cols();
    }
  }
  if (detail::frame_orthonormality_error(all) > 1e-8) throw InvariantError("block_basis: blocks are not mutually orthogonal");

  MeasurementBasis basis{d, m, {}};
  basis.states.reserve(d * m);
  for (const auto& f : frames) {
    const auto g = static_cast<std::size_t>(f.cols());
    for (std::size_t s = 1; s <= d; ++s)
      for (std::size_t t = 1; t <= g; ++t) {
        const ComplexMatrix local = detail::shifted_block_coefficients(s, t, d, g);
        // sum_{j,b} local(j,b) |j> (x) F|b>  has coefficient matrix local * F^T.
        basis.states.push_back(BipartitePure::from_coefficients(local * f.transpose()));
      }
  }
  const ComplexMatrix rest = orthonormal_complement(all, m);
  for (std::size_t i = 0; i < d; ++i)
    for (Eigen::Index r = 0; r < rest.cols(); ++r)
      basis.states.push_back(product_state(basis_vector(d, i), rest.col(r)));
  return basis;
}

/// The d^2 states (U_st^dag (x) I)|Phi_d>, (s, t) lexicographic.
inline MeasurementBasis bell_basis(std::size_t d) {
  if (d < 1) throw DimensionError("bell_basis: d must be positive");
  return block_basis(d, {identity(d)}, d);
}

/// Computational product basis |i>|j> on C^d (x) C^m.
inline MeasurementBasis computational_basis(std::size_t d, std::size_t m) {
  MeasurementBasis basis{d, m, {}};
  for (std::size_t i = 0; i < d * m; ++i) basis.states.emplace_back(Dims{d, m}, basis_vector(d * m, i));
  return basis;
}

struct BasisValidation {
  bool orthonormal = false;
  bool complete = false;
  std::vector<bool> max_ent_flags;

  [[nodiscard]] bool all_max_ent() const {
    return std::all_of(max_ent_flags.begin(), max_ent_flags.end(), [](bool b) { return b; });
  }
};

inline BasisValidation validate_basis(const MeasurementBasis& b, double tol = kStructuralTol) {
  BasisValidation report;
  const auto count = static_cast<Eigen::Index>(b.states.size());
  const auto dim = static_cast<Eigen::Index>(b.d * b.m);
  ComplexMatrix stacked(dim, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    if (!(b.states[static_cast<std::size_t>(k)].dims() == b.dims()))
      throw DimensionError("validate_basis: state " + std::to_string(k) + " has wrong dimensions");
    stacked.col(k) = b.states[static_cast<std::size_t>(k)].amplitudes();
  }
  report.orthonormal = (stacked.adjoint() * stacked - ComplexMatrix::Identity(count, count)).norm() <= tol;
  report.complete = (stacked * stacked.adjoint() - ComplexMatrix::Identity(dim, dim)).norm() <= tol;
  report.max_ent_flags.reserve(b.states.size());
  const bool can_hold = b.m >= b.d;
  for (const auto& s : b.states) report.max_ent_flags.push_back(can_hold && is_maximally_entangled(s, b.d, tol));
  return report;
}

}  // namespace qtele
