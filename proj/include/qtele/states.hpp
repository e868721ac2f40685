#pragma once

// Bipartite pure and mixed states with explicit factor dimensions, Schmidt
// analysis, fidelity and seeded random-state generation.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qtele/tensor.hpp"

namespace qtele {

/// Schmidt coefficients at or below this are treated as zero.
inline constexpr double kSchmidtFloor = 1e-8;
/// Eigenvalues of a density matrix at or below this are outside its support.
inline constexpr double kSupportFloor = 1e-10;

class BipartitePure {
 public:
  BipartitePure(Dims dims, ComplexVector amplitudes) : dims_(dims), amplitudes_(std::move(amplitudes)) {
    if (dims_.m == 0 || dims_.n == 0) throw DimensionError("BipartitePure: factor dimensions must be positive");
    if (static_cast<std::size_t>(amplitudes_.size()) != dims_.total())
      throw DimensionError("BipartitePure: amplitude count " + std::to_string(amplitudes_.size()) +
                           " does not match " + std::to_string(dims_.m) + "x" + std::to_string(dims_.n));
    if (!all_finite(amplitudes_)) throw InvariantError("BipartitePure: non-finite amplitude");
    if (std::abs(amplitudes_.norm() - 1.0) > kResidualTol)
      throw InvariantError("BipartitePure: state is not normalized (norm " +
                           std::to_string(amplitudes_.norm()) + ")");
  }

  /// Normalizes before validation. Throws on the zero vector.
  static BipartitePure normalized(Dims dims, ComplexVector amplitudes) {
    const double norm = amplitudes.norm();
    if (norm <= 0.0 || !std::isfinite(norm)) throw InvariantError("BipartitePure: zero or non-finite vector");
    return {dims, amplitudes / norm};
  }

  /// Builds the state sum_ij A(i,j) |ij> from its m x n coefficient matrix.
  static BipartitePure from_coefficients(const ComplexMatrix& a) {
    const Dims dims{static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols())};
    ComplexVector v(a.size());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) v(i * a.cols() + j) = a(i, j);
    return {dims, std::move(v)};
  }

  [[nodiscard]] Dims dims() const { return dims_; }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] ComplexMatrix projector() const { return outer(amplitudes_, amplitudes_); }

 private:
  Dims dims_;
  ComplexVector amplitudes_;
};

class BipartiteMixed {
 public:
  BipartiteMixed(Dims dims, ComplexMatrix density) : dims_(dims), density_(std::move(density)) {
    const auto total = static_cast<Eigen::Index>(dims_.total());
    if (dims_.m == 0 || dims_.n == 0) throw DimensionError("BipartiteMixed: factor dimensions must be positive");
    if (density_.rows() != total || density_.cols() != total)
      throw DimensionError("BipartiteMixed: density is " + std::to_string(density_.rows()) + "x" +
                           std::to_string(density_.cols()) + ", expected " + std::to_string(total));
    if (!all_finite(density_)) throw InvariantError("BipartiteMixed: non-finite entry");
    if (hermiticity_error(density_) > kResidualTol) throw InvariantError("BipartiteMixed: density is not Hermitian");
    density_ = 0.5 * (density_ + density_.adjoint()).eval();
    const double tr = density_.trace().real();
    if (std::abs(tr - 1.0) > kResidualTol)
      throw InvariantError("BipartiteMixed: trace is " + std::to_string(tr) + ", expected 1");
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(density_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues()(0) < -kResidualTol)
      throw InvariantError("BipartiteMixed: density has negative eigenvalue " +
                           std::to_string(solver.eigenvalues()(0)));
  }

  explicit BipartiteMixed(const BipartitePure& pure) : BipartiteMixed(pure.dims(), pure.projector()) {}

  /// sum_i w_i |psi_i><psi_i| with weights normalized to sum to one.
  static BipartiteMixed from_ensemble(const std::vector<double>& weights, const std::vector<BipartitePure>& states) {
    if (weights.size() != states.size() || states.empty())
      throw DimensionError("BipartiteMixed::from_ensemble: weights and states differ in length");
    const Dims dims = states.front().dims();
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InvariantError("BipartiteMixed::from_ensemble: negative weight");
      total += w;
    }
    const auto size = static_cast<Eigen::Index>(dims.total());
    ComplexMatrix rho = ComplexMatrix::Zero(size, size);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!(states[i].dims() == dims)) throw DimensionError("BipartiteMixed::from_ensemble: mixed dimensions");
      rho += (weights[i] / total) * states[i].projector();
    }
    return {dims, rho};
  }

  [[nodiscard]] Dims dims() const { return dims_; }
  [[nodiscard]] const ComplexMatrix& density() const { return density_; }

 private:
  Dims dims_;
  ComplexMatrix density_;
};

/// The unknown state to be teleported.
class InputState {
 public:
  explicit InputState(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() == 0) throw DimensionError("InputState: empty amplitude vector");
    if (!all_finite(amplitudes_)) throw InvariantError("InputState: non-finite amplitude");
    if (std::abs(amplitudes_.norm() - 1.0) > kResidualTol) throw InvariantError("InputState: state is not normalized");
  }

  [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(amplitudes_.size()); }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }

 private:
  ComplexVector amplitudes_;
};

struct SchmidtDecomposition {
  RealVector coefficients;      // descending, length min(m, n)
  ComplexMatrix alice_vectors;  // m x min(m, n), orthonormal columns
  ComplexMatrix bob_vectors;    // n x min(m, n), orthonormal columns

  [[nodiscard]] std::size_t rank(double floor = kSchmidtFloor) const {
    return static_cast<std::size_t>(
        std::count_if(coefficients.begin(), coefficients.end(), [floor](double c) { return c > floor; }));
  }
};

inline ComplexMatrix coefficient_matrix(const ComplexVector& amplitudes, Dims dims) {
  ComplexMatrix a(static_cast<Eigen::Index>(dims.m), static_cast<Eigen::Index>(dims.n));
  const auto n = static_cast<Eigen::Index>(dims.n);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = amplitudes(i * n + j);
  return a;
}

inline ComplexMatrix coefficient_matrix(const BipartitePure& s) { return coefficient_matrix(s.amplitudes(), s.dims()); }

/// |psi> = sum_k coefficients[k] |alice_k>|bob_k>.
inline SchmidtDecomposition schmidt(const BipartitePure& s) {
  const ComplexMatrix a = coefficient_matrix(s);
  const SingularDecomposition sd = svd(a);
  const Eigen::Index r = std::min(a.rows(), a.cols());
  SchmidtDecomposition out;
  out.coefficients = sd.singulars;
  out.alice_vectors = sd.left.leftCols(r);
  // A = sum_k s_k u_k v_k^dag, so the Bob vector is conj(v_k) = transpose of row k of `right`.
  out.bob_vectors = sd.right.topRows(r).transpose();
  return out;
}

/// True iff exactly d Schmidt coefficients are nonzero and each equals 1/sqrt(d).
inline bool is_maximally_entangled(const BipartitePure& s, std::size_t d, double tol = kStructuralTol) {
  if (d == 0 || std::min(s.dims().m, s.dims().n) < d)
    throw DimensionError("is_maximally_entangled: need min(m, n) >= d");
  const SchmidtDecomposition sch = schmidt(s);
  if (sch.rank() != d) return false;
  const double target = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t k = 0; k < d; ++k)
    if (std::abs(sch.coefficients[k] - target) > tol) return false;
  return true;
}

inline double fidelity_pure(const InputState& a, const ComplexVector& b) {
  if (static_cast<std::size_t>(b.size()) != a.d()) throw DimensionError("fidelity_pure: dimension mismatch");
  return std::clamp(std::norm(a.amplitudes().dot(b)), 0.0, 1.0);
}

inline double fidelity_pure(const InputState& a, const InputState& b) { return fidelity_pure(a, b.amplitudes()); }

/// |phi> (x) I applied to a pure state: exact kron of two pure vectors.
inline BipartitePure product_state(const ComplexVector& alice, const ComplexVector& bob) {
  return BipartitePure::normalized({static_cast<std::size_t>(alice.size()), static_cast<std::size_t>(bob.size())},
                                   tensor_product(alice, bob));
}

/// Exchanges the two factors: C^m (x) C^n -> C^n (x) C^m.
inline ComplexMatrix swap_factors(const ComplexMatrix& op, Dims dims) {
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  ComplexMatrix out(op.rows(), op.cols());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < m; ++k)
        for (Eigen::Index l = 0; l < n; ++l) out(j * m + i, l * m + k) = op(i * n + j, k * n + l);
  return out;
}

inline BipartiteMixed swap_factors(const BipartiteMixed& rho) {
  return {{rho.dims().n, rho.dims().m}, swap_factors(rho.density(), rho.dims())};
}

inline BipartitePure swap_factors(const BipartitePure& s) {
  return BipartitePure::from_coefficients(coefficient_matrix(s).transpose());
}

/// (U (x) V) rho (U (x) V)^dag
inline BipartiteMixed apply_local_unitaries(const BipartiteMixed& rho, const ComplexMatrix& u, const ComplexMatrix& v) {
  const ComplexMatrix uv = tensor_product(u, v);
  return {rho.dims(), uv * rho.density() * uv.adjoint()};
}

inline BipartitePure apply_local_unitaries(const BipartitePure& s, const ComplexMatrix& u, const ComplexMatrix& v) {
  return BipartitePure::normalized(s.dims(), tensor_product(u, v) * s.amplitudes());
}

// ---------------------------------------------------------------------------
// Seeded random generation. Every generator owns its engine; nothing global.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// splitmix64 finalizer; derives independent per-trial seeds from a counter.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline ComplexVector random_unit_vector(std::size_t dim, Rng& rng) {
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

/// Haar unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal folded back into Q.
inline ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

inline ComplexMatrix random_unitary(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary(dim, rng);
}

inline BipartitePure random_pure(Dims dims, Rng& rng) { return {dims, random_unit_vector(dims.total(), rng)}; }

inline BipartitePure random_pure(Dims dims, std::uint64_t seed) {
  Rng rng(seed);
  return random_pure(dims, rng);
}

/// (U1 (x) U2) applied to (1/sqrt d) sum_{i<d} |ii> embedded in C^m (x) C^n.
inline BipartitePure random_max_ent(std::size_t d, std::size_t m, std::size_t n, Rng& rng) {
  if (d == 0 || m < d || n < d) throw DimensionError("random_max_ent: need m, n >= d >= 1");
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < d; ++i)
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(static_cast<double>(d));
  const ComplexMatrix u1 = random_unitary(m, rng);
  const ComplexMatrix u2 = random_unitary(n, rng);
  // (U1 (x) U2) acting on sum a_ij |ij> has coefficient matrix U1 A U2^T.
  return BipartitePure::from_coefficients(u1 * a * u2.transpose());
}

inline BipartitePure random_max_ent(std::size_t d, std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return random_max_ent(d, m, n, rng);
}

inline InputState random_input(std::size_t d, Rng& rng) {
  if (d == 0) throw DimensionError("random_input: d must be positive");
  return InputState(random_unit_vector(d, rng));
}

inline InputState random_input(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_input(d, rng);
}

/// Random mixture of `rank` Haar pure states with uniform-random weights.
inline BipartiteMixed random_mixed(Dims dims, std::size_t rank, Rng& rng) {
  if (rank == 0) throw DimensionError("random_mixed: rank must be positive");
  std::vector<double> weights;
  std::vector<BipartitePure> states;
  for (std::size_t i = 0; i < rank; ++i) {
    weights.push_back(0.1 + rng.uniform());
    states.push_back(random_pure(dims, rng));
  }
  return BipartiteMixed::from_ensemble(weights, states);
}

inline BipartiteMixed random_mixed(Dims dims, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_mixed(dims, rank, rng);
}

/// Random mixed maximally entangled state on C^m (x) C^d: k maximally
/// entangled blocks on mutually orthogonal d-dimensional Alice subspaces,
/// each with its own random Bob unitary, mixed with random weights.
inline BipartiteMixed random_mixed_max_ent(std::size_t d, std::size_t k, std::size_t m, Rng& rng) {
  if (d == 0 || k == 0 || m < k * d) throw DimensionError("random_mixed_max_ent: need m >= k*d");
  const ComplexMatrix alice = random_unitary(m, rng);
  std::vector<double> weights;
  std::vector<BipartitePure> states;
  for (std::size_t x = 0; x < k; ++x) {
    const ComplexMatrix frame = alice.middleCols(static_cast<Eigen::Index>(x * d), static_cast<Eigen::Index>(d));
    const ComplexMatrix bob = random_unitary(d, rng);
    states.push_back(BipartitePure::from_coefficients(frame * bob.transpose() / std::sqrt(static_cast<double>(d))));
    weights.push_back(0.2 + rng.uniform());
  }
  return BipartiteMixed::from_ensemble(weights, states);
}

inline BipartiteMixed random_mixed_max_ent(std::size_t d, std::size_t k, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  return random_mixed_max_ent(d, k, m, rng);
}

// ---------------------------------------------------------------------------

struct EigenState {
  double weight;
  BipartitePure state;
};

/// Spectral decomposition of rho restricted to its support. Inside each
/// degenerate eigenspace the basis is rotated to diagonalize the Alice index
/// operator diag(0, 1, ..., m-1) (x) I, so the returned states are
/// reproducible and favour states that live on few Alice basis vectors.
inline std::vector<EigenState> support_eigenstates(const BipartiteMixed& rho, double degeneracy_tol = 1e-8) {
  const SpectralDecomposition sd = eig_hermitian(rho.density());
  std::size_t count = 0;
  while (count < sd.eigenvalues.size() && sd.eigenvalues[count] > kSupportFloor) ++count;
  const RealVector values(sd.eigenvalues.begin(), sd.eigenvalues.begin() + static_cast<std::ptrdiff_t>(count));
  const Dims dims = rho.dims();
  const auto total = static_cast<Eigen::Index>(dims.total());
  ComplexMatrix position = ComplexMatrix::Zero(total, total);
  for (Eigen::Index r = 0; r < total; ++r) position(r, r) = static_cast<double>(r / static_cast<Eigen::Index>(dims.n));

  std::vector<EigenState> out;
  for (const auto& [begin, end] : cluster_descending(values, degeneracy_tol)) {
    const auto b = static_cast<Eigen::Index>(begin);
    const auto g = static_cast<Eigen::Index>(end - begin);
    ComplexMatrix vectors = sd.eigenvectors.middleCols(b, g);
    if (g > 1) {
      const ComplexMatrix t = vectors.adjoint() * position * vectors;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (t + t.adjoint()));
      vectors = (vectors * solver.eigenvectors()).eval();
    }
    for (Eigen::Index c = 0; c < g; ++c) {
      ComplexVector v = vectors.col(c);
      v *= detail::canonical_phase(v);
      out.push_back({values[begin + static_cast<std::size_t>(c)], BipartitePure::normalized(dims, v)});
    }
  }
  return out;
}

inline std::size_t support_rank(const BipartiteMixed& rho) {
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.density(), Eigen::EigenvaluesOnly);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    if (solver.eigenvalues()(i) > kSupportFloor) ++rank;
  return rank;
}

}  // namespace qtele
