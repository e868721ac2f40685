#pragma once

// Detection of mixed maximally entangled structure on C^m (x) C^d:
//   rho = sum_x p_x |psi_x><psi_x|,  |psi_x> maximally entangled on H_x (x) C^d,
// with the d-dimensional Alice subspaces H_x mutually orthogonal.

#include <optional>
#include <string>
#include <vector>

#include "qtele/states.hpp"

namespace qtele {

/// Tolerance used when clustering spectra and testing block structure.
inline constexpr double kClusterTol = 1e-8;

struct BlockStructure {
  std::vector<double> weights;               // p_x, sum to one
  std::vector<ComplexMatrix> alice_frames;   // m x d, orthonormal columns spanning H_x
  std::vector<BipartitePure> block_states;   // |psi_x> on C^m (x) C^d

  [[nodiscard]] std::size_t k() const { return weights.size(); }

  [[nodiscard]] ComplexMatrix reconstruct() const {
    ComplexMatrix rho = ComplexMatrix::Zero(block_states.front().amplitudes().size(), block_states.front().amplitudes().size());
    for (std::size_t x = 0; x < k(); ++x) rho += weights[x] * block_states[x].projector();
    return rho;
  }
};

struct StructureDiagnosis {
  std::optional<BlockStructure> structure;
  std::string failure;  // empty on success
};

/// Full decision with the name of the first failed condition.
///
/// Screens: Bob's marginal is I/d; the eigenspaces of Alice's marginal have
/// dimensions divisible by d; rho does not couple different eigenspaces of
/// Alice's marginal. Decision: with B_i the coefficient matrices of an
/// orthonormal eigenbasis of rho's support, a structure exists iff
/// B_i'^dag B_i = delta_ii' I/d. The condition is invariant under unitary
/// mixing inside degenerate eigenspaces, so any eigenbasis decides it; the
/// frames are then H_x = range(B_x) with frame sqrt(d) B_x.
inline StructureDiagnosis diagnose_mixed_max_ent(const BipartiteMixed& resource, std::size_t d) {
  const Dims dims = resource.dims();
  if (dims.n != d) throw DimensionError("decide_mixed_max_ent: Bob's dimension must equal d");
  if (dims.m < d) throw DimensionError("decide_mixed_max_ent: need m >= d");
  const auto dd = static_cast<double>(d);
  const ComplexMatrix& rho = resource.density();

  const ComplexMatrix bob = partial_trace(rho, dims, Side::A);
  if ((bob - identity(d) / dd).norm() > kClusterTol) return {std::nullopt, "Bob's reduced state is not maximally mixed"};

  const ComplexMatrix alice = partial_trace(rho, dims, Side::B);
  const SpectralDecomposition alice_spec = eig_hermitian(alice);
  std::vector<ComplexMatrix> alice_projectors;
  for (const auto& [begin, end] : cluster_descending(alice_spec.eigenvalues, kClusterTol)) {
    if (alice_spec.eigenvalues[begin] <= kSupportFloor) continue;
    if ((end - begin) % d != 0)
      return {std::nullopt, "an eigenspace of Alice's reduced state has dimension " + std::to_string(end - begin) +
                                ", not a multiple of d"};
    const ComplexMatrix frame =
        alice_spec.eigenvectors.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    alice_projectors.push_back(frame * frame.adjoint());
  }
  for (std::size_t a = 0; a < alice_projectors.size(); ++a)
    for (std::size_t b = a + 1; b < alice_projectors.size(); ++b) {
      const ComplexMatrix pa = tensor_product(alice_projectors[a], identity(d));
      const ComplexMatrix pb = tensor_product(alice_projectors[b], identity(d));
      if ((pa * rho * pb).norm() > kClusterTol)
        return {std::nullopt, "state couples different eigenspaces of Alice's reduced state"};
    }

  const std::vector<EigenState> eig = support_eigenstates(resource, kClusterTol);
  if (eig.size() * d > dims.m)
    return {std::nullopt, "rank " + std::to_string(eig.size()) + " needs m >= " + std::to_string(eig.size() * d)};
  std::vector<ComplexMatrix> coeffs;
  coeffs.reserve(eig.size());
  for (const auto& e : eig) coeffs.push_back(coefficient_matrix(e.state));
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      ComplexMatrix gram = coeffs[j].adjoint() * coeffs[i];
      if (i == j) gram -= identity(d) / dd;
      if (gram.norm() > kClusterTol)
        return {std::nullopt, i == j ? "eigenstate " + std::to_string(i) + " is not maximally entangled with Bob's full space"
                                     : "eigenstates " + std::to_string(j) + " and " + std::to_string(i) +
                                           " overlap on Alice's side"};
    }

  BlockStructure s;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    s.weights.push_back(eig[i].weight);
    s.alice_frames.push_back(std::sqrt(dd) * coeffs[i]);
    s.block_states.push_back(eig[i].state);
  }
  double total = 0.0;
  for (double w : s.weights) total += w;
  for (double& w : s.weights) w /= total;
  if ((s.reconstruct() - rho).norm() > kClusterTol) return {std::nullopt, "block reconstruction does not reproduce the state"};
  return {std::move(s), {}};
}

inline std::optional<BlockStructure> decide_mixed_max_ent(const BipartiteMixed& resource, std::size_t d) {
  return diagnose_mixed_max_ent(resource, d).structure;
}

}  // namespace qtele
