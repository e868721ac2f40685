#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtele/demos.hpp"

using namespace qtele;

TEST(States, PureRejectsBadInput) {
  EXPECT_THROW(BipartitePure({2, 2}, ComplexVector::Ones(4)), InvariantError);
  EXPECT_THROW(BipartitePure({2, 2}, ComplexVector::Ones(3) / std::sqrt(3.0)), DimensionError);
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(BipartitePure({2, 2}, v), InvariantError);
}

TEST(States, CoefficientMatrixFollowsIndexConvention) {
  const BipartitePure s = BipartitePure::normalized({2, 3}, tensor_product(basis_vector(2, 1), basis_vector(3, 2)));
  const ComplexMatrix a = coefficient_matrix(s);
  EXPECT_EQ(a(1, 2), Complex(1.0));
  EXPECT_NEAR(a.norm(), 1.0, 1e-15);
  EXPECT_LT((BipartitePure::from_coefficients(a).amplitudes() - s.amplitudes()).norm(), 1e-15);
}

TEST(States, SchmidtMatchesEigenvalueOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BipartitePure s = random_pure({3, 4}, seed);
    const SchmidtDecomposition sch = schmidt(s);
    const auto expected = oracle::schmidt_coefficients(s.amplitudes(), 3, 4);
    ASSERT_EQ(sch.coefficients.size(), 3u);
    double total = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(sch.coefficients[k], expected[k], 1e-12);
      total += sch.coefficients[k] * sch.coefficients[k];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    // Reconstruct |psi> = sum_k s_k |u_k>|v_k>.
    ComplexVector rebuilt = ComplexVector::Zero(12);
    for (Eigen::Index k = 0; k < 3; ++k)
      rebuilt += sch.coefficients[static_cast<std::size_t>(k)] *
                 tensor_product(ComplexVector(sch.alice_vectors.col(k)), ComplexVector(sch.bob_vectors.col(k)));
    EXPECT_LT((rebuilt - s.amplitudes()).norm(), 1e-12);
  }
}

TEST(States, MaximalEntanglement) {
  EXPECT_TRUE(is_maximally_entangled(demos::phi_plus(), 2));
  for (std::size_t d = 2; d <= 4; ++d) EXPECT_TRUE(is_maximally_entangled(random_max_ent(d, d + 1, d + 2, d), d));
  EXPECT_FALSE(is_maximally_entangled(random_pure({3, 3}, 1), 3));
  EXPECT_FALSE(is_maximally_entangled(demos::standard_max_ent(2, 3, 3), 3));
  EXPECT_THROW(is_maximally_entangled(demos::phi_plus(), 3), DimensionError);
}

TEST(States, MixedRejectsInvalidDensity) {
  EXPECT_THROW(BipartiteMixed({2, 1}, 2.0 * identity(2) / 2.0), InvariantError);  // trace 2
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(BipartiteMixed({2, 1}, neg), InvariantError);
  ComplexMatrix nh = identity(2) / 2.0;
  nh(0, 1) = 0.3;
  EXPECT_THROW(BipartiteMixed({2, 1}, nh), InvariantError);
  EXPECT_THROW(BipartiteMixed({2, 2}, identity(2) / 2.0), DimensionError);
}

TEST(States, EnsembleNormalizesWeights) {
  const BipartiteMixed rho = BipartiteMixed::from_ensemble({2.0, 2.0}, {demos::phi_plus(), random_pure({2, 2}, 3)});
  EXPECT_NEAR(rho.density().trace().real(), 1.0, 1e-14);
}

TEST(States, SwapFactors) {
  const BipartiteMixed rho = random_mixed({2, 3}, 2, 11);
  const BipartiteMixed swapped = swap_factors(rho);
  EXPECT_EQ(swapped.dims(), (Dims{3, 2}));
  EXPECT_LT((swap_factors(swapped).density() - rho.density()).norm(), 1e-14);
  EXPECT_LT((partial_trace(swapped.density(), {3, 2}, Side::A) - partial_trace(rho.density(), {2, 3}, Side::B)).norm(), 1e-14);
  const BipartitePure s = random_pure({2, 3}, 12);
  EXPECT_LT((coefficient_matrix(swap_factors(s)) - coefficient_matrix(s).transpose()).norm(), 1e-15);
}

TEST(States, LocalUnitariesPreserveSchmidtSpectrum) {
  const BipartitePure s = random_pure({3, 3}, 4);
  const BipartitePure t = apply_local_unitaries(s, random_unitary(3, 5), random_unitary(3, 6));
  const auto a = schmidt(s).coefficients;
  const auto b = schmidt(t).coefficients;
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
}

TEST(States, RandomGeneratorsAreSeeded) {
  EXPECT_EQ(random_pure({2, 3}, 42).amplitudes(), random_pure({2, 3}, 42).amplitudes());
  EXPECT_NE(random_pure({2, 3}, 42).amplitudes(), random_pure({2, 3}, 43).amplitudes());
  EXPECT_EQ(random_mixed({2, 2}, 2, 7).density(), random_mixed({2, 2}, 2, 7).density());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_TRUE(is_unitary(random_unitary(5, 3), 1e-12));
}

TEST(States, RandomMixedMaxEntHasFlatBobMarginal) {
  for (std::size_t d = 2; d <= 3; ++d)
    for (std::size_t k = 1; k <= 3; ++k) {
      const BipartiteMixed rho = random_mixed_max_ent(d, k, k * d + 1, 100 * d + k);
      EXPECT_EQ(rho.dims(), (Dims{k * d + 1, d}));
      EXPECT_EQ(support_rank(rho), k);
      const ComplexMatrix bob = oracle::partial_trace(rho.density(), static_cast<int>(k * d + 1), static_cast<int>(d), false);
      EXPECT_LT((bob - identity(d) / static_cast<double>(d)).norm(), 1e-12);
    }
}

TEST(States, RandomMixedRank) {
  EXPECT_EQ(support_rank(random_mixed({3, 3}, 4, 1)), 4u);
}

TEST(States, SupportEigenstatesReconstruct) {
  const BipartiteMixed rho = random_mixed({2, 3}, 3, 8);
  const auto eig = support_eigenstates(rho);
  ASSERT_EQ(eig.size(), 3u);
  ComplexMatrix sum = ComplexMatrix::Zero(6, 6);
  double w = 0.0;
  for (const auto& e : eig) {
    sum += e.weight * e.state.projector();
    w += e.weight;
  }
  EXPECT_NEAR(w, 1.0, 1e-12);
  EXPECT_LT((sum - rho.density()).norm(), 1e-12);
}

TEST(States, DegenerateEigenstatesAreCanonical) {
  // rho0 has a doubly degenerate spectrum; the eigenstates come out as the two block states.
  const auto eig = support_eigenstates(demos::rho0());
  ASSERT_EQ(eig.size(), 2u);
  for (const auto& e : eig) {
    EXPECT_NEAR(e.weight, 0.5, 1e-12);
    EXPECT_TRUE(is_maximally_entangled(e.state, 2));
    const ComplexMatrix alice = partial_trace(e.state.projector(), e.state.dims(), Side::B);
    const bool low = std::abs(alice(0, 0).real() - 0.5) < 1e-12 && std::abs(alice(1, 1).real() - 0.5) < 1e-12;
    const bool high = std::abs(alice(2, 2).real() - 0.5) < 1e-12 && std::abs(alice(3, 3).real() - 0.5) < 1e-12;
    EXPECT_TRUE(low || high);
  }
}

TEST(States, FidelityPure) {
  const InputState a(basis_vector(2, 0));
  EXPECT_NEAR(fidelity_pure(a, a), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_pure(a, ComplexVector(basis_vector(2, 1))), 0.0, 1e-15);
  EXPECT_THROW(fidelity_pure(a, ComplexVector(basis_vector(3, 0))), DimensionError);
}
