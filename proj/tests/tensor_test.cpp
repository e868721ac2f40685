#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtele/states.hpp"

using namespace qtele;

namespace {

ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.complex_normal();
  return m;
}

}  // namespace

TEST(Tensor, KroneckerMatchesLoopOracle) {
  const ComplexMatrix a = random_matrix(2, 3, 1);
  const ComplexMatrix b = random_matrix(3, 2, 2);
  EXPECT_LT((tensor_product(a, b) - oracle::kron(a, b)).norm(), 1e-14);
}

TEST(Tensor, KroneckerIndexConvention) {
  // |i>|j> -> i*n + j
  const ComplexVector v = tensor_product(basis_vector(3, 2), basis_vector(4, 1));
  EXPECT_EQ(v.size(), 12);
  EXPECT_EQ(v(2 * 4 + 1), Complex(1.0));
}

TEST(Tensor, PartialTraceMatchesOracle) {
  const BipartiteMixed rho = random_mixed({3, 4}, 3, 9);
  EXPECT_LT((partial_trace(rho.density(), {3, 4}, Side::B) - oracle::partial_trace(rho.density(), 3, 4, true)).norm(), 1e-14);
  EXPECT_LT((partial_trace(rho.density(), {3, 4}, Side::A) - oracle::partial_trace(rho.density(), 3, 4, false)).norm(), 1e-14);
}

TEST(Tensor, PartialTraceOfProductIsFactor) {
  const ComplexMatrix a = random_mixed({2, 1}, 2, 3).density();
  const ComplexMatrix b = random_mixed({3, 1}, 2, 4).density();
  EXPECT_LT((partial_trace(tensor_product(a, b), {2, 3}, Side::B) - a).norm(), 1e-14);
  EXPECT_LT((partial_trace(tensor_product(a, b), {2, 3}, Side::A) - b).norm(), 1e-14);
}

TEST(Tensor, PartialTraceRejectsWrongDims) {
  EXPECT_THROW(partial_trace(identity(6), {2, 2}, Side::A), DimensionError);
}

TEST(Tensor, SvdReconstructsAndSortsDescending) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ComplexMatrix m = random_matrix(3, 5, seed);
    const SingularDecomposition sd = svd(m);
    EXPECT_LT((sd.left * singular_matrix(sd, 3, 5) * sd.right - m).norm(), 1e-12);
    EXPECT_TRUE(is_unitary(sd.left));
    EXPECT_TRUE(is_unitary(sd.right));
    for (std::size_t k = 1; k < sd.singulars.size(); ++k) EXPECT_GE(sd.singulars[k - 1], sd.singulars[k]);
  }
}

TEST(Tensor, SvdIsDeterministic) {
  const ComplexMatrix m = random_matrix(4, 4, 17);
  const SingularDecomposition a = svd(m);
  const SingularDecomposition b = svd(m);
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
}

TEST(Tensor, EigHermitianMatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ComplexMatrix h = random_matrix(2, 2, seed);
    h = (h + h.adjoint()).eval();
    const SpectralDecomposition sd = eig_hermitian(h);
    const auto [hi, lo] = oracle::eig2(h);
    EXPECT_NEAR(sd.eigenvalues[0], hi, 1e-12);
    EXPECT_NEAR(sd.eigenvalues[1], lo, 1e-12);
    EXPECT_LT((sd.eigenvectors * ComplexVector(Eigen::Vector2d(hi, lo).cast<Complex>()).asDiagonal() * sd.eigenvectors.adjoint() - h).norm(),
              1e-12);
  }
}

TEST(Tensor, EigHermitianRejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(eig_hermitian(m), InvariantError);
}

TEST(Tensor, UnitaryUpToScale) {
  const ComplexMatrix u = random_unitary(3, 5);
  const auto c = is_unitary_up_to_scale(2.5 * u);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, 2.5, 1e-12);
  EXPECT_FALSE(is_unitary_up_to_scale(random_matrix(3, 3, 1)).has_value());
  EXPECT_THROW(is_unitary_up_to_scale(random_matrix(2, 3, 1)), DimensionError);
}

TEST(Tensor, IsometryScaleOnTallMatrix) {
  const ComplexMatrix w = random_unitary(4, 8).leftCols(2);
  const auto c = isometry_scale(0.5 * w);
  ASSERT_TRUE(c.has_value());
  EXPECT_NEAR(*c, 0.5, 1e-12);
}

TEST(Tensor, PolarUnitaryRejectsRankDeficient) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  EXPECT_THROW(polar_unitary(m), InvariantError);
  const ComplexMatrix u = random_unitary(3, 6);
  EXPECT_LT((polar_unitary(3.0 * u) - u).norm(), 1e-12);
}

TEST(Tensor, CompleteToUnitaryKeepsIsometryRows) {
  const ComplexMatrix w = random_unitary(5, 2).leftCols(3);
  const ComplexMatrix u = complete_to_unitary(w);
  EXPECT_TRUE(is_unitary(u));
  EXPECT_LT((u.topRows(3) - w.adjoint()).norm(), 1e-14);
  EXPECT_LT((u * w - ComplexMatrix::Identity(5, 3)).norm(), 1e-12);
}

TEST(Tensor, OrthonormalComplementIsLexicographic) {
  const ComplexMatrix frame = oracle::index_frame(4, {1, 3});
  const ComplexMatrix rest = orthonormal_complement(frame, 4);
  EXPECT_LT((rest - oracle::index_frame(4, {0, 2})).norm(), 1e-14);
}

TEST(Tensor, CanonicalFrameDependsOnlyOnSpan) {
  const ComplexMatrix frame = oracle::index_frame(5, {2, 4});
  const ComplexMatrix rotated = frame * random_unitary(2, 3);
  EXPECT_LT((canonical_frame(rotated) - frame).norm(), 1e-12);
}

TEST(Tensor, DistanceUpToPhase) {
  const ComplexMatrix a = random_matrix(3, 3, 4);
  EXPECT_LT(distance_up_to_phase(std::polar(1.0, 0.7) * a, a), 1e-12);
  EXPECT_GT(distance_up_to_phase(a, random_matrix(3, 3, 5)), 0.1);
}

TEST(Tensor, ClusterDescending) {
  const RealVector v{0.5, 0.5 + 1e-12, 0.3, 0.1, 0.1};
  const auto groups = cluster_descending(v, 1e-9);
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0], std::make_pair(std::size_t{0}, std::size_t{2}));
  EXPECT_EQ(groups[1], std::make_pair(std::size_t{2}, std::size_t{3}));
  EXPECT_EQ(groups[2], std::make_pair(std::size_t{3}, std::size_t{5}));
}
