#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "qtele/demos.hpp"

using namespace qtele;

namespace {

/// Sum of projectors onto the frames, one matrix per distinct weight.
std::vector<std::pair<double, ComplexMatrix>> projectors_by_weight(const BlockStructure& s) {
  std::vector<std::pair<double, ComplexMatrix>> out;
  for (std::size_t x = 0; x < s.k(); ++x) {
    const ComplexMatrix p = oracle::projector(s.alice_frames[x]);
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return std::abs(e.first - s.weights[x]) < 1e-8; });
    if (it == out.end())
      out.emplace_back(s.weights[x], p);
    else
      it->second += p;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  return out;
}

std::vector<std::pair<double, std::size_t>> block_signature(const Classification& c) {
  std::vector<std::pair<double, std::size_t>> sig;
  for (const auto& b : c.class_nine) sig.emplace_back(b.weight, b.dim);
  std::sort(sig.begin(), sig.end());
  return sig;
}

}  // namespace

TEST(Classify, Rho0IsMixedMaxEntWithTwoBlocks) {
  const Classification c = classify(demos::rho0(), 2);
  ASSERT_EQ(c.verdict, Verdict::Capable);
  EXPECT_EQ(c.kind, ResourceKind::MixedMaxEnt);
  ASSERT_TRUE(c.structure.has_value());
  ASSERT_EQ(c.structure->k(), 2u);
  const ComplexMatrix low = oracle::projector(oracle::index_frame(4, {0, 1}));
  const ComplexMatrix high = oracle::projector(oracle::index_frame(4, {2, 3}));
  const ComplexMatrix p0 = oracle::projector(c.structure->alice_frames[0]);
  const ComplexMatrix p1 = oracle::projector(c.structure->alice_frames[1]);
  EXPECT_TRUE(((p0 - low).norm() < 1e-10 && (p1 - high).norm() < 1e-10) ||
              ((p0 - high).norm() < 1e-10 && (p1 - low).norm() < 1e-10));
  EXPECT_NEAR(c.structure->weights[0], 0.5, 1e-12);
  EXPECT_LT((c.structure->reconstruct() - demos::rho0().density()).norm(), 1e-10);
  ASSERT_TRUE(c.certificate.has_value());
  EXPECT_EQ(c.certificate->basis.size(), 8u);
  EXPECT_FALSE(c.eof_flag);
}

TEST(Classify, Rho0IsCovariantUnderLocalUnitaries) {
  const ComplexMatrix u = random_unitary(4, 31);
  const ComplexMatrix v = random_unitary(2, 32);
  const Classification c = classify(apply_local_unitaries(demos::rho0(), u, v), 2);
  ASSERT_EQ(c.verdict, Verdict::Capable);
  ASSERT_TRUE(c.structure.has_value());
  // Degenerate weights: compare the direct sum of blocks per weight group.
  const auto groups = projectors_by_weight(*c.structure);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_LT((groups[0].second - identity(4)).norm(), 1e-10);
  // Non-degenerate weights: blocks are individually determined and rotate with U.
  const BipartiteMixed skewed = BipartiteMixed::from_ensemble(
      {0.7, 0.3}, {BipartitePure::from_coefficients(oracle::index_frame(4, {0, 1}) / std::sqrt(2.0)),
                   BipartitePure::from_coefficients(oracle::index_frame(4, {2, 3}) / std::sqrt(2.0))});
  const Classification cs = classify(apply_local_unitaries(skewed, u, v), 2);
  ASSERT_EQ(cs.verdict, Verdict::Capable);
  const auto rotated = projectors_by_weight(*cs.structure);
  ASSERT_EQ(rotated.size(), 2u);
  EXPECT_NEAR(rotated[0].first, 0.7, 1e-10);
  EXPECT_LT((rotated[0].second - u * oracle::projector(oracle::index_frame(4, {0, 1})) * u.adjoint()).norm(), 1e-8);
  EXPECT_LT((rotated[1].second - u * oracle::projector(oracle::index_frame(4, {2, 3})) * u.adjoint()).norm(), 1e-8);
}

TEST(Classify, PureSquareResources) {
  EXPECT_EQ(classify(BipartiteMixed(demos::phi_plus()), 2).kind, ResourceKind::PureMaxEnt);
  const Classification product = classify(BipartiteMixed(BipartitePure({2, 2}, basis_vector(4, 0))), 2);
  EXPECT_EQ(product.verdict, Verdict::NotCapable);
  EXPECT_TRUE(product.eof_flag);
  const Classification generic = classify(BipartiteMixed(random_pure({3, 3}, 5)), 3);
  EXPECT_EQ(generic.verdict, Verdict::NotCapable);
  EXPECT_NE(generic.reason.find("Schmidt spectrum not flat"), std::string::npos);
}

TEST(Classify, FiveLevelBlocks) {
  for (double a : {0.1, 0.5, 0.9}) {
    const Classification c = classify(BipartiteMixed(demos::five_level(a)), 2);
    ASSERT_EQ(c.verdict, Verdict::Capable) << a;
    EXPECT_EQ(c.kind, ResourceKind::ClassNine);
    std::vector<std::pair<double, std::size_t>> expected{{std::sqrt(a), 2}, {std::sqrt(1.0 - a), 3}};
    std::sort(expected.begin(), expected.end());
    const auto got = block_signature(c);
    ASSERT_EQ(got.size(), 2u);
    for (std::size_t p = 0; p < 2; ++p) {
      EXPECT_NEAR(got[p].first, expected[p].first, 1e-10);
      EXPECT_EQ(got[p].second, expected[p].second);
    }
  }
}

TEST(Classify, FiveLevelMergesEqualCoefficients) {
  // a/2 = (1-a)/3 at a = 0.4: all five Schmidt values coincide.
  const auto blocks = class_nine_membership(demos::five_level(0.4), 2);
  ASSERT_TRUE(blocks.has_value());
  ASSERT_EQ(blocks->size(), 1u);
  EXPECT_NEAR(blocks->front().weight, 1.0, 1e-10);
  EXPECT_EQ(blocks->front().dim, 5u);
}

TEST(Classify, ClassNineMembershipRejectsThinGroups) {
  // Schmidt values {0.8, 0.6}: each appears once, fewer than d = 2 times.
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a(0, 0) = 0.8;
  a(1, 1) = 0.6;
  EXPECT_FALSE(class_nine_membership(BipartitePure::from_coefficients(a), 2).has_value());
  EXPECT_THROW(class_nine_membership(demos::phi_plus(), 3), DimensionError);
}

TEST(Classify, MixtureOfBlockSuperpositionsIsCapable) {
  for (double p1 : {0.5, 0.3}) {
    const BipartiteMixed rho = demos::block_superposition_mixture(p1);
    const Classification c = classify(rho, 2);
    ASSERT_EQ(c.verdict, Verdict::Capable) << p1 << ": " << c.reason;
    EXPECT_EQ(c.kind, ResourceKind::ClassNine);
    ASSERT_TRUE(c.certificate.has_value());
    EXPECT_TRUE(derive_corrections(rho, c.certificate->basis, 2));
  }
}

TEST(Classify, PostChannelStateIsClassNine) {
  const demos::Rho0Pipeline pipe = demos::rho0_pipeline();
  const Classification c = classify(pipe.after_channel, 2);
  ASSERT_EQ(c.verdict, Verdict::Capable);
  EXPECT_EQ(c.kind, ResourceKind::ClassNine);
  const auto sig = block_signature(c);
  ASSERT_EQ(sig.size(), 2u);
  EXPECT_EQ(sig[0].second, 2u);
  EXPECT_EQ(sig[1].second, 2u);
}

TEST(Classify, GenericMixedLargeResourceIsNotCertified) {
  const Classification c = classify(random_mixed({3, 3}, 2, 4), 2);
  EXPECT_NE(c.verdict, Verdict::Capable);
}

TEST(Classify, FirstFactorEqualsD) {
  const BipartiteMixed generic = random_mixed({2, 4}, 2, 9);
  const Classification c = classify(generic, 2, ProtocolVariant::AliceFirst);
  EXPECT_EQ(c.verdict, Verdict::NotCapable);
  EXPECT_NE(c.reason.find("first factor equals d"), std::string::npos);

  const BipartiteMixed mirrored = swap_factors(random_mixed_max_ent(3, 2, 6, 10));
  EXPECT_EQ(classify(mirrored, 3, ProtocolVariant::AliceFirst).verdict, Verdict::NotCapable);
  const Classification bob = classify(mirrored, 3, ProtocolVariant::BobFirstAllowed);
  ASSERT_EQ(bob.verdict, Verdict::Capable);
  EXPECT_TRUE(bob.bob_side);
  EXPECT_EQ(bob.bob_projectors.size(), 2u);
}

TEST(Classify, PureFirstFactorDIsStillCapable) {
  EXPECT_EQ(classify(BipartiteMixed(random_max_ent(2, 2, 4, 3)), 2).verdict, Verdict::Capable);
}

TEST(Classify, DiagnosisNamesFailedScreen) {
  const StructureDiagnosis bad = diagnose_mixed_max_ent(random_mixed({4, 2}, 2, 12), 2);
  EXPECT_FALSE(bad.structure.has_value());
  EXPECT_FALSE(bad.failure.empty());
  const StructureDiagnosis good = diagnose_mixed_max_ent(demos::rho0(), 2);
  EXPECT_TRUE(good.structure.has_value());
  EXPECT_TRUE(good.failure.empty());
}

TEST(Classify, RejectsTooSmallFactors) {
  EXPECT_THROW(classify(BipartiteMixed(demos::phi_plus()), 3), DimensionError);
}
