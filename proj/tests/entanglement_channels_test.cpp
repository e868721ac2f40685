#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qtele/demos.hpp"

using namespace qtele;

TEST(Entanglement, PhiPlusIsOneBit) {
  const EntanglementReport e = eof_pure(demos::phi_plus());
  EXPECT_EQ(e.value_bits, 1.0);
  EXPECT_EQ(e.normalized, 1.0);
  EXPECT_TRUE(e.exact);
}

TEST(Entanglement, Rho0IsOneBitExactly) {
  const EntanglementReport e = eof_mixed_structured(demos::rho0(), 2);
  EXPECT_NEAR(e.value_bits, 1.0, 1e-12);
  EXPECT_TRUE(e.exact);
}

TEST(Entanglement, FiveLevelMatchesHandEntropy) {
  const double expected = oracle::entropy_bits({0.25, 0.25, 1.0 / 6, 1.0 / 6, 1.0 / 6});
  EXPECT_NEAR(eof_pure(demos::five_level(0.5)).value_bits, expected, 1e-10);
}

TEST(Entanglement, PureEntropyMatchesSchmidtOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BipartitePure s = random_pure({3, 3}, seed);
    std::vector<double> p;
    for (double c : oracle::schmidt_coefficients(s.amplitudes(), 3, 3)) p.push_back(c * c);
    EXPECT_NEAR(eof_pure(s).value_bits, oracle::entropy_bits(p), 1e-10);
  }
}

TEST(Entanglement, GenericMixedGivesUpperBound) {
  const EntanglementReport e = eof_mixed_structured(random_mixed({2, 2}, 2, 3), 2);
  EXPECT_FALSE(e.exact);
  EXPECT_LT(e.value_bits, 1.0);
}

TEST(Entanglement, LogDCriterionAgreesWithClassify) {
  std::vector<BipartiteMixed> states{demos::rho0(), BipartiteMixed(demos::phi_plus()),
                                     BipartiteMixed(BipartitePure({2, 2}, basis_vector(4, 0)))};
  for (std::uint64_t s = 0; s < 10; ++s) {
    states.push_back(random_mixed_max_ent(2, 1 + s % 3, 2 * (1 + s % 3) + s % 2, s));
    states.push_back(random_mixed({3 + s % 2, 2}, 1 + s % 3, 100 + s));
    states.push_back(BipartiteMixed(random_pure({2, 2}, 200 + s)));
  }
  for (const auto& rho : states) {
    const bool capable = classify(rho, 2).verdict == Verdict::Capable;
    EXPECT_EQ(meets_log_d_criterion(rho, 2), capable);
  }
  EXPECT_THROW(meets_log_d_criterion(random_mixed({2, 3}, 2, 1), 2), DimensionError);
}

TEST(Channels, KrausCompletenessIsChecked) {
  EXPECT_THROW(KrausChannel(2, {0.5 * identity(2)}), InvariantError);
  EXPECT_THROW(KrausChannel(2, {identity(3)}), DimensionError);
  EXPECT_NO_THROW(random_channel(3, 4, 5));
}

TEST(Channels, OneSidedMatchesKronOracle) {
  const BipartiteMixed rho = random_mixed({2, 3}, 2, 4);
  const KrausChannel ch = random_channel(3, 2, 6);
  ComplexMatrix expected = ComplexMatrix::Zero(6, 6);
  for (const auto& a : ch.operators()) {
    const ComplexMatrix k = oracle::kron(identity(2), a);
    expected += k * rho.density() * k.adjoint();
  }
  EXPECT_LT((apply_one_sided(ch, rho, Side::B).density() - expected).norm(), 1e-12);
  EXPECT_THROW(apply_one_sided(ch, rho, Side::A), DimensionError);
}

TEST(Channels, IdentityAndDepolarizing) {
  const BipartiteMixed bell(demos::phi_plus());
  EXPECT_LT((apply_one_sided(identity_channel(2), bell, Side::A).density() - bell.density()).norm(), 1e-14);
  const BipartiteMixed noisy = apply_one_sided(depolarizing_qubit(1.0), bell, Side::B);
  EXPECT_LT((noisy.density() - identity(4) / 4.0).norm(), 1e-12);
}

TEST(Channels, DiscardLabelMatchesPartialTraceOracle) {
  // Bob's C^4 = C^2_label (x) C^2; tracing the label is a partial trace on the middle factor.
  const BipartiteMixed rho = random_mixed({3, 4}, 3, 14);
  const ComplexMatrix out = discard_bob_label(rho, 2).density();
  ComplexMatrix expected = ComplexMatrix::Zero(6, 6);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          for (int l = 0; l < 2; ++l) expected(a * 2 + x, b * 2 + y) += rho.density()(a * 4 + l * 2 + x, b * 4 + l * 2 + y);
  EXPECT_LT((out - expected).norm(), 1e-14);
  EXPECT_THROW(discard_bob_label(rho, 3), DimensionError);
}

TEST(Channels, PipelineReproducesRho0) {
  const demos::Rho0Pipeline pipe = demos::rho0_pipeline();
  EXPECT_LE((pipe.compressed.density() - demos::rho0().density()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Channels, CompressSupport) {
  const BipartiteMixed wide(demos::standard_max_ent(2, 2, 4));
  const BipartiteMixed narrow = compress_support(wide, oracle::index_frame(4, {0, 1}), Side::B);
  EXPECT_LT((narrow.density() - demos::phi_plus().projector()).norm(), 1e-14);
  EXPECT_THROW(compress_support(wide, oracle::index_frame(4, {0, 2}), Side::B), InvariantError);
}

TEST(Channels, CapabilityAfterBlockDephasing) {
  const Classification c =
      teleportation_capability_after_channel(demos::block_dephasing_channel(), BipartiteMixed(demos::psi0()), Side::B, 2);
  ASSERT_EQ(c.verdict, Verdict::Capable);
  EXPECT_EQ(c.kind, ResourceKind::ClassNine);
  ASSERT_EQ(c.class_nine.size(), 2u);
  for (const auto& b : c.class_nine) EXPECT_EQ(b.dim, 2u);
}

TEST(Channels, FullDepolarizationDestroysCapability) {
  const Classification c =
      teleportation_capability_after_channel(depolarizing_qubit(1.0), BipartiteMixed(demos::phi_plus()), Side::B, 2);
  EXPECT_EQ(c.verdict, Verdict::NotCapable);
}
