#pragma once

// Decides whether a bipartite resource can teleport an unknown state of C^d
// faithfully and produces a certified structural witness.
//
// Regimes for a resource on C^m (x) C^n (m, n >= d):
//   n == d           capable iff pure or mixed maximally entangled (block structure on Alice's side)
//   m == d, Alice    capable iff pure maximally entangled
//   m == d, Bob      Bob may measure first: capable iff block structure on Bob's side
//   m, n > d         sufficient test only (block superpositions of maximally entangled states);
//                    a negative answer is Unknown
// Every Capable verdict carries certificates from derive_corrections.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtele/entanglement.hpp"
#include "qtele/measurement.hpp"
#include "qtele/protocol.hpp"
#include "qtele/structure.hpp"

namespace qtele {

enum class Verdict { Capable, NotCapable, Unknown };
enum class ResourceKind { PureMaxEnt, MixedMaxEnt, ClassNine };
enum class ProtocolVariant { AliceFirst, BobFirstAllowed };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Capable: return "Capable";
    case Verdict::NotCapable: return "NotCapable";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

inline std::string to_string(ResourceKind k) {
  switch (k) {
    case ResourceKind::PureMaxEnt: return "PureMaxEnt";
    case ResourceKind::MixedMaxEnt: return "MixedMaxEnt";
    case ResourceKind::ClassNine: return "ClassNine";
  }
  return "?";
}

/// One block of a superposition c_1|psi_1> + ... + c_l|psi_l> of maximally
/// entangled states on orthogonal n_p-dimensional subspaces.
struct ClassNineBlock {
  double weight = 0.0;      // c_p
  std::size_t dim = 0;      // n_p
  ComplexMatrix alice_frame;  // m x n_p
};

struct Classification {
  Verdict verdict = Verdict::Unknown;
  std::optional<ResourceKind> kind;
  std::optional<BlockStructure> structure;   // MixedMaxEnt / PureMaxEnt; Bob-side frames when bob_side
  bool bob_side = false;
  std::vector<ClassNineBlock> class_nine;    // ClassNine
  std::optional<bool> superposition_closed;  // mixed ClassNine only
  std::string reason;                        // why not capable / unknown
  bool eof_flag = false;                     // advisory: entanglement of formation below log2(d)
  std::optional<FaithfulnessCertificate> certificate;  // Alice-first witness
  std::vector<ComplexMatrix> bob_projectors;           // Bob-first witness
  std::vector<FaithfulnessCertificate> branch_certificates;
};

/// Every distinct nonzero Schmidt coefficient must occur at least d times.
/// Blocks are the groups of equal coefficients: n_p = multiplicity and
/// c_p = mu * sqrt(n_p).
inline std::optional<std::vector<ClassNineBlock>> class_nine_membership(const BipartitePure& s, std::size_t d) {
  if (std::min(s.dims().m, s.dims().n) < d) throw DimensionError("class_nine_membership: need m, n >= d");
  const SchmidtDecomposition sch = schmidt(s);
  const std::size_t rank = sch.rank();
  const RealVector support(sch.coefficients.begin(), sch.coefficients.begin() + static_cast<std::ptrdiff_t>(rank));
  std::vector<ClassNineBlock> blocks;
  for (const auto& [begin, end] : cluster_descending(support, kClusterTol)) {
    const std::size_t count = end - begin;
    if (count < d) return std::nullopt;
    double mean = 0.0;
    for (std::size_t k = begin; k < end; ++k) mean += support[k];
    mean /= static_cast<double>(count);
    blocks.push_back({mean * std::sqrt(static_cast<double>(count)), count,
                      canonical_frame(sch.alice_vectors.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count)))});
  }
  if (blocks.empty()) return std::nullopt;
  return blocks;
}

inline MeasurementBasis build_witness_basis(const BlockStructure& structure, std::size_t d, std::size_t m) {
  return block_basis(d, structure.alice_frames, m);
}

inline MeasurementBasis build_witness_basis(const std::vector<ClassNineBlock>& blocks, std::size_t d, std::size_t m) {
  std::vector<ComplexMatrix> frames;
  frames.reserve(blocks.size());
  for (const auto& b : blocks) frames.push_back(b.alice_frame);
  return block_basis(d, frames, m);
}

namespace detail {

inline bool eof_below_log_d(const BipartiteMixed& resource, std::size_t d) {
  const EntanglementReport r = eof_mixed_structured(resource, d);
  return r.value_bits < std::log2(static_cast<double>(d)) - kStructuralTol;
}

inline Classification not_capable(std::string reason) {
  Classification c;
  c.verdict = Verdict::NotCapable;
  c.reason = std::move(reason);
  return c;
}

inline Classification unknown(std::string reason) {
  Classification c;
  c.verdict = Verdict::Unknown;
  c.reason = std::move(reason);
  return c;
}

/// Common refinement of a commuting family of projectors: the joint
/// eigenspaces of a seeded random positive combination. Returns nothing if
/// the projectors do not commute.
inline std::optional<std::vector<ComplexMatrix>> common_refinement(const std::vector<ComplexMatrix>& projectors,
                                                                   std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (const auto& p : projectors) h += (1.0 + rng.uniform()) * p;
  const SpectralDecomposition sd = eig_hermitian(h, 1e-8);
  std::vector<ComplexMatrix> atoms;
  for (const auto& [begin, end] : cluster_descending(sd.eigenvalues, 1e-7)) {
    if (sd.eigenvalues[begin] < 0.5) continue;  // outside every projector
    const ComplexMatrix frame =
        sd.eigenvectors.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    const ComplexMatrix q = frame * frame.adjoint();
    for (const auto& p : projectors) {
      const ComplexMatrix pq = p * q;
      if (pq.norm() > 1e-7 && (pq - q).norm() > 1e-7) return std::nullopt;
    }
    atoms.push_back(frame);
  }
  return atoms;
}

inline std::optional<FaithfulnessCertificate> certify(const BipartiteMixed& resource, const MeasurementBasis& basis,
                                                      std::size_t d) {
  CorrectionAttempt attempt = derive_corrections(resource, basis, d);
  if (!attempt) return std::nullopt;
  return std::move(attempt.certificate);
}

inline Classification capable_class_nine(std::vector<ClassNineBlock> blocks, FaithfulnessCertificate cert) {
  // c_p^2 is the total probability of the block's outcomes.
  std::size_t offset = 0;
  for (auto& b : blocks) {
    const std::size_t count = cert.d * b.dim;
    double mass = 0.0;
    for (std::size_t j = offset; j < offset + count; ++j) mass += cert.probabilities[j];
    b.weight = std::sqrt(mass);
    offset += count;
  }
  Classification c;
  c.verdict = Verdict::Capable;
  c.kind = ResourceKind::ClassNine;
  c.class_nine = std::move(blocks);
  c.certificate = std::move(cert);
  return c;
}

inline Classification classify_alice_block(const BipartiteMixed& resource, std::size_t d) {
  const StructureDiagnosis diag = diagnose_mixed_max_ent(resource, d);
  if (!diag.structure) {
    if (support_rank(resource) == 1) return not_capable("Schmidt spectrum not flat: pure resource is not maximally entangled");
    return not_capable("not a mixed maximally entangled state: " + diag.failure);
  }
  auto cert = certify(resource, build_witness_basis(*diag.structure, d, resource.dims().m), d);
  if (!cert) return unknown("block structure found but its witness basis failed verification");
  Classification c;
  c.verdict = Verdict::Capable;
  c.kind = diag.structure->k() == 1 ? ResourceKind::PureMaxEnt : ResourceKind::MixedMaxEnt;
  c.structure = diag.structure;
  c.certificate = std::move(cert);
  return c;
}

inline Classification classify_bob_block(const BipartiteMixed& resource, std::size_t d) {
  const StructureDiagnosis diag = diagnose_mixed_max_ent(swap_factors(resource), d);
  if (!diag.structure) {
    if (support_rank(resource) == 1) return not_capable("Schmidt spectrum not flat: pure resource is not maximally entangled");
    return not_capable("Bob-first: not a mixed maximally entangled state on Bob's side: " + diag.failure);
  }
  Classification c;
  c.verdict = Verdict::Capable;
  c.kind = diag.structure->k() == 1 ? ResourceKind::PureMaxEnt : ResourceKind::MixedMaxEnt;
  c.structure = diag.structure;
  c.bob_side = true;
  const MeasurementBasis bell = bell_basis(d);
  for (const auto& frame : diag.structure->alice_frames) {
    c.bob_projectors.push_back(frame * frame.adjoint());
    const ComplexMatrix restricted = restrict_bob(resource.density(), resource.dims(), frame);
    const double p = restricted.trace().real();
    auto cert = certify(BipartiteMixed({d, d}, restricted / p), bell, d);
    if (!cert) return unknown("Bob-side block structure found but a branch failed verification");
    c.branch_certificates.push_back(std::move(*cert));
  }
  return c;
}

inline Classification classify_large_pure(const BipartiteMixed& resource, const BipartitePure& state, std::size_t d) {
  auto blocks = class_nine_membership(state, d);
  if (!blocks) return unknown("outside the class of block superpositions of maximally entangled states");
  auto cert = certify(resource, build_witness_basis(*blocks, d, resource.dims().m), d);
  if (!cert) return unknown("class witness failed verification");
  return capable_class_nine(std::move(*blocks), std::move(*cert));
}

inline Classification classify_large_mixed(const BipartiteMixed& resource, std::size_t d, std::uint64_t seed) {
  const Dims dims = resource.dims();
  const std::vector<EigenState> eig = support_eigenstates(resource, kClusterTol);

  // Every eigenstate in the class; superpositions inside degenerate eigenspaces sampled.
  std::vector<ComplexMatrix> block_projectors;
  bool eigenstates_in_class = true;
  for (const auto& e : eig) {
    const auto blocks = class_nine_membership(e.state, d);
    if (!blocks) {
      eigenstates_in_class = false;
      break;
    }
    for (const auto& b : *blocks) block_projectors.push_back(b.alice_frame * b.alice_frame.adjoint());
  }
  bool closed = eigenstates_in_class;
  if (eigenstates_in_class) {
    Rng rng(derive_seed(seed, 0x5u));
    for (std::size_t i = 0; i < eig.size() && closed; ++i)
      for (std::size_t j = i + 1; j < eig.size() && closed; ++j) {
        if (std::abs(eig[i].weight - eig[j].weight) > kClusterTol) continue;
        for (int trial = 0; trial < 20 && closed; ++trial) {
          const Complex a = rng.complex_normal();
          const Complex b = rng.complex_normal();
          const BipartitePure mix =
              BipartitePure::normalized(dims, a * eig[i].state.amplitudes() + b * eig[j].state.amplitudes());
          if (!class_nine_membership(mix, d)) closed = false;
        }
      }
  }

  std::vector<std::vector<ComplexMatrix>> candidates;
  if (eigenstates_in_class) {
    if (auto atoms = common_refinement(block_projectors, dims.m, derive_seed(seed, 0x9u))) candidates.push_back(*atoms);
  }
  {
    const SpectralDecomposition alice = eig_hermitian(partial_trace(resource.density(), dims, Side::B));
    std::vector<ComplexMatrix> atoms;
    for (const auto& [begin, end] : cluster_descending(alice.eigenvalues, kClusterTol)) {
      if (alice.eigenvalues[begin] <= kSupportFloor) continue;
      atoms.push_back(alice.eigenvectors.middleCols(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
    }
    candidates.push_back(std::move(atoms));
  }

  for (const auto& atoms : candidates) {
    if (atoms.empty()) continue;
    bool wide_enough = true;
    for (const auto& a : atoms) wide_enough = wide_enough && static_cast<std::size_t>(a.cols()) >= d;
    if (!wide_enough) continue;
    std::vector<ClassNineBlock> blocks;
    for (const auto& a : atoms) blocks.push_back({0.0, static_cast<std::size_t>(a.cols()), canonical_frame(a)});
    auto cert = certify(resource, build_witness_basis(blocks, d, dims.m), d);
    if (!cert) continue;
    Classification c = capable_class_nine(std::move(blocks), std::move(*cert));
    c.superposition_closed = closed;
    return c;
  }
  Classification c = unknown(eigenstates_in_class ? "no common block witness verified"
                                                  : "an eigenstate lies outside the class of block superpositions");
  c.superposition_closed = closed;
  return c;
}

}  // namespace detail

/// `seed` drives the randomized parts of the m, n > d mixed test.
inline Classification classify(const BipartiteMixed& resource, std::size_t d,
                               ProtocolVariant protocol = ProtocolVariant::AliceFirst, std::uint64_t seed = 0) {
  const Dims dims = resource.dims();
  if (d == 0 || dims.m < d || dims.n < d) throw DimensionError("classify: need m, n >= d >= 1");
  Classification c;
  const std::size_t rank = support_rank(resource);
  if (dims.n == d) {
    c = detail::classify_alice_block(resource, d);
  } else if (dims.m == d) {
    if (protocol == ProtocolVariant::BobFirstAllowed) {
      c = detail::classify_bob_block(resource, d);
    } else if (rank > 1) {
      c = detail::not_capable("first factor equals d: only a pure maximally entangled resource works "
                              "(rank " + std::to_string(rank) + " needs an Alice space of dimension " +
                              std::to_string(rank * d) + ")");
    } else {
      const BipartitePure pure = support_eigenstates(resource).front().state;
      if (!is_maximally_entangled(pure, d)) {
        c = detail::not_capable("Schmidt spectrum not flat: pure resource is not maximally entangled");
      } else {
        auto cert = detail::certify(resource, bell_basis(d), d);
        if (cert) {
          c.verdict = Verdict::Capable;
          c.kind = ResourceKind::PureMaxEnt;
          c.certificate = std::move(cert);
        } else {
          c = detail::unknown("maximally entangled resource failed Bell-basis verification");
        }
      }
    }
  } else if (rank == 1) {
    c = detail::classify_large_pure(resource, support_eigenstates(resource).front().state, d);
  } else {
    c = detail::classify_large_mixed(resource, d, seed);
  }
  c.eof_flag = detail::eof_below_log_d(resource, d);
  return c;
}

}  // namespace qtele
