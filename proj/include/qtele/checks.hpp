#pragma once

// Randomized property suites for the capability conditions. Used by
// `qtele check` and by the test suites.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "qtele/classify.hpp"

namespace qtele::checks {

struct CheckResult {
  std::string name;
  std::string description;
  std::size_t samples = 0;
  bool passed = true;
  std::string counterexample;  // first failure, empty when passed
};

namespace detail {

inline void fail(CheckResult& r, std::uint64_t seed, const std::string& what) {
  if (!r.passed) return;
  r.passed = false;
  std::ostringstream os;
  os << "seed " << seed << ": " << what;
  r.counterexample = os.str();
}

inline std::string matrix_dump(const ComplexMatrix& m) {
  std::ostringstream os;
  os.precision(6);
  os << m;
  return os.str();
}

/// Same non-empty correction rows (up to phase) wherever both certificates
/// have a supported outcome.
inline bool corrections_agree(const FaithfulnessCertificate& a, const FaithfulnessCertificate& b, double tol) {
  const auto d = static_cast<Eigen::Index>(a.d);
  for (std::size_t j = 0; j < a.corrections.size(); ++j) {
    if (!a.corrections[j] || !b.corrections[j]) continue;
    if (distance_up_to_phase(a.corrections[j]->topRows(d), b.corrections[j]->topRows(d)) > tol) return false;
  }
  return true;
}

}  // namespace detail

/// Mixed resources: each support eigenstate, on its own, passes with the
/// witness basis of the whole state and the same per-outcome corrections.
inline CheckResult check_eigenstate_necessity(std::size_t d, std::size_t samples, std::uint64_t seed) {
  CheckResult r{"eigenstate-necessity", "certified mixed resource => every eigenstate certified with the same corrections", samples, true, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t sd = derive_seed(seed, 1000 + s);
    Rng rng(sd);
    const std::size_t k = 2 + s % 2;
    const BipartiteMixed rho = random_mixed_max_ent(d, k, k * d + s % 2, rng);
    const Classification c = classify(rho, d);
    if (c.verdict != Verdict::Capable || !c.certificate) {
      detail::fail(r, sd, "mixed maximally entangled state not certified: " + c.reason);
      continue;
    }
    for (std::size_t i = 0; i < c.certificate->eigenstates.size(); ++i) {
      const CorrectionAttempt single = derive_corrections(BipartiteMixed(c.certificate->eigenstates[i]), c.certificate->basis, d);
      if (!single) {
        detail::fail(r, sd, "eigenstate " + std::to_string(i) + " fails on its own: " + single.violation->what);
      } else if (!detail::corrections_agree(*single.certificate, *c.certificate, 1e-8)) {
        detail::fail(r, sd, "eigenstate " + std::to_string(i) + " needs different corrections");
      }
    }
  }
  return r;
}

/// Pure resources on C^d (x) C^d: capable iff maximally entangled; certified
/// outcomes have probability 1/d^2 and maximally entangled measurement states.
inline CheckResult check_pure_square(std::size_t d, std::size_t samples, std::uint64_t seed) {
  CheckResult r{"pure-dxd-iff-max-ent", "pure d x d resource capable iff maximally entangled; measurements maximally entangled",
                2 * samples, true, {}};
  const auto dd = static_cast<double>(d);
  const MeasurementBasis bell = bell_basis(d);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t sd = derive_seed(seed, 2000 + s);
    Rng rng(sd);
    const BipartitePure generic = random_pure({d, d}, rng);
    const BipartiteMixed generic_rho(generic);
    const bool flat = is_maximally_entangled(generic, d);
    const Classification c = classify(generic_rho, d);
    if ((c.verdict == Verdict::Capable) != flat) detail::fail(r, sd, "verdict disagrees with Schmidt flatness");
    if (!flat && derive_corrections(generic_rho, bell, d)) detail::fail(r, sd, "non-flat resource certified with the Bell basis");

    const BipartiteMixed ideal(random_max_ent(d, d, d, rng));
    const Classification ci = classify(ideal, d);
    if (ci.verdict != Verdict::Capable || !ci.certificate) {
      detail::fail(r, sd, "maximally entangled resource not certified");
      continue;
    }
    const FaithfulnessCertificate& cert = *ci.certificate;
    for (std::size_t j = 0; j < cert.probabilities.size(); ++j) {
      if (cert.probabilities[j] <= kProbabilityCutoff) continue;
      const double c2 = cert.scales[j].front() * cert.scales[j].front();
      if (std::abs(c2 - 1.0 / (dd * dd)) > 1e-8) detail::fail(r, sd, "outcome " + std::to_string(j) + " has c^2 != 1/d^2");
      if (!is_maximally_entangled(cert.basis.states[j], d, 1e-8))
        detail::fail(r, sd, "supported measurement state " + std::to_string(j) + " is not maximally entangled");
    }
  }
  return r;
}

/// Resources on C^m (x) C^d: capable iff mixed maximally entangled.
inline CheckResult check_block_structure(std::size_t d, std::size_t samples, std::uint64_t seed) {
  CheckResult r{"mixed-block-structure", "C^m x C^d resource capable iff mixed maximally entangled", 2 * samples, true, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t sd = derive_seed(seed, 3000 + s);
    Rng rng(sd);
    const std::size_t k = 1 + s % 3;
    const std::size_t m = k * d + s % 2;
    const BipartiteMixed good = apply_local_unitaries(random_mixed_max_ent(d, k, m, rng), random_unitary(m, rng),
                                                      random_unitary(d, rng));
    const Classification c = classify(good, d);
    if (c.verdict != Verdict::Capable || !c.structure || c.structure->k() != k)
      detail::fail(r, sd, "rotated mixed maximally entangled state (k=" + std::to_string(k) + ") not recognized: " + c.reason);

    const BipartiteMixed generic = random_mixed({2 * d, d}, 2, rng);
    const Classification cg = classify(generic, d);
    if (cg.verdict != Verdict::NotCapable)
      detail::fail(r, sd, "generic rank-2 state classified " + to_string(cg.verdict) + "\n" + detail::matrix_dump(generic.density()));
  }
  return r;
}

/// Resources on C^d (x) C^n: mixed ones fail when Alice measures first, and
/// Bob-side block structure succeeds when Bob may measure first.
inline CheckResult check_first_factor_d(std::size_t d, std::size_t samples, std::uint64_t seed) {
  CheckResult r{"first-factor-d", "C^d x C^n: mixed => not capable (Alice first); Bob-side blocks => capable (Bob first)",
                2 * samples, true, {}};
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t sd = derive_seed(seed, 4000 + s);
    Rng rng(sd);
    const std::size_t rank = 2 + s % 2;
    const BipartiteMixed generic = random_mixed({d, 2 * d}, rank, rng);
    const Classification c = classify(generic, d, ProtocolVariant::AliceFirst);
    if (c.verdict != Verdict::NotCapable) detail::fail(r, sd, "rank-" + std::to_string(rank) + " state not rejected");

    const std::size_t k = 2;
    const BipartiteMixed mirrored = swap_factors(random_mixed_max_ent(d, k, k * d, rng));
    const Classification cb = classify(mirrored, d, ProtocolVariant::BobFirstAllowed);
    if (cb.verdict != Verdict::Capable) {
      detail::fail(r, sd, "Bob-side mixed maximally entangled state rejected: " + cb.reason);
      continue;
    }
    const BobFirstReport rep = bob_first_simulate(mirrored, cb.bob_projectors, random_input(d, rng), d);
    if (!rep.faithful || std::abs(rep.total_probability() - 1.0) > 1e-9)
      detail::fail(r, sd, "Bob-first simulation not faithful");
  }
  return r;
}

inline std::vector<CheckResult> run_all(std::size_t d, std::size_t samples, std::uint64_t seed) {
  return {check_eigenstate_necessity(d, samples, seed), check_pure_square(d, samples, seed),
          check_block_structure(d, samples, seed), check_first_factor_d(d, samples, seed)};
}

}  // namespace qtele::checks
