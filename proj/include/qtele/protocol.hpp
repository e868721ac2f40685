#pragma once

// The teleportation protocol: conditional maps, the exact faithfulness test
// with correction derivation, simulation (Alice-first and Bob-first) and
// fidelity evaluation for resources that are not ideal.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtele/measurement.hpp"
#include "qtele/states.hpp"

namespace qtele {

/// Outcomes with probability below this get no correction.
inline constexpr double kProbabilityCutoff = 1e-12;

class StaleCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TeleportOutcome {
  std::size_t outcome_index = 0;
  double probability = 0.0;
  std::optional<ComplexMatrix> correction;  // unitary on C^n
  ComplexMatrix bob_state_conditional;      // normalized, before correction; zero if unsupported
  std::optional<double> fidelity_after_correction;
};

/// M = A^T V^dag (n x d) for resource coefficients A (m x n) and measurement
/// coefficients V (d x m). Bob's unnormalized state after outcome `meas` on
/// |phi>|resource> is M|phi>.
inline ComplexMatrix conditional_map(const BipartitePure& resource_state, const BipartitePure& meas_state) {
  if (meas_state.dims().n != resource_state.dims().m)
    throw DimensionError("conditional_map: measurement acts on C^" + std::to_string(meas_state.dims().n) +
                         " but resource has Alice dimension " + std::to_string(resource_state.dims().m));
  return coefficient_matrix(resource_state).transpose() * coefficient_matrix(meas_state).adjoint();
}

struct Violation {
  std::size_t eigenstate = 0;  // i
  std::size_t outcome = 0;     // j
  std::string what;
};

struct FaithfulnessCertificate {
  std::size_t d = 0;
  MeasurementBasis basis;
  std::vector<double> weights;            // p_i of the resource eigenstates
  std::vector<BipartitePure> eigenstates;  // support eigenstates of the resource
  std::vector<std::vector<double>> scales;  // scales[j][i] = c_ij
  std::vector<double> probabilities;       // q_j = sum_i p_i c_ij^2
  std::vector<std::optional<ComplexMatrix>> isometries;   // W_j (n x d)
  std::vector<std::optional<ComplexMatrix>> corrections;  // unitary on C^n, first d rows W_j^dag
};

struct CorrectionAttempt {
  std::optional<FaithfulnessCertificate> certificate;
  std::optional<Violation> violation;

  explicit operator bool() const { return certificate.has_value(); }
};

namespace detail {

inline void check_protocol_dims(const BipartiteMixed& resource, const MeasurementBasis& basis, std::size_t d) {
  if (basis.d != d) throw DimensionError("measurement basis is for d=" + std::to_string(basis.d) + ", not " + std::to_string(d));
  if (basis.m != resource.dims().m)
    throw DimensionError("measurement basis acts on C^" + std::to_string(basis.m) + " but resource Alice dimension is " +
                         std::to_string(resource.dims().m));
  if (resource.dims().n < d) throw DimensionError("Bob's dimension is smaller than d");
}

inline std::size_t dominant_index(const std::vector<double>& weights, const std::vector<double>& scales) {
  std::size_t best = 0;
  double value = -1.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double v = weights[i] * scales[i] * scales[i];
    if (v > value) {
      value = v;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Exact faithfulness test. For every outcome j and every support eigenstate
/// i with c_ij > 0 the conditional map must be a scaled isometry, and all
/// such maps for the same j must agree up to a complex factor:
/// M_i'j^dag M_ij = lambda I with |lambda| = c_i'j c_ij.
inline CorrectionAttempt derive_corrections(const BipartiteMixed& resource, const MeasurementBasis& basis, std::size_t d,
                                            double tol = kStructuralTol) {
  detail::check_protocol_dims(resource, basis, d);
  const std::vector<EigenState> eig = support_eigenstates(resource);
  const auto dd = static_cast<double>(d);

  FaithfulnessCertificate cert;
  cert.d = d;
  cert.basis = basis;
  for (const auto& e : eig) {
    cert.weights.push_back(e.weight);
    cert.eigenstates.push_back(e.state);
  }

  for (std::size_t j = 0; j < basis.size(); ++j) {
    std::vector<ComplexMatrix> maps;
    std::vector<double> scales;
    for (const auto& e : eig) {
      maps.push_back(conditional_map(e.state, basis.states[j]));
      const double c2 = (maps.back().adjoint() * maps.back()).trace().real() / dd;
      scales.push_back(std::sqrt(std::max(c2, 0.0)));
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < eig.size(); ++i)
      if (scales[i] * scales[i] > kProbabilityCutoff) active.push_back(i);

    for (std::size_t i : active) {
      if (!isometry_scale(maps[i], tol))
        return {std::nullopt, Violation{i, j, "conditional map is not proportional to an isometry (M^dag M not a multiple of I)"}};
    }
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const std::size_t i0 = active[a];
        const std::size_t i1 = active[b];
        const ComplexMatrix cross = maps[i0].adjoint() * maps[i1];
        const Complex lambda = cross.trace() / dd;
        const double residual = (cross - lambda * ComplexMatrix::Identity(cross.rows(), cross.cols())).norm();
        if (residual > tol || std::abs(std::abs(lambda) - scales[i0] * scales[i1]) > tol)
          return {std::nullopt, Violation{i1, j,
                                          "conditional map disagrees with eigenstate " + std::to_string(i0) +
                                              " on the Bob-side unitary"}};
      }

    double q = 0.0;
    for (std::size_t i : active) q += eig[i].weight * scales[i] * scales[i];
    cert.scales.push_back(scales);
    if (active.empty() || q < kProbabilityCutoff) {
      cert.probabilities.push_back(0.0);
      cert.isometries.emplace_back(std::nullopt);
      cert.corrections.emplace_back(std::nullopt);
      continue;
    }
    const std::size_t ref = detail::dominant_index(cert.weights, scales);
    const ComplexMatrix w = maps[ref] / scales[ref];
    cert.probabilities.push_back(q);
    cert.isometries.emplace_back(w);
    cert.corrections.emplace_back(complete_to_unitary(w));
  }
  return {std::move(cert), std::nullopt};
}

/// Bob's unnormalized state (n x n) after Alice observes `meas` on
/// |phi><phi| (x) rho, computed directly from the density matrix.
inline ComplexMatrix bob_unnormalized_state(const BipartiteMixed& resource, const InputState& input,
                                            const BipartitePure& meas) {
  const Dims dims = resource.dims();
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  // v_b = sum_a conj(chi_ab) phi_a, so (<chi| (x) I)(|phi> (x) |b k>) = v_b |k>.
  const ComplexVector v = coefficient_matrix(meas).adjoint() * input.amplitudes();
  ComplexMatrix sigma = ComplexMatrix::Zero(n, n);
  const ComplexMatrix& rho = resource.density();
  for (Eigen::Index b = 0; b < m; ++b)
    for (Eigen::Index b2 = 0; b2 < m; ++b2) {
      const Complex w = v(b) * std::conj(v(b2));
      if (w == Complex(0.0)) continue;
      sigma += w * rho.block(b * n, b2 * n, n, n);
    }
  return sigma;
}

namespace detail {

inline ComplexVector embed_input(const InputState& input, std::size_t n) {
  ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  e.head(input.amplitudes().size()) = input.amplitudes();
  return e;
}

inline std::vector<TeleportOutcome> run_with_corrections(const BipartiteMixed& resource, const InputState& input,
                                                         const MeasurementBasis& basis,
                                                         const std::vector<std::optional<ComplexMatrix>>& corrections) {
  const std::size_t n = resource.dims().n;
  const ComplexVector target = embed_input(input, n);
  std::vector<TeleportOutcome> out;
  out.reserve(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    TeleportOutcome o;
    o.outcome_index = j;
    const ComplexMatrix sigma = bob_unnormalized_state(resource, input, basis.states[j]);
    const double q = sigma.trace().real();
    if (q < kProbabilityCutoff) {
      o.probability = 0.0;
      o.bob_state_conditional = ComplexMatrix::Zero(sigma.rows(), sigma.cols());
      out.push_back(std::move(o));
      continue;
    }
    o.probability = q;
    o.bob_state_conditional = sigma / q;
    if (corrections[j]) {
      o.correction = *corrections[j];
      const ComplexMatrix corrected = *corrections[j] * o.bob_state_conditional * corrections[j]->adjoint();
      o.fidelity_after_correction = std::clamp(target.dot(corrected * target).real(), 0.0, 1.0);
    } else {
      o.fidelity_after_correction = std::clamp(target.dot(o.bob_state_conditional * target).real(), 0.0, 1.0);
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace detail

/// Runs the protocol with certified corrections. The certificate is
/// re-derived against `resource` first; a mismatch throws StaleCertificate.
inline std::vector<TeleportOutcome> simulate(const BipartiteMixed& resource, const InputState& input,
                                             const FaithfulnessCertificate& cert) {
  if (input.d() != cert.d) throw DimensionError("simulate: input dimension differs from certificate d");
  const CorrectionAttempt fresh = derive_corrections(resource, cert.basis, cert.d);
  if (!fresh) throw StaleCertificate("simulate: certificate does not hold for this resource");
  if (fresh.certificate->corrections.size() != cert.corrections.size())
    throw StaleCertificate("simulate: certificate outcome count differs");
  for (std::size_t j = 0; j < cert.corrections.size(); ++j) {
    const auto& a = fresh.certificate->corrections[j];
    const auto& b = cert.corrections[j];
    if (a.has_value() != b.has_value() ||
        std::abs(fresh.certificate->probabilities[j] - cert.probabilities[j]) > 1e-8)
      throw StaleCertificate("simulate: certificate outcome " + std::to_string(j) + " is stale");
    if (a && distance_up_to_phase(a->topRows(static_cast<Eigen::Index>(cert.d)),
                                  b->topRows(static_cast<Eigen::Index>(cert.d))) > 1e-8)
      throw StaleCertificate("simulate: correction for outcome " + std::to_string(j) + " is stale");
  }
  return detail::run_with_corrections(resource, input, cert.basis, cert.corrections);
}

/// Heuristic corrections for an arbitrary resource: per outcome, the
/// conditional maps of the support eigenstates are phase-aligned to the
/// dominant one, averaged with weights p_i, and replaced by their closest
/// isometry (top-d singular subspace). Not claimed optimal.
inline std::vector<std::optional<ComplexMatrix>> best_effort_corrections(const BipartiteMixed& resource,
                                                                         const MeasurementBasis& basis, std::size_t d) {
  detail::check_protocol_dims(resource, basis, d);
  const std::vector<EigenState> eig = support_eigenstates(resource);
  std::vector<std::optional<ComplexMatrix>> out;
  out.reserve(basis.size());
  for (const auto& meas : basis.states) {
    std::vector<ComplexMatrix> maps;
    std::vector<double> weights;
    std::vector<double> scales;
    for (const auto& e : eig) {
      maps.push_back(conditional_map(e.state, meas));
      weights.push_back(e.weight);
      scales.push_back(maps.back().norm());
    }
    const std::size_t ref = detail::dominant_index(weights, scales);
    double total = 0.0;
    for (std::size_t i = 0; i < eig.size(); ++i) total += weights[i] * scales[i] * scales[i];
    if (total < kProbabilityCutoff) {
      out.emplace_back(std::nullopt);
      continue;
    }
    ComplexMatrix avg = ComplexMatrix::Zero(maps[ref].rows(), maps[ref].cols());
    for (std::size_t i = 0; i < eig.size(); ++i) {
      const Complex overlap = (maps[ref].adjoint() * maps[i]).trace();
      const Complex align = std::abs(overlap) > 1e-15 ? std::conj(overlap) / std::abs(overlap) : Complex(1.0);
      avg += weights[i] * align * maps[i];
    }
    out.emplace_back(complete_to_unitary(closest_isometry(avg)));
  }
  return out;
}

inline std::vector<TeleportOutcome> best_effort_simulate(const BipartiteMixed& resource, const InputState& input,
                                                         const MeasurementBasis& basis, std::size_t d) {
  if (input.d() != d) throw DimensionError("best_effort_simulate: input dimension differs from d");
  return detail::run_with_corrections(resource, input, basis, best_effort_corrections(resource, basis, d));
}

/// sum_j q_j F_j over a list of outcomes.
inline double weighted_fidelity(const std::vector<TeleportOutcome>& outcomes) {
  double f = 0.0;
  for (const auto& o : outcomes)
    if (o.fidelity_after_correction) f += o.probability * *o.fidelity_after_correction;
  return f;
}

namespace detail {

inline double pairwise_sum(const std::vector<double>& values, std::size_t begin, std::size_t end) {
  if (end - begin <= 8) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += values[i];
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(values, begin, mid) + pairwise_sum(values, mid, end);
}

}  // namespace detail

/// Monte Carlo mean of sum_j q_j(phi) F_j(phi) over Haar-random inputs,
/// using best-effort corrections. Trial t draws its input from
/// derive_seed(seed, t); the mean is a pairwise sum, so the result does not
/// depend on evaluation order.
inline double average_fidelity(const BipartiteMixed& resource, const MeasurementBasis& basis, std::size_t d,
                               std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DimensionError("average_fidelity: trials must be >= 1");
  const auto corrections = best_effort_corrections(resource, basis, d);
  std::vector<double> samples(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    const InputState input = random_input(d, derive_seed(seed, t));
    samples[t] = weighted_fidelity(detail::run_with_corrections(resource, input, basis, corrections));
  }
  return detail::pairwise_sum(samples, 0, trials) / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Bob measures first.

struct BobBranch {
  std::size_t projector_index = 0;  // index into the supplied list; == list size for the remainder
  double probability = 0.0;
  ComplexMatrix frame;              // n x r orthonormal basis of the projector's range
  bool pure_max_ent = false;        // collapsed state is a pure maximally entangled state on C^d (x) C^d
  bool faithful = false;
  std::vector<TeleportOutcome> outcomes;  // leaf probabilities include the branch probability
};

struct BobFirstReport {
  std::vector<BobBranch> branches;
  bool faithful = false;

  [[nodiscard]] double total_probability() const {
    double s = 0.0;
    for (const auto& b : branches)
      for (const auto& o : b.outcomes) s += o.probability;
    return s;
  }
};

namespace detail {

/// Orthonormal basis of the range of a projector.
inline ComplexMatrix projector_frame(const ComplexMatrix& p) {
  const SpectralDecomposition sd = eig_hermitian(p, 1e-8);
  Eigen::Index rank = 0;
  while (rank < static_cast<Eigen::Index>(sd.eigenvalues.size()) && sd.eigenvalues[static_cast<std::size_t>(rank)] > 0.5)
    ++rank;
  return sd.eigenvectors.leftCols(rank);
}

/// (I (x) F^dag) rho (I (x) F): restricts Bob's factor to span(F).
inline ComplexMatrix restrict_bob(const ComplexMatrix& rho, Dims dims, const ComplexMatrix& frame) {
  const ComplexMatrix iso = tensor_product(identity(dims.m), frame);
  return iso.adjoint() * rho * iso;
}

}  // namespace detail

/// Bob projects onto the ranges of `bob_projectors` (and the remainder),
/// then Alice runs the standard protocol with the generalized Bell basis on
/// the collapsed state. Each branch is certified when its collapsed state is
/// a pure maximally entangled state on C^d (x) C^d; otherwise best-effort
/// corrections are used and the branch is flagged unfaithful.
inline BobFirstReport bob_first_simulate(const BipartiteMixed& resource, const std::vector<ComplexMatrix>& bob_projectors,
                                         const InputState& input, std::size_t d) {
  const Dims dims = resource.dims();
  if (dims.m != d) throw DimensionError("bob_first_simulate: Alice's resource dimension must equal d");
  if (input.d() != d) throw DimensionError("bob_first_simulate: input dimension differs from d");
  const auto n = static_cast<Eigen::Index>(dims.n);
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (std::size_t x = 0; x < bob_projectors.size(); ++x) {
    const ComplexMatrix& p = bob_projectors[x];
    if (p.rows() != n || p.cols() != n) throw DimensionError("bob_first_simulate: projector has wrong size");
    if (hermiticity_error(p) > 1e-8 || (p * p - p).norm() > 1e-8)
      throw InvariantError("bob_first_simulate: operator " + std::to_string(x) + " is not a projector");
    for (std::size_t y = 0; y < x; ++y)
      if ((p * bob_projectors[y]).norm() > 1e-8) throw InvariantError("bob_first_simulate: projectors are not orthogonal");
    sum += p;
  }
  const ComplexMatrix remainder = identity(dims.n) - sum;

  BobFirstReport report;
  report.faithful = true;
  const MeasurementBasis bell = bell_basis(d);
  for (std::size_t x = 0; x <= bob_projectors.size(); ++x) {
    const bool is_remainder = x == bob_projectors.size();
    const ComplexMatrix& proj = is_remainder ? remainder : bob_projectors[x];
    BobBranch branch;
    branch.projector_index = x;
    branch.frame = detail::projector_frame(proj);
    if (branch.frame.cols() == 0) {
      if (!is_remainder) report.branches.push_back(std::move(branch));
      continue;
    }
    const ComplexMatrix restricted = detail::restrict_bob(resource.density(), dims, branch.frame);
    branch.probability = restricted.trace().real();
    if (branch.probability < kProbabilityCutoff) {
      branch.probability = 0.0;
      branch.faithful = true;
      report.branches.push_back(std::move(branch));
      continue;
    }
    const auto width = static_cast<std::size_t>(branch.frame.cols());
    if (width < d) {
      // Not enough room on Bob's side to receive the state.
      branch.faithful = false;
      report.faithful = false;
      TeleportOutcome leaf;
      leaf.outcome_index = 0;
      leaf.probability = branch.probability;
      leaf.bob_state_conditional = ComplexMatrix::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width));
      branch.outcomes.push_back(std::move(leaf));
      report.branches.push_back(std::move(branch));
      continue;
    }
    const BipartiteMixed collapsed({d, width}, restricted / branch.probability);
    if (width == d) {
      const std::vector<EigenState> eig = support_eigenstates(collapsed);
      branch.pure_max_ent = eig.size() == 1 && is_maximally_entangled(eig.front().state, d);
    }
    std::vector<TeleportOutcome> leaves;
    if (branch.pure_max_ent) {
      const CorrectionAttempt attempt = derive_corrections(collapsed, bell, d);
      branch.faithful = static_cast<bool>(attempt);
      leaves = attempt ? simulate(collapsed, input, *attempt.certificate) : best_effort_simulate(collapsed, input, bell, d);
    } else {
      const MeasurementBasis alice = bell_basis(d);
      leaves = best_effort_simulate(collapsed, input, alice, d);
    }
    for (auto& leaf : leaves) {
      leaf.probability *= branch.probability;
      if (leaf.fidelity_after_correction && *leaf.fidelity_after_correction < 1.0 - kStructuralTol) branch.faithful = false;
    }
    branch.outcomes = std::move(leaves);
    if (!branch.faithful) report.faithful = false;
    report.branches.push_back(std::move(branch));
  }
  return report;
}

}  // namespace qtele
