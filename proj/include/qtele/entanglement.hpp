#pragma once

// Entanglement of formation in bits: exact for pure states and for detected
// mixed maximally entangled states, an upper bound from the spectral
// decomposition otherwise.

#include <cmath>
#include <optional>

#include "qtele/structure.hpp"

namespace qtele {

struct EntanglementReport {
  double value_bits = 0.0;
  double normalized = 0.0;  // value_bits / log2(d); 0 when d < 2
  bool exact = false;
};

namespace detail {

inline EntanglementReport make_report(double bits, std::size_t d, bool exact) {
  const double unit = d >= 2 ? std::log2(static_cast<double>(d)) : 0.0;
  return {bits, unit > 0.0 ? bits / unit : 0.0, exact};
}

}  // namespace detail

/// Entropy of the Schmidt spectrum; coefficients <= 1e-8 count as zero.
inline double entropy_bits(const BipartitePure& s) {
  double e = 0.0;
  for (double c : schmidt(s).coefficients) {
    if (c <= kSchmidtFloor) continue;
    const double p = c * c;
    e -= p * std::log2(p);
  }
  return std::max(e, 0.0);
}

/// Pure-state entanglement of formation, normalized against log2(d). With
/// d == 0 the smaller factor dimension is used.
inline EntanglementReport eof_pure(const BipartitePure& s, std::size_t d = 0) {
  if (d == 0) d = std::min(s.dims().m, s.dims().n);
  return detail::make_report(entropy_bits(s), d, true);
}

/// For a detected mixed maximally entangled structure (on either side) the
/// value is log2(d) exactly. Otherwise the spectral-decomposition average
/// sum_i p_i E(psi_i), which bounds the infimum from above.
inline EntanglementReport eof_mixed_structured(const BipartiteMixed& resource, std::size_t d,
                                               std::optional<BlockStructure> structure = std::nullopt) {
  const Dims dims = resource.dims();
  if (!structure) {
    if (dims.n == d && dims.m >= d)
      structure = decide_mixed_max_ent(resource, d);
    else if (dims.m == d && dims.n >= d)
      structure = decide_mixed_max_ent(swap_factors(resource), d);
  }
  if (structure) return detail::make_report(std::log2(static_cast<double>(d)), d, true);

  const std::vector<EigenState> eig = support_eigenstates(resource);
  if (eig.size() == 1) return detail::make_report(entropy_bits(eig.front().state), d, true);
  double bound = 0.0;
  double total = 0.0;
  for (const auto& e : eig) {
    bound += e.weight * entropy_bits(e.state);
    total += e.weight;
  }
  return detail::make_report(bound / total, d, false);
}

/// For resources on C^m (x) C^d: capability is equivalent to an exact
/// entanglement of formation of log2(d).
inline bool meets_log_d_criterion(const BipartiteMixed& resource, std::size_t d) {
  if (resource.dims().n != d) throw DimensionError("meets_log_d_criterion: Bob's dimension must equal d");
  const EntanglementReport r = eof_mixed_structured(resource, d);
  return r.exact && std::abs(r.value_bits - std::log2(static_cast<double>(d))) <= kStructuralTol;
}

}  // namespace qtele
