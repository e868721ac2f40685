#pragma once

// Named resources used by the demos, the CLI fixtures and the tests.

#include <cmath>

#include "qtele/channels.hpp"

namespace qtele::demos {

inline BipartitePure phi_plus() {
  ComplexVector v = ComplexVector::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return {{2, 2}, v};
}

/// (1/sqrt d) sum_{i<d} |ii> on C^m (x) C^n.
inline BipartitePure standard_max_ent(std::size_t d, std::size_t m, std::size_t n) {
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < d; ++i)
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(static_cast<double>(d));
  return BipartitePure::from_coefficients(a);
}

/// |psi0> = (|00> + |11> + |22> + |33>)/2 on C^4 (x) C^4.
inline BipartitePure psi0() { return standard_max_ent(4, 4, 4); }

/// Kraus pair A1 = |0><0| + |1><1|, A2 = |2><2| + |3><3| on C^4.
inline KrausChannel block_dephasing_channel() {
  ComplexMatrix a1 = ComplexMatrix::Zero(4, 4);
  ComplexMatrix a2 = ComplexMatrix::Zero(4, 4);
  a1(0, 0) = a1(1, 1) = 1.0;
  a2(2, 2) = a2(3, 3) = 1.0;
  return {4, {a1, a2}};
}

/// rho0 = 1/2 |psi1+><psi1+| + 1/2 |psi2+><psi2+| on C^4 (x) C^2 with
/// |psi1+> = (|00> + |11>)/sqrt2 and |psi2+> = (|20> + |31>)/sqrt2.
inline BipartiteMixed rho0() {
  ComplexMatrix a1 = ComplexMatrix::Zero(4, 2);
  ComplexMatrix a2 = ComplexMatrix::Zero(4, 2);
  a1(0, 0) = a1(1, 1) = 1.0 / std::sqrt(2.0);
  a2(2, 0) = a2(3, 1) = 1.0 / std::sqrt(2.0);
  return BipartiteMixed::from_ensemble({0.5, 0.5}, {BipartitePure::from_coefficients(a1), BipartitePure::from_coefficients(a2)});
}

struct Rho0Pipeline {
  BipartitePure psi0;
  BipartiteMixed after_channel;  // C^4 (x) C^4
  BipartiteMixed compressed;     // C^4 (x) C^2
};

/// psi0 -> block dephasing on Bob's factor -> Bob discards the block label.
inline Rho0Pipeline rho0_pipeline() {
  const BipartitePure start = psi0();
  BipartiteMixed noisy = apply_one_sided(block_dephasing_channel(), BipartiteMixed(start), Side::B);
  BipartiteMixed compressed = discard_bob_label(noisy, 2);
  return {start, std::move(noisy), std::move(compressed)};
}

/// sqrt(a)|eta> + sqrt(1-a)|xi> on C^5 (x) C^5 with |eta> = (|00>+|11>)/sqrt2
/// and |xi> = (|22>+|33>+|44>)/sqrt3.
inline BipartitePure five_level(double a) {
  if (!(a > 0.0 && a < 1.0)) throw InvariantError("five_level: a must lie in (0, 1)");
  ComplexMatrix c = ComplexMatrix::Zero(5, 5);
  c(0, 0) = c(1, 1) = std::sqrt(a / 2.0);
  c(2, 2) = c(3, 3) = c(4, 4) = std::sqrt((1.0 - a) / 3.0);
  return BipartitePure::from_coefficients(c);
}

/// p1 |psi1><psi1| + (1-p1) |psi2><psi2| on C^7 (x) C^5 with
/// |psi1> = (|00>+|11>)/2 + (|22>+|33>+|44>)/sqrt6 and
/// |psi2> = (|00>+|11>)/2 + (|52>+|63>)/2.
inline BipartiteMixed block_superposition_mixture(double p1) {
  ComplexMatrix a1 = ComplexMatrix::Zero(7, 5);
  ComplexMatrix a2 = ComplexMatrix::Zero(7, 5);
  a1(0, 0) = a1(1, 1) = 0.5;
  a1(2, 2) = a1(3, 3) = a1(4, 4) = 1.0 / std::sqrt(6.0);
  a2(0, 0) = a2(1, 1) = 0.5;
  a2(5, 2) = a2(6, 3) = 0.5;
  return BipartiteMixed::from_ensemble({p1, 1.0 - p1},
                                       {BipartitePure::from_coefficients(a1), BipartitePure::from_coefficients(a2)});
}

}  // namespace qtele::demos
