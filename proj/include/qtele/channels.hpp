#pragma once

// Kraus channels acting on one factor of a bipartite state.

#include <cstdint>
#include <string>
#include <vector>

#include "qtele/classify.hpp"

namespace qtele {

class KrausChannel {
 public:
  KrausChannel(std::size_t dim, std::vector<ComplexMatrix> operators) : dim_(dim), operators_(std::move(operators)) {
    if (dim_ == 0 || operators_.empty()) throw DimensionError("KrausChannel: need a positive dimension and at least one operator");
    const auto n = static_cast<Eigen::Index>(dim_);
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (const auto& a : operators_) {
      if (a.rows() != n || a.cols() != n) throw DimensionError("KrausChannel: operator is not " + std::to_string(dim_) + "x" + std::to_string(dim_));
      if (!all_finite(a)) throw InvariantError("KrausChannel: non-finite entry");
      sum += a.adjoint() * a;
    }
    const double err = (sum - identity(dim_)).norm();
    if (err > kStructuralTol)
      throw InvariantError("KrausChannel: sum A^dag A differs from identity by " + std::to_string(err));
  }

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] const std::vector<ComplexMatrix>& operators() const { return operators_; }

 private:
  std::size_t dim_;
  std::vector<ComplexMatrix> operators_;
};

/// sum_i (A_i (x) I) rho (A_i (x) I)^dag, or I (x) A_i for side B.
inline BipartiteMixed apply_one_sided(const KrausChannel& ch, const BipartiteMixed& resource, Side side) {
  const Dims dims = resource.dims();
  const std::size_t target = side == Side::A ? dims.m : dims.n;
  if (ch.dim() != target)
    throw DimensionError("apply_one_sided: channel acts on C^" + std::to_string(ch.dim()) + " but factor has dimension " +
                         std::to_string(target));
  const auto total = static_cast<Eigen::Index>(dims.total());
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (const auto& a : ch.operators()) {
    const ComplexMatrix k = side == Side::A ? tensor_product(a, identity(dims.n)) : tensor_product(identity(dims.m), a);
    out += k * resource.density() * k.adjoint();
  }
  // Absorb rounding so the result passes the state invariants.
  out = 0.5 * (out + out.adjoint()).eval();
  out /= out.trace().real();
  return {dims, out};
}

/// Bob's factor C^n viewed as C^label (x) C^(n/label) with index
/// j = label_index * (n/label) + rest; the label factor is traced out.
/// This is a local operation on Bob's side only.
inline BipartiteMixed discard_bob_label(const BipartiteMixed& resource, std::size_t label_dim) {
  const Dims dims = resource.dims();
  if (label_dim == 0 || dims.n % label_dim != 0)
    throw DimensionError("discard_bob_label: label dimension must divide Bob's dimension");
  const std::size_t rest = dims.n / label_dim;
  // Order the factors as (Alice (x) label) (x) rest and trace the label out via a swap.
  const ComplexMatrix& rho = resource.density();
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto l = static_cast<Eigen::Index>(label_dim);
  const auto r = static_cast<Eigen::Index>(rest);
  ComplexMatrix out = ComplexMatrix::Zero(m * r, m * r);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b)
      for (Eigen::Index x = 0; x < r; ++x)
        for (Eigen::Index y = 0; y < r; ++y)
          for (Eigen::Index lab = 0; lab < l; ++lab)
            out(a * r + x, b * r + y) += rho(a * l * r + lab * r + x, b * l * r + lab * r + y);
  return {{dims.m, rest}, out};
}

/// Restricts a factor onto the span of `frame` (orthonormal columns). The
/// state must already live inside that span; throws if probability leaks.
inline BipartiteMixed compress_support(const BipartiteMixed& resource, const ComplexMatrix& frame, Side side) {
  const Dims dims = resource.dims();
  const std::size_t dim = side == Side::A ? dims.m : dims.n;
  if (static_cast<std::size_t>(frame.rows()) != dim) throw DimensionError("compress_support: frame has wrong row count");
  const ComplexMatrix iso =
      side == Side::A ? tensor_product(frame, identity(dims.n)) : tensor_product(identity(dims.m), frame);
  const ComplexMatrix out = iso.adjoint() * resource.density() * iso;
  if (std::abs(out.trace().real() - 1.0) > kStructuralTol)
    throw InvariantError("compress_support: state has weight outside the frame");
  const auto width = static_cast<std::size_t>(frame.cols());
  return {side == Side::A ? Dims{width, dims.n} : Dims{dims.m, width}, out};
}

inline Classification teleportation_capability_after_channel(const KrausChannel& ch, const BipartiteMixed& resource,
                                                             Side side, std::size_t d,
                                                             ProtocolVariant protocol = ProtocolVariant::AliceFirst) {
  return classify(apply_one_sided(ch, resource, side), d, protocol);
}

inline KrausChannel identity_channel(std::size_t dim) { return {dim, {identity(dim)}}; }

/// Qubit depolarizing channel with strength p: rho -> (1-p) rho + p I/2.
inline KrausChannel depolarizing_qubit(double p) {
  ComplexMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  const double a = std::sqrt(1.0 - 3.0 * p / 4.0);
  const double b = std::sqrt(p / 4.0);
  return {2, {a * identity(2), b * x, b * y, b * z}};
}

/// Random channel: a Haar isometry C^dim -> C^(count*dim) cut into count blocks.
inline KrausChannel random_channel(std::size_t dim, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  const ComplexMatrix u = random_unitary(dim * count, rng);
  const ComplexMatrix iso = u.leftCols(static_cast<Eigen::Index>(dim));
  std::vector<ComplexMatrix> ops;
  for (std::size_t k = 0; k < count; ++k)
    ops.push_back(iso.middleRows(static_cast<Eigen::Index>(k * dim), static_cast<Eigen::Index>(dim)));
  return {dim, std::move(ops)};
}

}  // namespace qtele
