#pragma once

// Independent reference computations for the tests. Everything here is
// written with explicit index loops over the full Hilbert space and avoids
// the library's helpers (tensor_product, partial_trace, conditional_map).

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Trace out the second factor (keep_first) or the first one.
inline Mat partial_trace(const Mat& rho, int m, int n, bool keep_first) {
  if (keep_first) {
    Mat out = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int x = 0; x < n; ++x) out(a, b) += rho(a * n + x, b * n + x);
    return out;
  }
  Mat out = Mat::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int a = 0; a < m; ++a) out(x, y) += rho(a * n + x, a * n + y);
  return out;
}

/// Bob's unnormalized state after Alice projects input (C^d) and her share
/// (C^m) onto `meas` (vector on C^d (x) C^m), for a resource density on
/// C^m (x) C^n. Built from the full d*m*n state space.
inline Mat teleport_bob_state(const Mat& resource, int m, int n, const Vec& input, const Vec& meas) {
  const int d = static_cast<int>(input.size());
  const Mat full = kron(input * input.adjoint(), resource);  // C^d (x) C^m (x) C^n
  Mat out = Mat::Zero(n, n);
  // <meas| (x) I_n applied on both sides.
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      Complex acc = 0.0;
      for (int c = 0; c < d; ++c)
        for (int a = 0; a < m; ++a)
          for (int c2 = 0; c2 < d; ++c2)
            for (int a2 = 0; a2 < m; ++a2)
              acc += std::conj(meas(c * m + a)) * full((c * m + a) * n + x, (c2 * m + a2) * n + y) * meas(c2 * m + a2);
      out(x, y) = acc;
    }
  return out;
}

/// <target| sigma |target> / tr(sigma), target padded with zeros to sigma's size.
inline double fidelity(const Mat& sigma, const Vec& target) {
  Vec t = Vec::Zero(sigma.rows());
  t.head(target.size()) = target;
  return (t.adjoint() * sigma * t)(0, 0).real() / sigma.trace().real();
}

/// Eigenvalues of a 2x2 Hermitian matrix, descending, in closed form.
inline std::pair<double, double> eig2(const Mat& h) {
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const double off = std::abs(h(0, 1));
  const double mid = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + off * off);
  return {mid + rad, mid - rad};
}

/// Shannon entropy in bits of a probability vector.
inline double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

/// Schmidt coefficients as square roots of the eigenvalues of A A^dag,
/// descending.
inline std::vector<double> schmidt_coefficients(const Vec& amps, int m, int n) {
  Mat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = amps(i * n + j);
  Eigen::SelfAdjointEigenSolver<Mat> es(a * a.adjoint());
  std::vector<double> out;
  for (Eigen::Index k = es.eigenvalues().size() - 1; k >= 0; --k) out.push_back(std::sqrt(std::max(es.eigenvalues()(k), 0.0)));
  return out;
}

/// Average of f over the Bloch sphere, midpoint rule in (theta, phi) with
/// the sin(theta) weight. f receives the qubit amplitudes.
inline double bloch_average(const std::function<double(const Vec&)>& f, int theta_steps = 60, int phi_steps = 60) {
  double acc = 0.0;
  double weight = 0.0;
  for (int i = 0; i < theta_steps; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / theta_steps;
    for (int j = 0; j < phi_steps; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / phi_steps;
      Vec v(2);
      v(0) = std::cos(theta / 2.0);
      v(1) = std::polar(std::sin(theta / 2.0), phi);
      acc += std::sin(theta) * f(v);
      weight += std::sin(theta);
    }
  }
  return acc / weight;
}

/// Computational-basis frame spanning the listed indices.
inline Mat index_frame(int dim, const std::vector<int>& indices) {
  Mat f = Mat::Zero(dim, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) f(indices[k], static_cast<Eigen::Index>(k)) = 1.0;
  return f;
}

inline Mat projector(const Mat& frame) { return frame * frame.adjoint(); }

}  // namespace oracle
