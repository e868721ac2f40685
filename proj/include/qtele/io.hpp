#pragma once

// JSON state files. Complex entries are [re, im] pairs.
//
//   {"kind": "pure",    "dims": [m, n], "data": [[re, im], ...]}       amplitudes, index i*n + j
//   {"kind": "mixed",   "dims": [m, n], "data": [[re, im], ...]}       row-major density matrix
//   {"kind": "input",   "dims": [d],    "data": [[re, im], ...]}
//   {"kind": "channel", "dims": [dim],  "data": [[[re, im], ...], ...]} row-major Kraus operators
//   {"kind": "basis",   "dims": [d, m], "data": [[[re, im], ...], ...]} measurement states on C^d (x) C^m
//
// Optional "name" and "description" strings are carried through.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qtele/channels.hpp"

namespace qtele::io {

using json = nlohmann::json;

/// Looser than the internal tolerances: files are edited by hand.
inline constexpr double kFileTol = 1e-6;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Metadata {
  std::string name;
  std::string description;
};

using Payload = std::variant<BipartitePure, BipartiteMixed, InputState, KrausChannel, MeasurementBasis>;

struct StateFile {
  Metadata meta;
  Payload payload;
  std::vector<std::string> warnings;  // renormalizations applied on load

  [[nodiscard]] std::string kind() const {
    static const char* names[] = {"pure", "mixed", "input", "channel", "basis"};
    return names[payload.index()];
  }
};

// ---------------------------------------------------------------------------
// Encoding helpers

inline json encode(Complex z) { return json::array({z.real(), z.imag()}); }

inline json encode(const ComplexVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(encode(v(i)));
  return a;
}

/// Row-major flattening.
inline json encode_flat(const ComplexMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(encode(m(r, c)));
  return a;
}

/// Nested rows, for reports.
inline json encode_rows(const ComplexMatrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(encode(m(r, c)));
    a.push_back(std::move(row));
  }
  return a;
}

inline Complex decode_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw FormatError(where + ": complex entries must be [re, im] number pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ComplexVector decode_vector(const json& j, std::size_t expected, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of [re, im] pairs");
  if (j.size() != expected)
    throw FormatError(where + ": expected " + std::to_string(expected) + " entries, found " + std::to_string(j.size()));
  ComplexVector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) v(static_cast<Eigen::Index>(i)) = decode_complex(j[i], where);
  if (!all_finite(v)) throw FormatError(where + ": non-finite entry");
  return v;
}

inline ComplexMatrix decode_matrix(const json& j, std::size_t rows, std::size_t cols, const std::string& where) {
  const ComplexVector flat = decode_vector(j, rows * cols, where);
  ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat(static_cast<Eigen::Index>(r * cols + c));
  return m;
}

// ---------------------------------------------------------------------------
// Loading

namespace detail {

inline std::vector<std::size_t> read_dims(const json& doc, std::size_t count, const std::string& kind) {
  if (!doc.contains("dims") || !doc["dims"].is_array() || doc["dims"].size() != count)
    throw FormatError(kind + " file: \"dims\" must be an array of " + std::to_string(count) + " positive integers");
  std::vector<std::size_t> dims;
  for (const auto& x : doc["dims"]) {
    if (!x.is_number_integer() || x.get<long long>() <= 0)
      throw FormatError(kind + " file: \"dims\" must hold positive integers");
    dims.push_back(x.get<std::size_t>());
  }
  return dims;
}

inline ComplexVector normalized_vector(ComplexVector v, const std::string& what, std::vector<std::string>& warnings) {
  const double norm = v.norm();
  if (std::abs(norm - 1.0) > kFileTol)
    throw FormatError(what + ": norm " + std::to_string(norm) + " differs from 1 by more than 1e-6");
  if (std::abs(norm - 1.0) > kResidualTol) warnings.push_back(what + ": renormalized (norm was " + std::to_string(norm) + ")");
  return v / norm;
}

inline BipartiteMixed load_density(const ComplexMatrix& raw, Dims dims, std::vector<std::string>& warnings) {
  const double herm = hermiticity_error(raw);
  if (herm > kFileTol) throw FormatError("mixed state: density matrix is not Hermitian (error " + std::to_string(herm) + ")");
  ComplexMatrix rho = 0.5 * (raw + raw.adjoint());
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > kFileTol) throw FormatError("mixed state: trace " + std::to_string(tr) + " differs from 1 by more than 1e-6");
  const SpectralDecomposition sd = eig_hermitian(rho, kFileTol);
  const double low = *std::min_element(sd.eigenvalues.begin(), sd.eigenvalues.end());
  if (low < -kFileTol) throw FormatError("mixed state: density matrix has negative eigenvalue " + std::to_string(low));
  if (low < -kResidualTol) {
    ComplexVector clipped(static_cast<Eigen::Index>(sd.eigenvalues.size()));
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) clipped(static_cast<Eigen::Index>(i)) = std::max(sd.eigenvalues[i], 0.0);
    rho = sd.eigenvectors * clipped.asDiagonal() * sd.eigenvectors.adjoint();
    warnings.push_back("mixed state: clipped negative eigenvalues (min was " + std::to_string(low) + ")");
  }
  const double tr2 = rho.trace().real();
  if (std::abs(tr2 - 1.0) > kResidualTol) warnings.push_back("mixed state: renormalized trace (was " + std::to_string(tr2) + ")");
  rho /= tr2;
  return {dims, rho};
}

inline KrausChannel load_channel(std::vector<ComplexMatrix> ops, std::size_t dim, std::vector<std::string>& warnings) {
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (const auto& a : ops) sum += a.adjoint() * a;
  const double err = (sum - identity(dim)).norm();
  if (err > kFileTol) throw FormatError("channel: sum A^dag A differs from identity by " + std::to_string(err));
  if (err > kResidualTol) {
    // S^{-1/2} restores completeness exactly: sum (A S^{-1/2})^dag (A S^{-1/2}) = I.
    const SpectralDecomposition sd = eig_hermitian(sum, kFileTol);
    ComplexVector scale(static_cast<Eigen::Index>(sd.eigenvalues.size()));
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) scale(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(sd.eigenvalues[i]);
    const ComplexMatrix inv_sqrt = sd.eigenvectors * scale.asDiagonal() * sd.eigenvectors.adjoint();
    for (auto& a : ops) a = (a * inv_sqrt).eval();
    warnings.push_back("channel: rescaled Kraus operators to restore completeness (error was " + std::to_string(err) + ")");
  }
  return {dim, std::move(ops)};
}

}  // namespace detail

inline StateFile parse(const json& doc) {
  if (!doc.is_object()) throw FormatError("state file: top level must be an object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw FormatError("state file: missing string field \"kind\"");
  if (!doc.contains("data")) throw FormatError("state file: missing field \"data\"");
  const std::string kind = doc["kind"].get<std::string>();
  const json& data = doc["data"];

  Metadata meta;
  if (doc.contains("name") && doc["name"].is_string()) meta.name = doc["name"].get<std::string>();
  if (doc.contains("description") && doc["description"].is_string()) meta.description = doc["description"].get<std::string>();
  std::vector<std::string> warnings;

  if (kind == "pure") {
    const auto dims = detail::read_dims(doc, 2, kind);
    ComplexVector v = detail::normalized_vector(decode_vector(data, dims[0] * dims[1], "pure state"), "pure state", warnings);
    return {meta, BipartitePure({dims[0], dims[1]}, std::move(v)), warnings};
  }
  if (kind == "mixed") {
    const auto dims = detail::read_dims(doc, 2, kind);
    const std::size_t total = dims[0] * dims[1];
    BipartiteMixed rho = detail::load_density(decode_matrix(data, total, total, "mixed state"), {dims[0], dims[1]}, warnings);
    return {meta, std::move(rho), warnings};
  }
  if (kind == "input") {
    const auto dims = detail::read_dims(doc, 1, kind);
    ComplexVector v = detail::normalized_vector(decode_vector(data, dims[0], "input state"), "input state", warnings);
    return {meta, InputState(std::move(v)), warnings};
  }
  if (kind == "channel") {
    const auto dims = detail::read_dims(doc, 1, kind);
    if (!data.is_array() || data.empty()) throw FormatError("channel: \"data\" must be a non-empty list of Kraus operators");
    std::vector<ComplexMatrix> ops;
    for (std::size_t k = 0; k < data.size(); ++k)
      ops.push_back(decode_matrix(data[k], dims[0], dims[0], "Kraus operator " + std::to_string(k)));
    return {meta, detail::load_channel(std::move(ops), dims[0], warnings), warnings};
  }
  if (kind == "basis") {
    const auto dims = detail::read_dims(doc, 2, kind);
    if (!data.is_array() || data.empty()) throw FormatError("basis: \"data\" must be a non-empty list of states");
    MeasurementBasis b{dims[0], dims[1], {}};
    for (std::size_t k = 0; k < data.size(); ++k) {
      const std::string what = "basis state " + std::to_string(k);
      b.states.emplace_back(Dims{dims[0], dims[1]},
                            detail::normalized_vector(decode_vector(data[k], dims[0] * dims[1], what), what, warnings));
    }
    const BasisValidation check = validate_basis(b, kFileTol);
    if (!check.orthonormal) throw FormatError("basis: states are not orthonormal");
    if (!check.complete) throw FormatError("basis: states do not span C^d (x) C^m");
    return {meta, std::move(b), warnings};
  }
  throw FormatError("state file: unknown kind \"" + kind + "\" (expected pure, mixed, input, channel or basis)");
}

inline StateFile load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  try {
    return parse(doc);
  } catch (const std::invalid_argument& e) {
    // Library invariants (DimensionError, InvariantError) surface as format errors here.
    throw FormatError(path + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

/// Pure or mixed file as a resource density.
inline BipartiteMixed as_resource(const StateFile& f) {
  if (const auto* p = std::get_if<BipartitePure>(&f.payload)) return BipartiteMixed(*p);
  if (const auto* r = std::get_if<BipartiteMixed>(&f.payload)) return *r;
  throw FormatError("expected a pure or mixed resource state, found kind \"" + f.kind() + "\"");
}

// ---------------------------------------------------------------------------
// Saving

inline json with_meta(json doc, const Metadata& meta) {
  if (!meta.name.empty()) doc["name"] = meta.name;
  if (!meta.description.empty()) doc["description"] = meta.description;
  return doc;
}

inline json to_json(const BipartitePure& s, const Metadata& meta = {}) {
  return with_meta({{"kind", "pure"}, {"dims", {s.dims().m, s.dims().n}}, {"data", encode(s.amplitudes())}}, meta);
}

inline json to_json(const BipartiteMixed& r, const Metadata& meta = {}) {
  return with_meta({{"kind", "mixed"}, {"dims", {r.dims().m, r.dims().n}}, {"data", encode_flat(r.density())}}, meta);
}

inline json to_json(const InputState& s, const Metadata& meta = {}) {
  return with_meta({{"kind", "input"}, {"dims", {s.d()}}, {"data", encode(s.amplitudes())}}, meta);
}

inline json to_json(const KrausChannel& ch, const Metadata& meta = {}) {
  json ops = json::array();
  for (const auto& a : ch.operators()) ops.push_back(encode_flat(a));
  return with_meta({{"kind", "channel"}, {"dims", {ch.dim()}}, {"data", ops}}, meta);
}

inline json to_json(const MeasurementBasis& b, const Metadata& meta = {}) {
  json states = json::array();
  for (const auto& s : b.states) states.push_back(encode(s.amplitudes()));
  return with_meta({{"kind", "basis"}, {"dims", {b.d, b.m}}, {"data", states}}, meta);
}

template <class T>
void save(const T& value, const std::string& path, const Metadata& meta = {}) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  // dump() prints shortest round-trip decimals, so save/load is exact.
  out << to_json(value, meta).dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path);
}

}  // namespace qtele::io
