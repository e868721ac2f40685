#pragma once

// Command implementations behind the `qtele` executable. Each command
// returns a Result holding its exit code, a JSON report and the text form.
//
// Exit codes: 0 capable / success, 1 I/O or argument error, 2 not capable
// (or a simulation that could not be made faithful), 3 unknown.

#include <chrono>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtele/checks.hpp"
#include "qtele/demos.hpp"
#include "qtele/entanglement.hpp"
#include "qtele/io.hpp"

namespace qtele::cli {

using io::json;

enum ExitCode : int { kOk = 0, kError = 1, kNotCapable = 2, kUnknown = 3 };

struct Result {
  int exit_code = kOk;
  json report;
  std::string text;
};

struct ClassifyOptions {
  std::string state;
  std::size_t d = 2;
  ProtocolVariant protocol = ProtocolVariant::AliceFirst;
};

struct SimulateOptions {
  std::string state;
  std::size_t d = 2;
  std::optional<std::string> input;
  std::optional<std::size_t> random_inputs;
  std::optional<std::uint64_t> seed;
  std::string basis = "auto";
  ProtocolVariant protocol = ProtocolVariant::AliceFirst;
};

struct EntanglementOptions {
  std::string state;
  std::size_t d = 2;
};

struct DemoOptions {
  std::string name;
  double a = 0.5;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> channel;
  std::optional<std::string> state;
  Side side = Side::B;
  std::size_t d = 2;
};

struct CheckOptions {
  std::size_t d = 2;
  std::size_t samples = 50;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string num(double x, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

inline std::string protocol_name(ProtocolVariant p) {
  return p == ProtocolVariant::AliceFirst ? "alice-first" : "bob-first";
}

inline int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Capable: return kOk;
    case Verdict::NotCapable: return kNotCapable;
    case Verdict::Unknown: return kUnknown;
  }
  return kError;
}

/// "a|i> + b|j>" over entries above 1e-9.
inline std::string ket_string(const ComplexVector& v) {
  std::ostringstream os;
  bool first = true;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Complex z = v(i);
    if (std::abs(z) <= 1e-9) continue;
    if (!first) os << " + ";
    first = false;
    if (std::abs(z - Complex(1.0, 0.0)) > 1e-9) {
      if (std::abs(z.imag()) <= 1e-9)
        os << num(z.real(), 4);
      else if (std::abs(z.real()) <= 1e-9)
        os << num(z.imag(), 4) << "i";
      else
        os << "(" << num(z.real(), 4) << (z.imag() < 0 ? "-" : "+") << num(std::abs(z.imag()), 4) << "i)";
    }
    os << "|" << i << ">";
  }
  return first ? "0" : os.str();
}

inline json frame_json(const ComplexMatrix& frame) {
  json cols = json::array();
  for (Eigen::Index c = 0; c < frame.cols(); ++c) cols.push_back(io::encode(ComplexVector(frame.col(c))));
  return cols;
}

inline std::string frame_string(const ComplexMatrix& frame) {
  std::string s = "span{";
  for (Eigen::Index c = 0; c < frame.cols(); ++c) {
    if (c > 0) s += ", ";
    s += ket_string(frame.col(c));
  }
  return s + "}";
}

/// Every report carries the same top-level keys; commands add their own.
inline json skeleton(const std::string& command) {
  return {{"command", command},    {"verdict", nullptr},      {"kind", nullptr},   {"reason", nullptr},
          {"outcomes", json::array()}, {"witness", nullptr}, {"entanglement", nullptr}, {"warnings", json::array()},
          {"wall_time_s", 0.0}};
}

inline json witness_json(const Classification& c) {
  if (c.verdict != Verdict::Capable) return nullptr;
  json w = {{"side", c.bob_side ? "bob" : "alice"}, {"blocks", json::array()}};
  if (!c.class_nine.empty()) {
    for (const auto& b : c.class_nine)
      w["blocks"].push_back({{"weight", b.weight}, {"dim", b.dim}, {"basis_vectors", frame_json(b.alice_frame)}});
  } else if (c.structure) {
    for (std::size_t x = 0; x < c.structure->k(); ++x)
      w["blocks"].push_back({{"weight", c.structure->weights[x]},
                             {"dim", c.structure->alice_frames[x].cols()},
                             {"basis_vectors", frame_json(c.structure->alice_frames[x])}});
  }
  if (c.certificate) w["measurement_basis_size"] = c.certificate->basis.size();
  if (!c.bob_projectors.empty()) w["bob_projector_count"] = c.bob_projectors.size();
  w["superposition_closed"] = c.superposition_closed ? json(*c.superposition_closed) : json(nullptr);
  return w;
}

inline std::string witness_text(const Classification& c) {
  std::ostringstream os;
  const char* label = c.bob_side ? "Bob block" : "block";
  if (!c.class_nine.empty()) {
    for (std::size_t p = 0; p < c.class_nine.size(); ++p)
      os << "  " << label << " " << p + 1 << ": weight " << num(c.class_nine[p].weight) << ", dim " << c.class_nine[p].dim
         << ", " << frame_string(c.class_nine[p].alice_frame) << "\n";
  } else if (c.structure) {
    for (std::size_t x = 0; x < c.structure->k(); ++x)
      os << "  " << label << " " << x + 1 << ": weight " << num(c.structure->weights[x]) << ", "
         << frame_string(c.structure->alice_frames[x]) << "\n";
  }
  return os.str();
}

inline json entanglement_json(const BipartiteMixed& resource, std::size_t d, const Classification* c = nullptr) {
  std::optional<BlockStructure> known;
  if (c && c->verdict == Verdict::Capable && c->kind == ResourceKind::MixedMaxEnt) known = c->structure;
  const EntanglementReport e = eof_mixed_structured(resource, d, known);
  json j = {{"eof_bits", e.value_bits}, {"normalized", e.normalized}, {"exact", e.exact}, {"meets_log_d", nullptr}};
  if (resource.dims().n == d) j["meets_log_d"] = meets_log_d_criterion(resource, d);
  return j;
}

inline std::string entanglement_text(const json& e) {
  std::ostringstream os;
  os << "entanglement of formation: " << num(e["eof_bits"].get<double>()) << " bits ("
     << num(e["normalized"].get<double>()) << " x log2 d, " << (e["exact"].get<bool>() ? "exact" : "upper bound") << ")\n";
  if (!e["meets_log_d"].is_null()) os << "meets log d criterion: " << (e["meets_log_d"].get<bool>() ? "yes" : "no") << "\n";
  return os.str();
}

inline json outcome_json(const TeleportOutcome& o) {
  return {{"index", o.outcome_index},
          {"probability", o.probability},
          {"fidelity", o.fidelity_after_correction ? json(*o.fidelity_after_correction) : json(nullptr)},
          {"correction", o.correction ? io::encode_rows(*o.correction) : json(nullptr)}};
}

inline std::string outcome_table(const json& outcomes) {
  std::ostringstream os;
  const bool branches = !outcomes.empty() && outcomes.front().contains("branch");
  os << (branches ? "  branch" : "") << "  outcome  probability   fidelity\n";
  for (const auto& o : outcomes) {
    if (branches) os << "  " << std::setw(6) << o["branch"].get<std::size_t>();
    os << "  " << std::setw(7) << o["index"].get<std::size_t>() << "  " << std::setw(11) << num(o["probability"].get<double>())
       << "  " << std::setw(9) << (o["fidelity"].is_null() ? std::string("-") : num(o["fidelity"].get<double>(), 10)) << "\n";
  }
  return os.str();
}

inline std::string warnings_text(const json& report) {
  std::string s;
  for (const auto& w : report["warnings"]) s += "warning: " + w.get<std::string>() + "\n";
  return s;
}

/// Deterministic input used by the demos when no seed is given.
inline InputState fixed_input(std::size_t d) {
  ComplexVector v(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k)
    v(static_cast<Eigen::Index>(k)) = Complex(static_cast<double>(k + 1), static_cast<double>(d - k));
  return InputState(v / v.norm());
}

inline void add_warnings(json& report, const io::StateFile& f) {
  for (const auto& w : f.warnings) report["warnings"].push_back(w);
}

template <class F>
Result timed(F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Result r = body();
  r.report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

struct Run {
  std::string mode;  // certified | bob-first | best-effort
  std::vector<json> tables;  // one outcome table per input
  bool faithful = true;
};

inline json flatten(const BobFirstReport& rep) {
  json rows = json::array();
  for (const auto& b : rep.branches)
    for (const auto& o : b.outcomes) {
      json row = outcome_json(o);
      row["branch"] = b.projector_index;
      rows.push_back(std::move(row));
    }
  return rows;
}

inline json table(const std::vector<TeleportOutcome>& outcomes) {
  json rows = json::array();
  for (const auto& o : outcomes) rows.push_back(outcome_json(o));
  return rows;
}

/// Summary over per-input outcome tables; also fills report["outcomes"]
/// with the first table.
inline void summarize(json& report, const std::vector<json>& tables, const std::vector<InputState>& inputs) {
  json trials = json::array();
  double min_fid = 1.0;
  double mean = 0.0;
  double worst_sum_err = 0.0;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    double psum = 0.0;
    double wf = 0.0;
    double tmin = 1.0;
    for (const auto& o : tables[t]) {
      const double p = o["probability"].get<double>();
      psum += p;
      if (!o["fidelity"].is_null()) {
        const double f = o["fidelity"].get<double>();
        wf += p * f;
        tmin = std::min(tmin, f);
      } else if (p > kProbabilityCutoff) {
        tmin = 0.0;  // populated outcome with no usable correction
      }
    }
    trials.push_back({{"input", io::encode(inputs[t].amplitudes())},
                      {"probability_sum", psum},
                      {"weighted_fidelity", wf},
                      {"min_fidelity", tmin}});
    min_fid = std::min(min_fid, tmin);
    mean += wf;
    worst_sum_err = std::max(worst_sum_err, std::abs(psum - 1.0));
  }
  report["outcomes"] = tables.front();
  report["trials"] = trials;
  report["summary"] = {{"inputs", tables.size()},
                       {"min_fidelity", min_fid},
                       {"mean_weighted_fidelity", mean / static_cast<double>(tables.size())},
                       {"max_probability_sum_error", worst_sum_err}};
}

inline std::string summary_text(const json& report) {
  std::ostringstream os;
  const json& s = report["summary"];
  os << "inputs: " << s["inputs"].get<std::size_t>() << ", min fidelity " << num(s["min_fidelity"].get<double>(), 10)
     << ", mean weighted fidelity " << num(s["mean_weighted_fidelity"].get<double>(), 10) << "\n";
  return os.str();
}

/// Certified protocol run for a capable classification.
inline Run run_capable(const BipartiteMixed& resource, const Classification& c, const std::vector<InputState>& inputs,
                       std::size_t d) {
  Run run;
  if (c.certificate) {
    run.mode = "certified";
    for (const auto& in : inputs) run.tables.push_back(table(simulate(resource, in, *c.certificate)));
  } else {
    run.mode = "bob-first";
    for (const auto& in : inputs) {
      const BobFirstReport rep = bob_first_simulate(resource, c.bob_projectors, in, d);
      run.faithful = run.faithful && rep.faithful;
      run.tables.push_back(flatten(rep));
    }
  }
  return run;
}

inline std::string stages_text(const json& stages) {
  std::ostringstream os;
  for (const auto& s : stages)
    os << (s["passed"].get<bool>() ? "[ok]   " : "[fail] ") << s["name"].get<std::string>() << ": "
       << s["detail"].get<std::string>() << "\n";
  return os.str();
}

inline void stage(json& stages, const std::string& name, bool passed, const std::string& detail) {
  stages.push_back({{"name", name}, {"passed", passed}, {"detail", detail}});
}

inline void fill_classification(json& report, const Classification& c) {
  report["verdict"] = to_string(c.verdict);
  report["kind"] = c.kind ? json(to_string(*c.kind)) : json(nullptr);
  report["reason"] = c.reason.empty() ? json(nullptr) : json(c.reason);
  report["witness"] = witness_json(c);
  report["eof_flag"] = c.eof_flag;
}

inline std::string classification_text(const json& report, const Classification& c) {
  std::ostringstream os;
  os << "verdict: " << report["verdict"].get<std::string>();
  if (!report["kind"].is_null()) os << " (" << report["kind"].get<std::string>() << ")";
  os << "\n";
  if (!report["reason"].is_null()) os << "reason: " << report["reason"].get<std::string>() << "\n";
  os << witness_text(c);
  os << "eof below log2 d: " << (c.eof_flag ? "yes" : "no") << "\n";
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Result cmd_classify(const ClassifyOptions& opt) {
  return detail::timed([&] {
    const io::StateFile file = io::load(opt.state);
    const BipartiteMixed resource = io::as_resource(file);
    Result r;
    r.report = detail::skeleton("classify " + opt.state + " --d " + std::to_string(opt.d) + " --protocol " +
                                detail::protocol_name(opt.protocol));
    detail::add_warnings(r.report, file);
    const Classification c = classify(resource, opt.d, opt.protocol);
    detail::fill_classification(r.report, c);
    r.report["entanglement"] = detail::entanglement_json(resource, opt.d, &c);
    r.exit_code = detail::verdict_exit(c.verdict);
    r.text = detail::classification_text(r.report, c) + detail::entanglement_text(r.report["entanglement"]);
    return r;
  });
}

inline Result cmd_simulate(const SimulateOptions& opt) {
  return detail::timed([&] {
    const io::StateFile file = io::load(opt.state);
    const BipartiteMixed resource = io::as_resource(file);
    const std::size_t d = opt.d;
    std::ostringstream echo;
    echo << "simulate " << opt.state << " --d " << d << " --basis " << opt.basis;
    Result r;
    r.report = detail::skeleton("");
    detail::add_warnings(r.report, file);

    std::vector<InputState> inputs;
    if (opt.input && opt.random_inputs) throw std::invalid_argument("simulate: give either --input or --random-inputs, not both");
    if (opt.input) {
      const io::StateFile in = io::load(*opt.input);
      const auto* s = std::get_if<InputState>(&in.payload);
      if (!s) throw io::FormatError(*opt.input + ": expected kind \"input\", found \"" + in.kind() + "\"");
      if (s->d() != d) throw DimensionError("simulate: input has dimension " + std::to_string(s->d()) + ", expected " + std::to_string(d));
      detail::add_warnings(r.report, in);
      inputs.push_back(*s);
      echo << " --input " << *opt.input;
    } else if (opt.random_inputs) {
      if (!opt.seed) throw std::invalid_argument("simulate: --random-inputs requires an explicit --seed");
      if (*opt.random_inputs == 0) throw std::invalid_argument("simulate: --random-inputs must be at least 1");
      for (std::size_t t = 0; t < *opt.random_inputs; ++t) inputs.push_back(random_input(d, derive_seed(*opt.seed, t)));
      echo << " --random-inputs " << *opt.random_inputs << " --seed " << *opt.seed;
    } else {
      throw std::invalid_argument("simulate: need --input PATH or --random-inputs N --seed S");
    }
    r.report["command"] = echo.str();

    detail::Run run;
    std::string head;
    if (opt.basis == "auto") {
      const Classification c = classify(resource, d, opt.protocol);
      detail::fill_classification(r.report, c);
      head = detail::classification_text(r.report, c);
      if (c.verdict != Verdict::Capable) {
        r.exit_code = detail::verdict_exit(c.verdict);
        r.report["mode"] = nullptr;
        r.text = head + "no faithful protocol: --basis auto needs a capable resource\n";
        return r;
      }
      run = detail::run_capable(resource, c, inputs, d);
    } else {
      const io::StateFile bf = io::load(opt.basis);
      const auto* basis = std::get_if<MeasurementBasis>(&bf.payload);
      if (!basis) throw io::FormatError(opt.basis + ": expected kind \"basis\", found \"" + bf.kind() + "\"");
      if (basis->d != d || basis->m != resource.dims().m)
        throw DimensionError("simulate: basis is on C^" + std::to_string(basis->d) + " (x) C^" + std::to_string(basis->m) +
                             " but the protocol needs C^" + std::to_string(d) + " (x) C^" + std::to_string(resource.dims().m));
      detail::add_warnings(r.report, bf);
      const CorrectionAttempt attempt = derive_corrections(resource, *basis, d);
      if (attempt) {
        run.mode = "certified";
        for (const auto& in : inputs) run.tables.push_back(detail::table(simulate(resource, in, *attempt.certificate)));
      } else {
        run.mode = "best-effort";
        run.faithful = false;
        r.report["reason"] = "basis is not faithful for this resource: " + attempt.violation->what;
        head = "reason: " + r.report["reason"].get<std::string>() + "\n";
        for (const auto& in : inputs) run.tables.push_back(detail::table(best_effort_simulate(resource, in, *basis, d)));
      }
    }
    r.report["mode"] = run.mode;
    detail::summarize(r.report, run.tables, inputs);
    const bool faithful = run.faithful && r.report["summary"]["min_fidelity"].get<double>() >= 1.0 - 1e-9;
    r.report["faithful"] = faithful;
    r.exit_code = faithful ? kOk : kNotCapable;
    r.text = head + "mode: " + run.mode + "\n" + detail::outcome_table(r.report["outcomes"]) + detail::summary_text(r.report);
    return r;
  });
}

inline Result cmd_entanglement(const EntanglementOptions& opt) {
  return detail::timed([&] {
    const io::StateFile file = io::load(opt.state);
    const BipartiteMixed resource = io::as_resource(file);
    Result r;
    r.report = detail::skeleton("entanglement " + opt.state + " --d " + std::to_string(opt.d));
    detail::add_warnings(r.report, file);
    if (const auto* p = std::get_if<BipartitePure>(&file.payload)) {
      const EntanglementReport e = eof_pure(*p, opt.d);
      r.report["entanglement"] = {{"eof_bits", e.value_bits}, {"normalized", e.normalized}, {"exact", true}, {"meets_log_d", nullptr}};
      if (resource.dims().n == opt.d) r.report["entanglement"]["meets_log_d"] = meets_log_d_criterion(resource, opt.d);
      const SchmidtDecomposition s = schmidt(*p);
      r.report["schmidt_coefficients"] = std::vector<double>(s.coefficients.begin(), s.coefficients.end());
    } else {
      r.report["entanglement"] = detail::entanglement_json(resource, opt.d);
    }
    r.text = detail::entanglement_text(r.report["entanglement"]);
    return r;
  });
}

namespace detail {

inline Result demo_rho0(const DemoOptions& opt) {
  Result r;
  r.report = skeleton("demo rho0");
  json stages = json::array();
  const demos::Rho0Pipeline pipe = demos::rho0_pipeline();
  stage(stages, "prepare psi0", true, "(|00>+|11>+|22>+|33>)/2 on C^4 (x) C^4");
  const double trace_err = std::abs(pipe.after_channel.density().trace().real() - 1.0);
  stage(stages, "apply Kraus channel on Bob", trace_err < 1e-12, "A1 = P{0,1}, A2 = P{2,3}; trace error " + num(trace_err));
  const double err = (pipe.compressed.density() - demos::rho0().density()).cwiseAbs().maxCoeff();
  stage(stages, "discard Bob's block label", err <= 1e-12, "max entry error against rho0: " + num(err));

  const BipartiteMixed& rho = pipe.compressed;
  const Classification c = classify(rho, 2);
  fill_classification(r.report, c);
  const bool cls_ok = c.verdict == Verdict::Capable && c.kind == ResourceKind::MixedMaxEnt && c.structure && c.structure->k() == 2;
  stage(stages, "classify rho0 with d = 2", cls_ok, to_string(c.verdict) + (c.kind ? " " + to_string(*c.kind) : ""));

  const InputState input = opt.seed ? random_input(2, *opt.seed) : fixed_input(2);
  if (cls_ok) {
    const Run run = run_capable(rho, c, {input}, 2);
    summarize(r.report, run.tables, {input});
    bool sim_ok = r.report["outcomes"].size() == 8;
    for (const auto& o : r.report["outcomes"])
      sim_ok = sim_ok && std::abs(o["probability"].get<double>() - 0.125) < 1e-10 && !o["fidelity"].is_null() &&
               std::abs(o["fidelity"].get<double>() - 1.0) < 1e-10;
    stage(stages, "simulate", sim_ok, std::to_string(r.report["outcomes"].size()) + " outcomes, min fidelity " +
                                          num(r.report["summary"]["min_fidelity"].get<double>(), 12));
  } else {
    stage(stages, "simulate", false, "skipped: rho0 not certified");
  }
  r.report["entanglement"] = entanglement_json(rho, 2, &c);
  r.report["stages"] = stages;
  bool all = true;
  for (const auto& s : stages) all = all && s["passed"].get<bool>();
  r.exit_code = all ? kOk : kNotCapable;
  r.text = stages_text(stages) + classification_text(r.report, c) +
           (r.report.contains("summary") ? outcome_table(r.report["outcomes"]) : "") + entanglement_text(r.report["entanglement"]);
  return r;
}

inline Result demo_fivedim(const DemoOptions& opt) {
  Result r;
  r.report = skeleton("demo fivedim --a " + num(opt.a, 17));
  json stages = json::array();
  const BipartitePure psi = demos::five_level(opt.a);
  const BipartiteMixed rho(psi);
  const Classification c = classify(rho, 2);
  fill_classification(r.report, c);
  const bool cls_ok = c.verdict == Verdict::Capable && c.kind == ResourceKind::ClassNine;
  std::string blocks;
  for (const auto& b : c.class_nine) blocks += "(" + num(b.weight) + ", " + std::to_string(b.dim) + ") ";
  stage(stages, "classify with d = 2", cls_ok, to_string(c.verdict) + " blocks " + blocks);
  const InputState input = opt.seed ? random_input(2, *opt.seed) : fixed_input(2);
  if (cls_ok) {
    const Run run = run_capable(rho, c, {input}, 2);
    summarize(r.report, run.tables, {input});
    // Outcome probabilities follow c_p^2 / (d n_p) within each block.
    std::vector<double> expected;
    for (const auto& b : c.class_nine)
      for (std::size_t k = 0; k < 2 * b.dim; ++k) expected.push_back(b.weight * b.weight / (2.0 * static_cast<double>(b.dim)));
    bool ok = expected.size() == r.report["outcomes"].size();
    for (std::size_t j = 0; ok && j < expected.size(); ++j) {
      const json& o = r.report["outcomes"][j];
      ok = std::abs(o["probability"].get<double>() - expected[j]) < 1e-10 && !o["fidelity"].is_null() &&
           std::abs(o["fidelity"].get<double>() - 1.0) < 1e-10;
    }
    stage(stages, "simulate", ok, std::to_string(r.report["outcomes"].size()) + " outcomes, probabilities c_p^2/(d n_p)");
  } else {
    stage(stages, "simulate", false, "skipped: state not certified");
  }
  r.report["entanglement"] = entanglement_json(rho, 2, &c);
  r.report["stages"] = stages;
  bool all = true;
  for (const auto& s : stages) all = all && s["passed"].get<bool>();
  r.exit_code = all ? kOk : kNotCapable;
  r.text = stages_text(stages) + classification_text(r.report, c) +
           (r.report.contains("summary") ? outcome_table(r.report["outcomes"]) : "") + entanglement_text(r.report["entanglement"]);
  return r;
}

inline Result demo_kraus(const DemoOptions& opt) {
  Result r;
  std::string echo = "demo kraus --d " + std::to_string(opt.d) + " --side " + (opt.side == Side::A ? "A" : "B");
  json stages = json::array();
  std::optional<KrausChannel> channel;
  std::optional<BipartiteMixed> start;
  std::vector<std::string> warnings;
  if (opt.channel) {
    const io::StateFile f = io::load(*opt.channel);
    const auto* ch = std::get_if<KrausChannel>(&f.payload);
    if (!ch) throw io::FormatError(*opt.channel + ": expected kind \"channel\", found \"" + f.kind() + "\"");
    channel = *ch;
    warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
    echo += " --channel " + *opt.channel;
  } else {
    channel = demos::block_dephasing_channel();
  }
  if (opt.state) {
    const io::StateFile f = io::load(*opt.state);
    start = io::as_resource(f);
    warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
    echo += " --state " + *opt.state;
  } else {
    start = BipartiteMixed(demos::psi0());
  }
  r.report = skeleton(echo);
  for (const auto& w : warnings) r.report["warnings"].push_back(w);

  const Classification before = classify(*start, opt.d);
  stage(stages, "classify before channel", true, to_string(before.verdict) + (before.kind ? " " + to_string(*before.kind) : ""));
  const BipartiteMixed after = apply_one_sided(*channel, *start, opt.side);
  stage(stages, "apply channel", true, std::to_string(channel->operators().size()) + " Kraus operators on side " +
                                           (opt.side == Side::A ? "A" : "B"));
  const Classification c = teleportation_capability_after_channel(*channel, *start, opt.side, opt.d);
  fill_classification(r.report, c);
  stage(stages, "classify after channel", c.verdict == Verdict::Capable,
        to_string(c.verdict) + (c.kind ? " " + to_string(*c.kind) : ""));
  r.report["before"] = {{"verdict", to_string(before.verdict)},
                        {"kind", before.kind ? json(to_string(*before.kind)) : json(nullptr)}};
  r.report["entanglement"] = entanglement_json(after, opt.d, &c);
  r.report["stages"] = stages;
  r.exit_code = verdict_exit(c.verdict);
  r.text = stages_text(stages) + classification_text(r.report, c) + entanglement_text(r.report["entanglement"]);
  return r;
}

}  // namespace detail

inline Result cmd_demo(const DemoOptions& opt) {
  return detail::timed([&] {
    if (opt.name == "rho0") return detail::demo_rho0(opt);
    if (opt.name == "fivedim") return detail::demo_fivedim(opt);
    if (opt.name == "kraus") return detail::demo_kraus(opt);
    throw std::invalid_argument("demo: unknown demo \"" + opt.name + "\" (expected rho0, fivedim or kraus)");
  });
}

inline Result cmd_check(const CheckOptions& opt) {
  return detail::timed([&] {
    if (opt.d < 2) throw std::invalid_argument("check: --d must be at least 2");
    if (opt.samples == 0) throw std::invalid_argument("check: --samples must be at least 1");
    Result r;
    r.report = detail::skeleton("check --d " + std::to_string(opt.d) + " --samples " + std::to_string(opt.samples) +
                                " --seed " + std::to_string(opt.seed));
    json checks = json::array();
    bool all = true;
    std::ostringstream text;
    for (const auto& c : checks::run_all(opt.d, opt.samples, opt.seed)) {
      checks.push_back({{"name", c.name},
                        {"description", c.description},
                        {"samples", c.samples},
                        {"passed", c.passed},
                        {"counterexample", c.passed ? json(nullptr) : json(c.counterexample)}});
      all = all && c.passed;
      text << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.samples << " samples): " << c.description << "\n";
      if (!c.passed) text << "  counterexample: " << c.counterexample << "\n";
    }
    r.report["checks"] = checks;
    r.report["verdict"] = all ? "pass" : "fail";
    r.exit_code = all ? kOk : kNotCapable;
    r.text = text.str();
    return r;
  });
}

// ---------------------------------------------------------------------------

/// Parses `args` (without the program name), runs the command and prints
/// the report to `out` (text, or JSON with --json). Diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Qudit teleportation simulator and resource classifier"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Print the report as JSON");

  const std::map<std::string, ProtocolVariant> protocols{{"alice-first", ProtocolVariant::AliceFirst},
                                                        {"bob-first", ProtocolVariant::BobFirstAllowed}};

  ClassifyOptions co;
  auto* classify_cmd = app.add_subcommand("classify", "Decide whether a resource supports faithful teleportation");
  classify_cmd->add_option("state", co.state, "Resource state file")->required();
  classify_cmd->add_option("--d", co.d, "Input dimension")->required()->check(CLI::PositiveNumber);
  classify_cmd->add_option("--protocol", co.protocol, "alice-first or bob-first")->transform(CLI::CheckedTransformer(protocols));

  SimulateOptions so;
  std::uint64_t sim_seed = 0;
  std::size_t sim_trials = 0;
  std::string sim_input;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the teleportation protocol");
  simulate_cmd->add_option("state", so.state, "Resource state file")->required();
  simulate_cmd->add_option("--d", so.d, "Input dimension")->required()->check(CLI::PositiveNumber);
  auto* sim_input_opt = simulate_cmd->add_option("--input", sim_input, "Input state file");
  auto* sim_trials_opt = simulate_cmd->add_option("--random-inputs", sim_trials, "Number of Haar-random inputs");
  auto* sim_seed_opt = simulate_cmd->add_option("--seed", sim_seed, "Seed for random inputs");
  simulate_cmd->add_option("--basis", so.basis, "auto, or a measurement basis file");
  simulate_cmd->add_option("--protocol", so.protocol, "alice-first or bob-first")->transform(CLI::CheckedTransformer(protocols));

  EntanglementOptions eo;
  auto* ent_cmd = app.add_subcommand("entanglement", "Entanglement of formation of a resource");
  ent_cmd->add_option("state", eo.state, "Resource state file")->required();
  ent_cmd->add_option("--d", eo.d, "Input dimension")->required()->check(CLI::PositiveNumber);

  DemoOptions dopt;
  std::uint64_t demo_seed = 0;
  std::string demo_channel, demo_state;
  const std::map<std::string, Side> sides{{"A", Side::A}, {"B", Side::B}};
  auto* demo_cmd = app.add_subcommand("demo", "Run a built-in example");
  demo_cmd->add_option("name", dopt.name, "rho0, fivedim or kraus")->required()->check(CLI::IsMember({"rho0", "fivedim", "kraus"}));
  demo_cmd->add_option("--a", dopt.a, "Weight a in (0, 1) for fivedim");
  auto* demo_seed_opt = demo_cmd->add_option("--seed", demo_seed, "Seed for a random input");
  auto* demo_channel_opt = demo_cmd->add_option("--channel", demo_channel, "Channel file for kraus");
  auto* demo_state_opt = demo_cmd->add_option("--state", demo_state, "Resource file for kraus");
  demo_cmd->add_option("--side", dopt.side, "Side the channel acts on (A or B)")->transform(CLI::CheckedTransformer(sides));
  demo_cmd->add_option("--d", dopt.d, "Input dimension for kraus")->check(CLI::PositiveNumber);

  CheckOptions ko;
  auto* check_cmd = app.add_subcommand("check", "Run the randomized property suites");
  check_cmd->add_option("--d", ko.d, "Input dimension")->required()->check(CLI::Range(2, 8));
  check_cmd->add_option("--samples", ko.samples, "Samples per suite")->required()->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", ko.seed, "Seed")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    Result r;
    if (*classify_cmd) {
      r = cmd_classify(co);
    } else if (*simulate_cmd) {
      if (*sim_input_opt) so.input = sim_input;
      if (*sim_trials_opt) so.random_inputs = sim_trials;
      if (*sim_seed_opt) so.seed = sim_seed;
      r = cmd_simulate(so);
    } else if (*ent_cmd) {
      r = cmd_entanglement(eo);
    } else if (*demo_cmd) {
      if (*demo_seed_opt) dopt.seed = demo_seed;
      if (*demo_channel_opt) dopt.channel = demo_channel;
      if (*demo_state_opt) dopt.state = demo_state;
      r = cmd_demo(dopt);
    } else {
      r = cmd_check(ko);
    }
    for (const auto& w : r.report["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
    if (as_json)
      out << r.report.dump(2) << "\n";
    else
      out << r.text << "wall time: " << detail::num(r.report["wall_time_s"].get<double>(), 3) << " s\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace qtele::cli
