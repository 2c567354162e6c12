// sepcert command-line front end.
//
// Subcommands:
//   analyze    run the certification pipeline on a state file
//   witness    evaluate a copositive witness on a bipartite state
//   family     build and analyze the odd-N PPT-entangled family
//   decompose  write an explicit separable decomposition
//   example4   the printed 4-qubit PPT-entangled example
//
// Exit codes: 0 separable, 1 entangled, 2 inconclusive, 3 not certified
// (decompose), 64 parse error, 65 bad subset/parameter, 70 numerical
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sepcert/cones.hpp"
#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"
#include "sepcert/errors.hpp"
#include "sepcert/matcore.hpp"
#include "sepcert/multiqubit.hpp"
#include "sepcert/range_criterion.hpp"

namespace {

// ---------------------------------------------------------------------------
// Deterministic JSON emission: insertion-ordered keys, doubles rendered with
// 17 significant digits so reports are byte-identical across runs and the
// values round-trip losslessly.
// ---------------------------------------------------------------------------

class JsonValue {
 public:
  enum class Kind { Null, Bool, Int, Real, Str, Array, Object };

  JsonValue() : kind_(Kind::Null) {}
  static JsonValue boolean(bool b) {
    JsonValue v;
    v.kind_ = Kind::Bool;
    v.bool_ = b;
    return v;
  }
  static JsonValue integer(long long i) {
    JsonValue v;
    v.kind_ = Kind::Int;
    v.int_ = i;
    return v;
  }
  static JsonValue real(double d) {
    JsonValue v;
    v.kind_ = Kind::Real;
    v.real_ = d;
    return v;
  }
  static JsonValue str(std::string s) {
    JsonValue v;
    v.kind_ = Kind::Str;
    v.str_ = std::move(s);
    return v;
  }
  static JsonValue array() {
    JsonValue v;
    v.kind_ = Kind::Array;
    return v;
  }
  static JsonValue object() {
    JsonValue v;
    v.kind_ = Kind::Object;
    return v;
  }

  JsonValue& set(const std::string& key, JsonValue value) {
    members_.emplace_back(key, std::move(value));
    return *this;
  }
  JsonValue& push(JsonValue value) {
    items_.push_back(std::move(value));
    return *this;
  }

  std::string dump(int indent = 0) const {
    std::string out;
    write(out, indent, 0);
    out.push_back('\n');
    return out;
  }

 private:
  static void escape(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }

  void write(std::string& out, int indent, int depth) const {
    const std::string pad(indent * (depth + 1), ' ');
    const std::string close_pad(indent * depth, ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (kind_) {
      case Kind::Null: out += "null"; break;
      case Kind::Bool: out += bool_ ? "true" : "false"; break;
      case Kind::Int: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", int_);
        out += buf;
        break;
      }
      case Kind::Real: {
        if (std::isnan(real_)) {
          out += "\"NaN\"";
        } else if (std::isinf(real_)) {
          out += real_ > 0 ? "\"Infinity\"" : "\"-Infinity\"";
        } else {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%.17g", real_);
          out += buf;
        }
        break;
      }
      case Kind::Str: escape(out, str_); break;
      case Kind::Array: {
        if (items_.empty()) {
          out += "[]";
          break;
        }
        out += "[";
        out += nl;
        for (std::size_t i = 0; i < items_.size(); ++i) {
          out += pad;
          items_[i].write(out, indent, depth + 1);
          if (i + 1 < items_.size()) out += ",";
          out += nl;
        }
        out += close_pad;
        out += "]";
        break;
      }
      case Kind::Object: {
        if (members_.empty()) {
          out += "{}";
          break;
        }
        out += "{";
        out += nl;
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += pad;
          escape(out, members_[i].first);
          out += indent > 0 ? ": " : ":";
          members_[i].second.write(out, indent, depth + 1);
          if (i + 1 < members_.size()) out += ",";
          out += nl;
        }
        out += close_pad;
        out += "}";
        break;
      }
    }
  }

  Kind kind_;
  bool bool_ = false;
  long long int_ = 0;
  double real_ = 0.0;
  std::string str_;
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> members_;
};

JsonValue vector_json(const Eigen::VectorXd& v) {
  JsonValue arr = JsonValue::array();
  for (int i = 0; i < v.size(); ++i) arr.push(JsonValue::real(v(i)));
  return arr;
}

JsonValue matrix_json(const Eigen::MatrixXd& m) {
  JsonValue rows = JsonValue::array();
  for (int i = 0; i < m.rows(); ++i) {
    JsonValue row = JsonValue::array();
    for (int j = 0; j < m.cols(); ++j) row.push(JsonValue::real(m(i, j)));
    rows.push(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Error with a dedicated process exit code.
// ---------------------------------------------------------------------------

struct CliFailure {
  int exit_code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliFailure{code, message};
}

// ---------------------------------------------------------------------------
// State files.
// ---------------------------------------------------------------------------

struct LoadedState {
  std::variant<sepcert::DsState, sepcert::SymmetricNQubitState> state;

  bool is_bipartite() const { return state.index() == 0; }
  const sepcert::DsState& bipartite() const { return std::get<0>(state); }
  const sepcert::SymmetricNQubitState& multiqubit() const { return std::get<1>(state); }
};

LoadedState load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(64, "cannot open state file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(64, "malformed JSON in " + path + ": " + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bipartite_ds") {
      const int d = j.at("d").get<int>();
      sepcert::WeightMap weights;
      for (const auto& entry : j.at("entries")) {
        const int i = entry.at("i").get<int>();
        const int jj = entry.at("j").get<int>();
        const double w = entry.at("w").get<double>();
        weights[{i, jj}] += w;
      }
      const bool normalized = j.value("normalized", false);
      return LoadedState{sepcert::DsState::create(d, weights, normalized)};
    }
    if (kind == "multiqubit") {
      sepcert::SymmetricNQubitState state;
      state.n_qubits = j.at("n").get<int>();
      const auto& diag = j.at("diag");
      if (static_cast<int>(diag.size()) != state.n_qubits + 1) {
        fail(64, "diag must have n+1 entries");
      }
      state.diag = Eigen::VectorXd(state.n_qubits + 1);
      for (int k = 0; k <= state.n_qubits; ++k) state.diag(k) = diag.at(k).get<double>();
      state.sigma = j.at("sigma").get<double>();
      state.coherence_pos = {0, state.n_qubits};
      if (j.contains("coherence_pos")) {
        const auto& pos = j.at("coherence_pos");
        state.coherence_pos = {pos.at(0).get<int>(), pos.at(1).get<int>()};
      }
      state.normalization = j.value("normalization", 1.0);
      return LoadedState{state};
    }
    fail(64, "unknown state kind: " + kind);
  } catch (const CliFailure&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(64, std::string("invalid state file field: ") + e.what());
  } catch (const sepcert::Error& e) {
    fail(64, std::string("invalid state data: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Shared options.
// ---------------------------------------------------------------------------

struct CommonOptions {
  bool json = false;
  double tol = -1.0;  // negative: defaults
  unsigned seed = 0x5eedu;
  long long budget = -1;
  bool normalize = false;
  std::vector<std::string> projectors;
  std::string out_path;

  sepcert::Tolerance tolerance() const {
    sepcert::Tolerance t;
    if (tol > 0.0) {
      t.abs_eig = tol;
      t.rank_cut = tol;
      t.rel_scale = std::min(t.rel_scale, tol);
    }
    return t;
  }

  sepcert::CertifyBudget certify_budget() const {
    sepcert::CertifyBudget b;
    b.seed = seed;
    if (budget > 0) {
      b.support_cap = static_cast<std::uint64_t>(budget);
      b.witness_subset_cap = static_cast<int>(std::min<long long>(budget, 1 << 20));
    }
    return b;
  }
};

void add_common_flags(CLI::App* cmd, CommonOptions* opts, bool with_search_knobs) {
  cmd->add_flag("--json", opts->json, "emit a machine-readable JSON report");
  cmd->add_option("--tol", opts->tol,
                  "override the absolute eigenvalue and rank thresholds");
  cmd->add_option("--out", opts->out_path, "write the report to a file instead of stdout");
  if (with_search_knobs) {
    cmd->add_option("--seed", opts->seed, "seed for the randomized searches");
    cmd->add_option("--budget", opts->budget,
                    "cap for support enumeration and witness subset scans");
  }
}

void add_bipartite_input_flags(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_flag("--normalize", opts->normalize, "rescale the weights to unit sum");
  cmd->add_option("--projector", opts->projectors,
                  "subtract a rank-1 term 'w:v0,v1,...' from M before the test "
                  "(repeatable)");
}

sepcert::DsState preprocess_bipartite(const sepcert::DsState& input,
                                      const CommonOptions& opts) {
  sepcert::DsState state = input;
  if (opts.normalize) {
    const double total = state.weight_sum();
    if (total <= 0.0) fail(65, "--normalize needs a positive weight sum");
    sepcert::WeightMap scaled;
    for (const auto& [key, value] : state.weights()) scaled[key] = value / total;
    state = sepcert::DsState::create(state.dim(), scaled, true);
  }
  if (!opts.projectors.empty()) {
    std::vector<std::pair<double, Eigen::VectorXd>> terms;
    for (const std::string& spec : opts.projectors) {
      const std::size_t colon = spec.find(':');
      if (colon == std::string::npos) {
        fail(64, "projector must look like 'w:v0,v1,...': " + spec);
      }
      try {
        const double weight = std::stod(spec.substr(0, colon));
        std::vector<double> comps;
        std::stringstream parts(spec.substr(colon + 1));
        std::string item;
        while (std::getline(parts, item, ',')) comps.push_back(std::stod(item));
        Eigen::VectorXd v(static_cast<int>(comps.size()));
        for (std::size_t i = 0; i < comps.size(); ++i) v(static_cast<int>(i)) = comps[i];
        terms.emplace_back(weight, v);
      } catch (const std::exception&) {
        fail(64, "cannot parse projector: " + spec);
      }
    }
    try {
      state = sepcert::subtract_rank_one_terms(state, terms);
    } catch (const sepcert::DimensionMismatchError& e) {
      fail(65, e.what());
    } catch (const sepcert::Error& e) {
      fail(65, std::string("projector subtraction rejected: ") + e.what());
    }
  }
  return state;
}

void write_report(const CommonOptions& opts, const std::string& text) {
  if (opts.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(opts.out_path);
    if (!out) fail(70, "cannot open output file: " + opts.out_path);
    out << text;
  }
}

JsonValue tolerance_json(const sepcert::Tolerance& tol) {
  JsonValue t = JsonValue::object();
  t.set("abs_eig", JsonValue::real(tol.abs_eig));
  t.set("rel_scale", JsonValue::real(tol.rel_scale));
  t.set("rank_cut", JsonValue::real(tol.rank_cut));
  return t;
}

const char* verdict_name(sepcert::SeparabilityCertificate::Verdict v) {
  switch (v) {
    case sepcert::SeparabilityCertificate::Verdict::Separable: return "Separable";
    case sepcert::SeparabilityCertificate::Verdict::Entangled: return "Entangled";
    default: return "Inconclusive";
  }
}

JsonValue decomposition_json(const sepcert::DecompositionEvidence& ev) {
  JsonValue out = JsonValue::object();
  out.set("type", JsonValue::str("decomposition"));
  out.set("route", JsonValue::str(ev.route));
  out.set("factor", matrix_json(ev.factorization.b));
  JsonValue terms = JsonValue::array();
  for (const auto& term : ev.decomposition.terms) {
    JsonValue t = JsonValue::object();
    t.set("weight", JsonValue::real(term.weight));
    JsonValue ket = JsonValue::array();
    for (int i = 0; i < term.ket.size(); ++i) {
      JsonValue c = JsonValue::array();
      c.push(JsonValue::real(term.ket(i).real()));
      c.push(JsonValue::real(term.ket(i).imag()));
      ket.push(std::move(c));
    }
    t.set("ket", std::move(ket));
    terms.push(std::move(t));
  }
  out.set("terms", std::move(terms));
  return out;
}

JsonValue evidence_json(const sepcert::SeparabilityCertificate& cert) {
  using namespace sepcert;
  if (const auto* dec = std::get_if<DecompositionEvidence>(&cert.evidence)) {
    return decomposition_json(*dec);
  }
  if (const auto* cite = std::get_if<TheoremCitationEvidence>(&cert.evidence)) {
    JsonValue out = JsonValue::object();
    out.set("type", JsonValue::str("theorem_citation"));
    out.set("theorem", JsonValue::str(cite->theorem));
    out.set("detail", JsonValue::str(cite->detail));
    return out;
  }
  if (const auto* wit = std::get_if<WitnessViolationEvidence>(&cert.evidence)) {
    JsonValue out = JsonValue::object();
    out.set("type", JsonValue::str("witness_violation"));
    out.set("value", JsonValue::real(wit->value));
    JsonValue subset = JsonValue::array();
    for (int idx : wit->witness.subset) subset.push(JsonValue::integer(idx));
    out.set("subset", std::move(subset));
    out.set("matrix", matrix_json(wit->witness.w.mat()));
    return out;
  }
  if (const auto* npt = std::get_if<NptViolationEvidence>(&cert.evidence)) {
    JsonValue out = JsonValue::object();
    out.set("type", JsonValue::str("npt_violation"));
    out.set("min_eigenvalue", JsonValue::real(npt->min_eigenvalue));
    return out;
  }
  if (const auto* range = std::get_if<RangeCriterionEvidence>(&cert.evidence)) {
    JsonValue out = JsonValue::object();
    out.set("type", JsonValue::str("range_criterion"));
    out.set("kernel_dimension",
            JsonValue::integer(static_cast<long long>(range->report.kernel_basis.size())));
    JsonValue pairs = JsonValue::array();
    for (const auto& [i, j] : range->report.zero_pairs) {
      JsonValue p = JsonValue::array();
      p.push(JsonValue::integer(i));
      p.push(JsonValue::integer(j));
      pairs.push(std::move(p));
    }
    out.set("zero_pairs", std::move(pairs));
    JsonValue diag = JsonValue::array();
    for (int i : range->report.zero_diag) diag.push(JsonValue::integer(i));
    out.set("zero_diag", std::move(diag));
    out.set("supports_examined",
            JsonValue::integer(static_cast<long long>(range->report.supports_examined)));
    return out;
  }
  JsonValue out = JsonValue::object();
  out.set("type", JsonValue::str("attempt_trace"));
  return out;
}

JsonValue trace_json(const std::vector<std::string>& trace) {
  JsonValue arr = JsonValue::array();
  for (const std::string& line : trace) arr.push(JsonValue::str(line));
  return arr;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

int run_analyze_bipartite(const sepcert::DsState& state, const CommonOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const sepcert::SeparabilityCertificate cert =
      sepcert::certify(state, opts.certify_budget());
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();

  int exit_code = 2;
  if (cert.verdict == sepcert::SeparabilityCertificate::Verdict::Separable) exit_code = 0;
  if (cert.verdict == sepcert::SeparabilityCertificate::Verdict::Entangled) exit_code = 1;

  if (opts.json) {
    JsonValue report = JsonValue::object();
    report.set("version", JsonValue::str("1"));
    report.set("command", JsonValue::str("analyze"));
    report.set("kind", JsonValue::str("bipartite_ds"));
    report.set("d", JsonValue::integer(state.dim()));
    report.set("verdict", JsonValue::str(verdict_name(cert.verdict)));
    report.set("tolerance", tolerance_json(opts.tolerance()));
    report.set("seed", JsonValue::integer(opts.seed));
    report.set("evidence", evidence_json(cert));
    report.set("attempt_trace", trace_json(cert.attempt_trace));
    write_report(opts, report.dump(2));
  } else {
    std::ostringstream out;
    out << "verdict: " << verdict_name(cert.verdict) << "\n";
    for (const std::string& line : cert.attempt_trace) out << "  " << line << "\n";
    out << "elapsed_ms: " << elapsed_ms << "\n";
    write_report(opts, out.str());
  }
  return exit_code;
}

int run_analyze_multiqubit(const sepcert::SymmetricNQubitState& state,
                           const CommonOptions& opts) {
  const sepcert::Tolerance tol = opts.tolerance();
  const auto start = std::chrono::steady_clock::now();
  const bool ppt = sepcert::is_ppt_all_bipartitions(state, tol);
  const std::vector<int> ranks = sepcert::ranks_profile(state, tol);
  const int extremality = sepcert::extremality_dimension(state, tol);
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();

  // An NPT state is entangled outright; a PPT state that is extremal in the
  // PPT set with rank above 1 cannot be separable.
  std::string verdict = "Inconclusive";
  std::string reason = "PPT and not extremal within the symmetric family";
  if (!ppt) {
    verdict = "Entangled";
    reason = "a partial transpose has a negative eigenvalue";
  } else if (extremality == 1 && ranks[0] > 1) {
    verdict = "Entangled";
    reason = "extremal PPT state of rank above 1";
  }
  int exit_code = verdict == "Entangled" ? 1 : 2;

  if (opts.json) {
    JsonValue report = JsonValue::object();
    report.set("version", JsonValue::str("1"));
    report.set("command", JsonValue::str("analyze"));
    report.set("kind", JsonValue::str("multiqubit"));
    report.set("n", JsonValue::integer(state.n_qubits));
    report.set("verdict", JsonValue::str(verdict));
    report.set("reason", JsonValue::str(reason));
    report.set("ppt_all_bipartitions", JsonValue::boolean(ppt));
    JsonValue rank_arr = JsonValue::array();
    for (int r : ranks) rank_arr.push(JsonValue::integer(r));
    report.set("ranks", std::move(rank_arr));
    report.set("extremality_dimension", JsonValue::integer(extremality));
    report.set("tolerance", tolerance_json(tol));
    write_report(opts, report.dump(2));
  } else {
    std::ostringstream out;
    out << "verdict: " << verdict << "\n";
    out << "  reason: " << reason << "\n";
    out << "  ppt_all_bipartitions: " << (ppt ? "true" : "false") << "\n";
    out << "  ranks:";
    for (int r : ranks) out << " " << r;
    out << "\n  extremality_dimension: " << extremality << "\n";
    out << "elapsed_ms: " << elapsed_ms << "\n";
    write_report(opts, out.str());
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// witness
// ---------------------------------------------------------------------------

int run_witness(const sepcert::DsState& state, const std::string& witness_name,
                std::vector<int> subset, const CommonOptions& opts) {
  if (witness_name != "horn") {
    fail(65, "only the built-in 'horn' witness is available");
  }
  const sepcert::Witness horn = sepcert::horn_matrix();
  if (subset.empty()) {
    if (state.dim() != 5) fail(65, "--subset is required when d != 5");
    subset = {0, 1, 2, 3, 4};
  }
  sepcert::Witness lifted = horn;
  try {
    lifted = (state.dim() == 5 && subset == std::vector<int>{0, 1, 2, 3, 4})
                 ? horn
                 : sepcert::lift_witness(horn, state.dim(), subset);
  } catch (const sepcert::BadSubsetError& e) {
    fail(65, e.what());
  }
  const double value = sepcert::witness_value(lifted, sepcert::m_matrix(state));
  const bool certifies = value < -1e-9;

  if (opts.json) {
    JsonValue report = JsonValue::object();
    report.set("version", JsonValue::str("1"));
    report.set("command", JsonValue::str("witness"));
    report.set("witness", JsonValue::str("horn"));
    JsonValue sub = JsonValue::array();
    for (int idx : subset) sub.push(JsonValue::integer(idx));
    report.set("subset", std::move(sub));
    report.set("value", JsonValue::real(value));
    report.set("certifies_entanglement", JsonValue::boolean(certifies));
    report.set("threshold", JsonValue::real(-1e-9));
    write_report(opts, report.dump(2));
  } else {
    std::ostringstream out;
    out << "witness: horn\nsubset:";
    for (int idx : subset) out << " " << idx;
    out << "\nvalue: " << value << "\n";
    out << (certifies ? "certifies entanglement (value < -1e-9)\n"
                      : "does not certify entanglement\n");
    write_report(opts, out.str());
  }
  return certifies ? 1 : 2;
}

// ---------------------------------------------------------------------------
// family / example4
// ---------------------------------------------------------------------------

JsonValue multiqubit_state_json(const sepcert::SymmetricNQubitState& state) {
  JsonValue file = JsonValue::object();
  file.set("version", JsonValue::str("1"));
  file.set("kind", JsonValue::str("multiqubit"));
  file.set("n", JsonValue::integer(state.n_qubits));
  file.set("diag", vector_json(state.diag));
  file.set("sigma", JsonValue::real(state.sigma));
  JsonValue pos = JsonValue::array();
  pos.push(JsonValue::integer(state.coherence_pos.first));
  pos.push(JsonValue::integer(state.coherence_pos.second));
  file.set("coherence_pos", std::move(pos));
  file.set("normalization", JsonValue::real(state.normalization));
  return file;
}

int report_multiqubit(const sepcert::SymmetricNQubitState& state, const std::string& report,
                      const CommonOptions& opts, const std::string& command,
                      double expected_trace, const std::string& emit_path) {
  const sepcert::Tolerance tol = opts.tolerance();
  const bool want_all = report == "all";

  JsonValue json_report = JsonValue::object();
  std::ostringstream text;
  json_report.set("version", JsonValue::str("1"));
  json_report.set("command", JsonValue::str(command));
  json_report.set("n", JsonValue::integer(state.n_qubits));
  text << "n: " << state.n_qubits << "\n";

  const double trace = state.diag.sum();
  const double trace_rel_err =
      std::abs(trace - expected_trace) / std::max(std::abs(expected_trace), 1e-300);
  JsonValue trace_check = JsonValue::object();
  trace_check.set("unnormalized_trace", JsonValue::real(trace));
  trace_check.set("expected", JsonValue::real(expected_trace));
  trace_check.set("relative_error", JsonValue::real(trace_rel_err));
  json_report.set("trace_check", std::move(trace_check));
  text << "trace: " << trace << " (expected " << expected_trace << ", rel err "
       << trace_rel_err << ")\n";

  if (want_all || report == "ppt") {
    const bool ppt = sepcert::is_ppt_all_bipartitions(state, tol);
    json_report.set("ppt_all_bipartitions", JsonValue::boolean(ppt));
    text << "ppt_all_bipartitions: " << (ppt ? "true" : "false") << "\n";
  }
  if (want_all || report == "ranks") {
    const std::vector<int> ranks = sepcert::ranks_profile(state, tol);
    JsonValue arr = JsonValue::array();
    text << "ranks:";
    for (int r : ranks) {
      arr.push(JsonValue::integer(r));
      text << " " << r;
    }
    json_report.set("ranks", std::move(arr));
    text << "\n";
  }
  if (want_all || report == "extremality") {
    const int extremality = sepcert::extremality_dimension(state, tol);
    json_report.set("extremality_dimension", JsonValue::integer(extremality));
    text << "extremality_dimension: " << extremality << "\n";
  }

  if (!emit_path.empty()) {
    std::ofstream out(emit_path);
    if (!out) fail(70, "cannot open emit file: " + emit_path);
    out << multiqubit_state_json(state).dump(2);
    text << "state written to " << emit_path << "\n";
    json_report.set("emitted", JsonValue::str(emit_path));
  }

  write_report(opts, opts.json ? json_report.dump(2) : text.str());
  return 0;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

int run_decompose(const sepcert::DsState& state, const std::string& method,
                  const CommonOptions& opts) {
  const sepcert::Tolerance tol = opts.tolerance();
  const sepcert::CertifyBudget budget = opts.certify_budget();
  std::optional<sepcert::CpFactorization> factor;
  std::string route;

  if (method == "auto") {
    const sepcert::SeparabilityCertificate cert = sepcert::certify(state, budget);
    if (cert.verdict != sepcert::SeparabilityCertificate::Verdict::Separable) {
      fail(3, std::string("state not certified separable (verdict ") +
                  verdict_name(cert.verdict) + ")");
    }
    if (const auto* dec = std::get_if<sepcert::DecompositionEvidence>(&cert.evidence)) {
      factor = dec->factorization;
      route = dec->route;
    } else {
      fail(3,
           "separability was certified by citation only; no explicit factorization "
           "is available within the current budget");
    }
  } else if (method == "d3") {
    if (state.dim() != 3) fail(65, "--method d3 requires d = 3");
    try {
      factor = sepcert::cp_d3_decompose(sepcert::m_matrix(state), tol);
      route = "constructive 3x3 factorization";
    } catch (const sepcert::Error& e) {
      fail(3, std::string("not certified: ") + e.what());
    }
  } else if (method == "rank2") {
    try {
      factor = sepcert::cp_rank2_embed(sepcert::m_matrix(state), tol);
      route = "planar rank-2 embedding";
    } catch (const sepcert::Error& e) {
      fail(3, std::string("not certified: ") + e.what());
    }
  } else if (method == "zeta") {
    const int d = state.dim();
    const int k = budget.cp_search_k_max > 0 ? budget.cp_search_k_max : d * (d + 1) / 2;
    factor = sepcert::cp_search(sepcert::m_matrix(state), k, budget.cp_search_restarts,
                                budget.cp_search_iters, budget.seed);
    if (!factor) fail(3, "not certified: no nonnegative factorization found within budget");
    route = "nonnegative factorization search";
  } else {
    fail(65, "unknown method: " + method);
  }

  const sepcert::SeparableDecomposition dec = sepcert::separable_from_cp(*factor);
  if (!sepcert::verify_decomposition(state, dec, tol)) {
    fail(70, "decomposition failed re-verification");
  }

  JsonValue file = JsonValue::object();
  file.set("version", JsonValue::str("1"));
  file.set("kind", JsonValue::str("separable_decomposition"));
  file.set("d", JsonValue::integer(state.dim()));
  file.set("route", JsonValue::str(route));
  sepcert::DecompositionEvidence ev{route, *factor, dec};
  file.set("decomposition", decomposition_json(ev));
  write_report(opts, file.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sepcert: separability certificates for diagonal symmetric states\n"
      "exit codes: 0 separable, 1 entangled, 2 inconclusive, 3 not certified,\n"
      "64 parse error, 65 bad subset/parameter, 70 numerical failure"};
  app.require_subcommand(1);

  CommonOptions opts;

  std::string analyze_input;
  CLI::App* analyze = app.add_subcommand("analyze", "run the certification pipeline");
  analyze->add_option("input", analyze_input, "state file (JSON)")->required();
  add_common_flags(analyze, &opts, true);
  add_bipartite_input_flags(analyze, &opts);

  std::string witness_input;
  std::string witness_name = "horn";
  std::vector<int> witness_subset;
  CLI::App* witness = app.add_subcommand("witness", "evaluate a copositive witness");
  witness->add_option("input", witness_input, "state file (JSON)")->required();
  witness->add_option("--witness", witness_name, "witness name (horn)");
  witness->add_option("--subset", witness_subset, "principal subset indices")
      ->delimiter(',');
  add_common_flags(witness, &opts, false);
  add_bipartite_input_flags(witness, &opts);

  int family_n = 0;
  double family_z = 0.0;
  double family_sigma = 1.0;
  std::string family_report = "all";
  std::string family_emit;
  CLI::App* family = app.add_subcommand("family", "analyze the odd-N PPT-entangled family");
  family->add_option("--n", family_n, "number of qubits (odd, >= 5)")->required();
  family->add_option("--z", family_z, "family parameter Z > 0")->required();
  family->add_option("--sigma", family_sigma, "coherence sign, +1 or -1");
  family->add_option("--report", family_report, "ranks|ppt|extremality|all");
  family->add_option("--emit", family_emit, "write the state file to this path");
  add_common_flags(family, &opts, false);

  std::string decompose_input;
  std::string decompose_method = "auto";
  CLI::App* decompose = app.add_subcommand("decompose", "write a separable decomposition");
  decompose->add_option("input", decompose_input, "state file (JSON)")->required();
  decompose->add_option("--method", decompose_method, "auto|d3|rank2|zeta");
  add_common_flags(decompose, &opts, true);
  add_bipartite_input_flags(decompose, &opts);

  std::string example_report = "all";
  std::string example_emit;
  CLI::App* example4 = app.add_subcommand("example4", "the printed 4-qubit example");
  example4->add_option("--report", example_report, "ranks|ppt|extremality|all");
  example4->add_option("--emit", example_emit, "write the state file to this path");
  add_common_flags(example4, &opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (app.got_subcommand(analyze)) {
      const LoadedState loaded = load_state_file(analyze_input);
      if (loaded.is_bipartite()) {
        return run_analyze_bipartite(preprocess_bipartite(loaded.bipartite(), opts), opts);
      }
      return run_analyze_multiqubit(loaded.multiqubit(), opts);
    }
    if (app.got_subcommand(witness)) {
      const LoadedState loaded = load_state_file(witness_input);
      if (!loaded.is_bipartite()) fail(65, "witness evaluation needs a bipartite_ds state");
      return run_witness(preprocess_bipartite(loaded.bipartite(), opts), witness_name,
                         witness_subset, opts);
    }
    if (app.got_subcommand(family)) {
      sepcert::SymmetricNQubitState state;
      try {
        state = sepcert::family_rho(family_n, family_z, family_sigma);
      } catch (const sepcert::BadParamError& e) {
        std::string message = e.what();
        if (family_n % 2 == 0) {
          message += " (for the printed 4-qubit example use the example4 subcommand)";
        }
        fail(65, message);
      }
      const int k_half = (family_n - 1) / 2;
      const double expected = 2.0 * std::pow(4.0 + family_z, k_half);
      return report_multiqubit(state, family_report, opts, "family", expected, family_emit);
    }
    if (app.got_subcommand(decompose)) {
      const LoadedState loaded = load_state_file(decompose_input);
      if (!loaded.is_bipartite()) fail(65, "decompose needs a bipartite_ds state");
      return run_decompose(preprocess_bipartite(loaded.bipartite(), opts), decompose_method,
                           opts);
    }
    if (app.got_subcommand(example4)) {
      const sepcert::SymmetricNQubitState state = sepcert::example_4qubit();
      const double expected = state.diag.sum();
      return report_multiqubit(state, example_report, opts, "example4", expected,
                               example_emit);
    }
  } catch (const CliFailure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const sepcert::BadSubsetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const sepcert::BadParamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const sepcert::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 70;
  }
  return 70;
}
