#include "mdil/serialize.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <utility>

#include "json.hpp"

namespace mdil {

namespace {

using nlohmann::json;

json parse_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw BadInput("malformed JSON");
  if (!j.is_object()) throw BadInput("top-level JSON value must be an object");
  return j;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw BadInput(std::string("missing field \"") + key + "\"");
  return *it;
}

int int_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number_integer())
    throw BadInput(std::string("field \"") + key + "\" must be an integer");
  std::int64_t raw = v.get<std::int64_t>();
  if (raw < INT32_MIN || raw > INT32_MAX)
    throw BadInput(std::string("field \"") + key + "\" out of range");
  return static_cast<int>(raw);
}

bool bool_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_boolean())
    throw BadInput(std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string())
    throw BadInput(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const char* what) {
  if (!v.is_array()) throw BadInput(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number())
      throw BadInput(std::string(what) + " entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> int_array(const json& v, const char* what) {
  if (!v.is_array()) throw BadInput(std::string(what) + " must be an array");
  std::vector<int> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number_integer())
      throw BadInput(std::string(what) + " entries must be integers");
    std::int64_t raw = x.get<std::int64_t>();
    if (raw < INT32_MIN || raw > INT32_MAX)
      throw BadInput(std::string(what) + " entry out of range");
    out.push_back(static_cast<int>(raw));
  }
  return out;
}

StochasticMatrix matrix_from_rows(int n, const json& rows, const char* what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw BadInput(std::string(what) + " must be an array of n rows");
  std::vector<double> entries;
  entries.reserve(static_cast<size_t>(n) * n);
  for (const json& row : rows) {
    std::vector<double> r = number_array(row, "matrix row");
    if (static_cast<int>(r.size()) != n)
      throw BadInput(std::string(what) + " rows must have n entries");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return StochasticMatrix(n, std::move(entries));
}

json rows_of(const StochasticMatrix& p) {
  json rows = json::array();
  for (int i = 0; i < p.n(); ++i) {
    json row = json::array();
    for (int j = 0; j < p.n(); ++j) row.push_back(p(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string dump(const json& j, bool pretty) {
  return pretty ? j.dump(2) : j.dump();
}

std::string utc_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

PayloadKind payload_kind(const std::string& text) {
  json j = parse_text(text);
  if (j.contains("rows")) return PayloadKind::Matrix;
  if (j.contains("matrices")) return PayloadKind::Sequence;
  if (j.contains("terms")) return PayloadKind::Decomposition;
  if (j.contains("coupling")) return PayloadKind::Dilation;
  throw BadInput(
      "unrecognized payload: expected one of \"rows\", \"matrices\", "
      "\"terms\", \"coupling\"");
}

StochasticMatrix parse_matrix(const std::string& text) {
  json j = parse_text(text);
  int n = int_field(j, "n");
  if (n <= 0) throw BadInput("field \"n\" must be positive");
  return matrix_from_rows(n, field(j, "rows"), "\"rows\"");
}

MatrixSequence parse_sequence(const std::string& text) {
  json j = parse_text(text);
  if (j.contains("rows")) return MatrixSequence(parse_matrix(text));
  int n = int_field(j, "n");
  if (n <= 0) throw BadInput("field \"n\" must be positive");
  bool homogeneous = bool_field(j, "homogeneous");
  const json& mats = field(j, "matrices");
  if (!mats.is_array() || mats.empty())
    throw BadInput("field \"matrices\" must be a nonempty array");
  std::vector<StochasticMatrix> steps;
  steps.reserve(mats.size());
  for (const json& m : mats)
    steps.push_back(matrix_from_rows(n, m, "sequence matrix"));
  if (homogeneous) {
    if (steps.size() != 1)
      throw BadInput("homogeneous sequences carry exactly one matrix");
    return MatrixSequence(std::move(steps.front()));
  }
  return MatrixSequence(std::move(steps));
}

ConvexDecomposition parse_decomposition(const std::string& text) {
  json j = parse_text(text);
  std::string mode = string_field(j, "mode");
  if (mode != "full" && mode != "sparse")
    throw BadInput("field \"mode\" must be \"full\" or \"sparse\"");
  const json& terms = field(j, "terms");
  if (!terms.is_array() || terms.empty())
    throw BadInput("field \"terms\" must be a nonempty array");
  ConvexDecomposition dec;
  dec.mode = mode == "full" ? DecompositionMode::Full
                            : DecompositionMode::Sparse;
  for (const json& term : terms) {
    if (!term.is_object())
      throw BadInput("decomposition terms must be objects");
    const json& w = field(term, "weight");
    if (!w.is_number()) throw BadInput("term weight must be a number");
    std::vector<int> beta = int_array(field(term, "beta"), "\"beta\"");
    if (beta.empty()) throw BadInput("term image must be nonempty");
    if (dec.n == 0) dec.n = static_cast<int>(beta.size());
    if (static_cast<int>(beta.size()) != dec.n)
      throw BadInput("term images must all have the same length");
    for (int v : beta)
      if (v < 0 || v >= dec.n)
        throw BadInput("term image value outside the state space");
    dec.terms.push_back(
        {w.get<double>(), label_of_map(DeterministicMap(std::move(beta)))});
  }
  dec.validate();
  return dec;
}

DilationSpec parse_dilation(const std::string& text) {
  json j = parse_text(text);
  int n = int_field(j, "n");
  if (n <= 0) throw BadInput("field \"n\" must be positive");
  std::string mode = string_field(j, "mode");
  if (mode != "universal" && mode != "minimal")
    throw BadInput("field \"mode\" must be \"universal\" or \"minimal\"");

  const json& labels_json = field(j, "labels");
  if (!labels_json.is_array() || labels_json.empty())
    throw BadInput("field \"labels\" must be a nonempty array");
  std::vector<MapLabel> labels;
  labels.reserve(labels_json.size());
  for (const json& l : labels_json) {
    if (!l.is_number_integer())
      throw BadInput("\"labels\" entries must be integers");
    labels.push_back(l.get<MapLabel>());
  }

  EnvironmentAlphabet alphabet;
  if (mode == "universal") {
    alphabet = EnvironmentAlphabet::universal(n);
    if (labels != alphabet.labels())
      throw BadInput("universal alphabet must list every label in order");
  } else {
    alphabet = EnvironmentAlphabet::minimal(n, std::move(labels));
  }

  Coupling coupling(alphabet,
                    int_array(field(j, "coupling"), "\"coupling\""));

  bool homogeneous = bool_field(j, "homogeneous");
  const json& q = field(j, "q");
  if (!q.is_array() || q.empty())
    throw BadInput("field \"q\" must be a nonempty array");
  if (homogeneous && q.size() != 1)
    throw BadInput("homogeneous dilations carry exactly one input law");
  std::vector<Distribution> inputs;
  inputs.reserve(q.size());
  for (const json& law : q) {
    std::vector<double> w = number_array(law, "input law");
    if (static_cast<int>(w.size()) != alphabet.size())
      throw BadInput("input laws must have one weight per symbol");
    inputs.emplace_back(std::move(w), kWeightSumTol);
  }

  std::optional<Distribution> negative_side;
  if (j.contains("negative_side")) {
    std::vector<double> w = number_array(j["negative_side"], "negative side");
    if (static_cast<int>(w.size()) != alphabet.size())
      throw BadInput("negative side law must have one weight per symbol");
    negative_side = Distribution(std::move(w), kWeightSumTol);
  }

  return DilationSpec(std::move(coupling), std::move(inputs), homogeneous,
                      std::move(negative_side));
}

std::string write_matrix(const StochasticMatrix& p, bool pretty) {
  json j;
  j["n"] = p.n();
  j["rows"] = rows_of(p);
  return dump(j, pretty);
}

std::string write_sequence(const MatrixSequence& seq, bool pretty) {
  json j;
  j["n"] = seq.n();
  j["homogeneous"] = seq.homogeneous();
  json mats = json::array();
  int count = seq.homogeneous() ? 1 : seq.horizon();
  for (int t = 1; t <= count; ++t) mats.push_back(rows_of(seq.at(t)));
  j["matrices"] = std::move(mats);
  return dump(j, pretty);
}

std::string write_decomposition(const ConvexDecomposition& dec, bool pretty) {
  json j;
  j["mode"] = dec.mode == DecompositionMode::Full ? "full" : "sparse";
  json terms = json::array();
  for (const auto& term : dec.terms) {
    json t;
    t["weight"] = term.weight;
    t["beta"] = map_from_label(term.label, dec.n).image;
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return dump(j, pretty);
}

std::string write_dilation(const DilationSpec& spec, bool pretty) {
  const EnvironmentAlphabet& a = spec.alphabet();
  json j;
  j["n"] = a.n();
  j["mode"] = a.mode() == AlphabetMode::Universal ? "universal" : "minimal";
  j["labels"] = a.labels();
  j["coupling"] = spec.coupling().forward_table();
  j["homogeneous"] = spec.homogeneous();
  json q = json::array();
  for (const Distribution& law : spec.inputs()) q.push_back(law.weights());
  j["q"] = std::move(q);
  if (spec.negative_side_override())
    j["negative_side"] = spec.negative_side_override()->weights();
  return dump(j, pretty);
}

std::string write_kraus(const KrausChannel& chan, bool pretty) {
  json j;
  j["n"] = chan.dim();
  json ops = json::array();
  for (const CMatrix& k : chan.ops()) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < k.cols(); ++c)
        row.push_back(json::array({k(r, c).real(), k(r, c).imag()}));
      rows.push_back(std::move(row));
    }
    ops.push_back(std::move(rows));
  }
  j["kraus"] = std::move(ops);
  return dump(j, pretty);
}

std::string write_report(const VerificationReport& report,
                         const std::string& command, bool timestamp,
                         bool pretty) {
  json j;
  j["command"] = command;
  if (timestamp) j["timestamp"] = utc_now();
  j["all_pass"] = report.all_pass();
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    json e;
    e["name"] = c.name;
    e["t"] = c.t;
    e["tolerance"] = c.tolerance;
    e["max_abs_deviation"] = c.max_abs_deviation;
    e["pass"] = c.pass;
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(std::move(e));
  }
  j["checks"] = std::move(checks);
  return dump(j, pretty);
}

std::string write_trajectories(const std::vector<TrajectoryRecord>& records) {
  std::string out;
  for (const TrajectoryRecord& r : records) {
    json j;
    j["start"] = r.start;
    j["horizon"] = r.horizon;
    j["inputs"] = r.inputs;
    j["states"] = r.states;
    j["counts"] = r.counts;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace mdil
