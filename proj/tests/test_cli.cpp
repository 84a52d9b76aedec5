// End-to-end command tests through the embedded entry point: argument
// handling, payload dispatch, report shapes, exit codes, and determinism.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mdil/cli.hpp"
#include "mdil/serialize.hpp"
#include "test_util.hpp"

using namespace mdil;
using json = nlohmann::json;

namespace {

StochasticMatrix oracle_matrix() {
  return StochasticMatrix(2, {0.7, 0.3, 0.4, 0.6});
}

std::string write_tmp(const std::string& name, const std::string& content) {
  auto dir = std::filesystem::temp_directory_path() / "mdil_cli_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream f(path, std::ios::binary);
  f << content;
  return path.string();
}

std::string read_back(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli(const std::vector<std::string>& args, std::string* out_text,
            std::string* err_text = nullptr) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::vector<std::string> check_names(const json& report) {
  std::vector<std::string> names;
  for (const auto& c : report["checks"]) names.push_back(c["name"]);
  return names;
}

bool has_check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"])
    if (c["name"] == name) return true;
  return false;
}

}  // namespace

TEST_CASE("decompose emits the sparse or full decomposition") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"decompose", "--input", input, "--greedy"}, &out) == 0);
  ConvexDecomposition greedy = parse_decomposition(out);
  CHECK(greedy.mode == DecompositionMode::Sparse);
  REQUIRE(greedy.terms.size() == 3);
  CHECK(greedy.terms[0].label == 1);
  CHECK(greedy.terms[0].weight == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(greedy.terms[1].label == 2);
  CHECK(greedy.terms[1].weight == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(greedy.terms[2].label == 0);
  CHECK(greedy.terms[2].weight == doctest::Approx(0.1).epsilon(1e-12));

  REQUIRE(run_cli({"decompose", "--input", input}, &out) == 0);
  ConvexDecomposition full = parse_decomposition(out);
  CHECK(full.mode == DecompositionMode::Full);
  REQUIRE(full.terms.size() == 4);
  CHECK(full.terms[0].weight == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(full.terms[1].weight == doctest::Approx(0.42).epsilon(1e-12));
  CHECK(full.terms[2].weight == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(full.terms[3].weight == doctest::Approx(0.18).epsilon(1e-12));
}

TEST_CASE("argument errors exit with code 2 and a message") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));
  std::string out, err;

  CHECK(run_cli({"decompose", "--input", input, "--greedy", "--full"}, &out,
                &err) == 2);
  CHECK(err.find("mutually exclusive") != std::string::npos);

  CHECK(run_cli({"decompose"}, &out, &err) == 2);
  CHECK_FALSE(err.empty());

  CHECK(run_cli({"decompose", "--input", "/nonexistent/file.json"}, &out,
                &err) == 2);
  CHECK_FALSE(err.empty());

  CHECK(run_cli({"frobnicate", "--input", input}, &out, &err) == 2);

  CHECK(run_cli({"dilate", "--input", input, "--mode", "tiny"}, &out, &err) ==
        2);
  CHECK(err.find("mode") != std::string::npos);

  // decompose wants a matrix payload
  std::string dilation =
      write_tmp("spec.json", write_dilation(universal_dilation(oracle_matrix())));
  CHECK(run_cli({"decompose", "--input", dilation}, &out, &err) == 2);
}

TEST_CASE("help exits cleanly") {
  std::string out, err;
  CHECK(run_cli({"--help"}, &out, &err) == 0);
  CHECK(out.find("decompose") != std::string::npos);
  CHECK(out.find("verify-quantum") != std::string::npos);
}

TEST_CASE("dilate emits a replayable dilation") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"dilate", "--input", input, "--mode", "minimal"}, &out) ==
          0);
  DilationSpec mini = parse_dilation(out);
  CHECK(mini.alphabet().mode() == AlphabetMode::Minimal);
  CHECK(mini.alphabet().labels() == std::vector<MapLabel>{0, 1, 2});
  StochasticMatrix induced =
      induced_transition(mini.coupling(), mini.q(1));
  CHECK(induced.max_abs_diff(oracle_matrix()) <= 1e-12);

  REQUIRE(run_cli({"dilate", "--input", input}, &out) == 0);
  DilationSpec uni = parse_dilation(out);
  CHECK(uni.alphabet().mode() == AlphabetMode::Universal);
  CHECK(uni.alphabet().num_labels() == 4);
  CHECK(induced_transition(uni.coupling(), uni.q(1))
            .max_abs_diff(oracle_matrix()) <= 1e-12);
}

TEST_CASE("simulate is seeded and deterministic") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));
  std::vector<std::string> args{"simulate",       "--input", input,
                                "--trajectories", "5",       "--horizon",
                                "4",              "--seed",  "99"};

  std::string first, second;
  REQUIRE(run_cli(args, &first) == 0);
  REQUIRE(run_cli(args, &second) == 0);
  CHECK(first == second);

  size_t lines = 0;
  for (char c : first) lines += c == '\n';
  CHECK(lines == 5);
  json row = json::parse(first.substr(0, first.find('\n')));
  CHECK(row["horizon"] == 4);
  CHECK(row["states"].size() == 5);  // includes the start state
  CHECK(row["inputs"].size() == 4);

  std::string other;
  args.back() = "100";
  REQUIRE(run_cli(args, &other) == 0);
  CHECK(other != first);

  std::string out, err;
  CHECK(run_cli({"simulate", "--input", input, "--start", "5"}, &out, &err) ==
        2);
}

TEST_CASE("verify-classical passes on its own dilations") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"verify-classical", "--input", input, "--horizon", "3",
                   "--no-timestamp"},
                  &out) == 0);
  json report = json::parse(out);
  CHECK(report["all_pass"] == true);
  CHECK(report["command"] == "verify-classical");
  CHECK_FALSE(report.contains("timestamp"));
  for (const char* name :
       {"induced_transition", "markov_conditional", "marginal",
        "alpha_round_trip", "cocycle_consistency"})
    CHECK(has_check(report, name));

  // deterministic bytes without a timestamp
  std::string again;
  REQUIRE(run_cli({"verify-classical", "--input", input, "--horizon", "3",
                   "--no-timestamp"},
                  &again) == 0);
  CHECK(again == out);

  // an inhomogeneous two-step evolution in minimal mode
  std::vector<StochasticMatrix> steps{
      mdil_test::random_sparse_stochastic(2, 300, 0),
      mdil_test::random_sparse_stochastic(2, 300, 1)};
  std::string seq_path =
      write_tmp("seq.json", write_sequence(MatrixSequence(steps)));
  REQUIRE(run_cli({"verify-classical", "--input", seq_path, "--mode",
                   "minimal", "--no-timestamp"},
                  &out) == 0);
  CHECK(json::parse(out)["all_pass"] == true);

  // timestamp present by default
  REQUIRE(run_cli({"verify-classical", "--input", input, "--horizon", "2"},
                  &out) == 0);
  CHECK(json::parse(out).contains("timestamp"));
}

TEST_CASE("verify-quantum passes and reports every identity") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"verify-quantum", "--input", input, "--no-timestamp"},
                  &out) == 0);
  json report = json::parse(out);
  CHECK(report["all_pass"] == true);
  for (const char* name :
       {"unitality", "extension", "one_step_dilation", "flow_dilation",
        "cqd1_indicators", "cqd2_indicators", "cqd2_polynomial",
        "davis_equivalence"})
    CHECK(has_check(report, name));

  // a universal three-state dilation exceeds the dense caps; the wide
  // checks are skipped and recorded, everything else still passes
  std::string three = write_tmp(
      "three.json", write_matrix(mdil_test::random_stochastic(3, 310, 0)));
  REQUIRE(run_cli({"verify-quantum", "--input", three, "--mode", "universal",
                   "--no-timestamp"},
                  &out) == 0);
  json wide = json::parse(out);
  CHECK(wide["all_pass"] == true);
  CHECK(has_check(wide, "flow_skipped"));

  // inhomogeneous input has no single channel to verify
  std::vector<StochasticMatrix> steps{
      mdil_test::random_sparse_stochastic(2, 310, 1),
      mdil_test::random_sparse_stochastic(2, 310, 2)};
  std::string seq_path =
      write_tmp("seq2.json", write_sequence(MatrixSequence(steps)));
  std::string err;
  CHECK(run_cli({"verify-quantum", "--input", seq_path}, &out, &err) == 2);
  CHECK_FALSE(err.empty());
}

TEST_CASE("corrupted input laws are caught against the target") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"dilate", "--input", input, "--mode", "minimal"}, &out) ==
          0);
  json spec = json::parse(out);
  std::swap(spec["q"][0][0], spec["q"][0][1]);  // still a distribution
  std::string tampered = write_tmp("tampered.json", spec.dump());

  // classical: the induced transitions no longer match the target
  REQUIRE(run_cli({"verify-classical", "--input", tampered, "--target", input,
                   "--horizon", "2", "--no-timestamp"},
                  &out) == 1);
  json report = json::parse(out);
  CHECK(report["all_pass"] == false);
  bool induced_failed = false;
  for (const auto& c : report["checks"])
    if (c["name"] == "induced_transition" && c["pass"] == false)
      induced_failed = true;
  CHECK(induced_failed);

  // quantum: the channel no longer extends the target matrix
  REQUIRE(run_cli({"verify-quantum", "--input", tampered, "--target", input,
                   "--no-timestamp"},
                  &out) == 1);
  json qreport = json::parse(out);
  CHECK(qreport["all_pass"] == false);
  bool extension_failed = false;
  for (const auto& c : qreport["checks"])
    if (c["name"] == "extension" && c["pass"] == false)
      extension_failed = true;
  CHECK(extension_failed);

  // without a target the tampered dilation is self-consistent
  REQUIRE(run_cli({"verify-classical", "--input", tampered, "--horizon", "2",
                   "--no-timestamp"},
                  &out) == 0);

  // --target applies to dilation inputs only
  std::string err;
  CHECK(run_cli({"verify-classical", "--input", input, "--target", input},
                &out, &err) == 2);
}

TEST_CASE("tolerance override, pretty output, and file output") {
  std::string input = write_tmp("oracle.json", write_matrix(oracle_matrix()));

  std::string out;
  REQUIRE(run_cli({"verify-classical", "--input", input, "--horizon", "2",
                   "--tol", "1e-3", "--no-timestamp"},
                  &out) == 0);
  json report = json::parse(out);
  for (const auto& c : report["checks"])
    if (c["name"] == "induced_transition")
      CHECK(c["tolerance"].get<double>() == 1e-3);

  REQUIRE(run_cli({"decompose", "--input", input, "--pretty"}, &out) == 0);
  CHECK(out.substr(0, 2) == "{\n");

  auto out_path = std::filesystem::temp_directory_path() /
                  "mdil_cli_tests" / "report_out.json";
  REQUIRE(run_cli({"verify-classical", "--input", input, "--horizon", "2",
                   "--no-timestamp", "--out", out_path.string()},
                  &out) == 0);
  CHECK(out.empty());
  json from_file = json::parse(read_back(out_path.string()));
  CHECK(from_file["all_pass"] == true);
}
