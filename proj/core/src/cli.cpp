#include "mdil/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "mdil/chain.hpp"
#include "mdil/decompose.hpp"
#include "mdil/dilation.hpp"
#include "mdil/errors.hpp"
#include "mdil/markov.hpp"
#include "mdil/quantum.hpp"
#include "mdil/report.hpp"
#include "mdil/rng.hpp"
#include "mdil/serialize.hpp"

namespace mdil::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BadInput("cannot read input file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& text, const std::string& out_path,
          std::ostream& out) {
  std::string payload = text;
  if (payload.empty() || payload.back() != '\n') payload += '\n';
  if (out_path.empty()) {
    out << payload;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw BadInput("cannot write output file " + out_path);
  f << payload;
}

AlphabetMode parse_alphabet_mode(const std::string& mode) {
  if (mode == "universal") return AlphabetMode::Universal;
  if (mode == "minimal") return AlphabetMode::Minimal;
  throw BadInput("mode must be \"universal\" or \"minimal\"");
}

// The dilation under test plus the evolution it must reproduce.  A matrix
// or sequence input is itself the target; a dilation input is verified
// against --target when given, else against its own induced transitions.
struct LoadedProblem {
  DilationSpec spec;
  MatrixSequence target;
};

LoadedProblem load_problem(const std::string& input_text,
                           const std::string& target_text,
                           AlphabetMode mode) {
  PayloadKind kind = payload_kind(input_text);
  if (kind == PayloadKind::Matrix || kind == PayloadKind::Sequence) {
    if (!target_text.empty())
      throw BadInput("--target applies only to dilation inputs");
    MatrixSequence target = parse_sequence(input_text);
    DilationSpec spec = make_dilation(target, mode);
    return {std::move(spec), std::move(target)};
  }
  if (kind != PayloadKind::Dilation)
    throw BadInput("input must be a matrix, a sequence, or a dilation");
  DilationSpec spec = parse_dilation(input_text);
  MatrixSequence target;
  if (!target_text.empty()) {
    target = parse_sequence(target_text);
    if (target.n() != spec.alphabet().n())
      throw BadInput("target state space differs from the dilation's");
  } else if (spec.homogeneous()) {
    target = MatrixSequence(induced_transition(spec.coupling(), spec.q(1)));
  } else {
    std::vector<StochasticMatrix> steps;
    for (int t = 1; t <= spec.horizon(); ++t)
      steps.push_back(induced_transition(spec.coupling(), spec.q(t)));
    target = MatrixSequence(std::move(steps));
  }
  return {std::move(spec), std::move(target)};
}

int effective_horizon(int horizon, const LoadedProblem& problem) {
  int h = horizon;
  if (!problem.target.homogeneous())
    h = std::min(h, problem.target.horizon());
  if (problem.spec.horizon() >= 0) h = std::min(h, problem.spec.horizon());
  return h;
}

int seeded_int(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
               int bound) {
  int v = static_cast<int>(counter_uniform(seed, stream, step) * bound);
  return std::min(v, bound - 1);
}

CMatrix seeded_matrix(int n, std::uint64_t seed, std::uint64_t stream) {
  CMatrix a(n, n);
  std::uint64_t step = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double re = 2.0 * counter_uniform(seed, stream, step++) - 1.0;
      double im = 2.0 * counter_uniform(seed, stream, step++) - 1.0;
      a(i, j) = Cplx(re, im);
    }
  return a;
}

// Exact round trips alpha^s then alpha^{-s} (and the reverse order) on
// seeded random states materialized over [1-T, T].
VerificationReport check_alpha_round_trip(const DilationSpec& spec,
                                          int horizon, std::uint64_t seed,
                                          int samples) {
  VerificationReport report;
  int gsize = spec.alphabet().size();
  int n = spec.alphabet().n();
  for (int s = 1; s <= horizon; ++s) {
    int mismatches = 0;
    std::string where;
    for (int r = 0; r < samples; ++r) {
      std::uint64_t stream = (static_cast<std::uint64_t>(s) << 32) |
                             static_cast<std::uint64_t>(r);
      std::vector<int> symbols(static_cast<size_t>(2 * horizon));
      for (size_t c = 0; c < symbols.size(); ++c)
        symbols[c] = seeded_int(seed, stream, c, gsize);
      GlobalState z{seeded_int(seed, stream, symbols.size(), n),
                    EnvironmentWindow(1 - horizon, symbols), 0};
      GlobalState fwd = alpha_apply(spec, alpha_apply(spec, z, s), -s);
      GlobalState bwd = alpha_apply(spec, alpha_apply(spec, z, -s), s);
      if (!(fwd == z) || !(bwd == z)) {
        if (mismatches == 0) where = "sample " + std::to_string(r);
        ++mismatches;
      }
    }
    report.add("alpha_round_trip", s, 0.0,
               static_cast<double>(mismatches), where);
  }
  return report;
}

// cocycle_apply must reproduce alpha_apply's system component on states
// materialized over [1, T] only.
VerificationReport check_cocycle(const DilationSpec& spec, int horizon,
                                 std::uint64_t seed, int samples) {
  VerificationReport report;
  int gsize = spec.alphabet().size();
  int n = spec.alphabet().n();
  for (int t = 1; t <= horizon; ++t) {
    int mismatches = 0;
    std::string where;
    for (int r = 0; r < samples; ++r) {
      std::uint64_t stream = 0x100000000ULL * static_cast<std::uint64_t>(t) +
                             static_cast<std::uint64_t>(r);
      std::vector<int> symbols(static_cast<size_t>(horizon));
      for (size_t c = 0; c < symbols.size(); ++c)
        symbols[c] = seeded_int(seed, stream, c, gsize);
      GlobalState z{seeded_int(seed, stream, symbols.size(), n),
                    EnvironmentWindow(1, symbols), 0};
      GlobalState via_cocycle = cocycle_apply(spec, z, t);
      GlobalState via_alpha = alpha_apply(spec, z, t);
      if (via_cocycle.system != via_alpha.system) {
        if (mismatches == 0) where = "sample " + std::to_string(r);
        ++mismatches;
      }
    }
    report.add("cocycle_consistency", t, 0.0,
               static_cast<double>(mismatches), where);
  }
  return report;
}

VerificationReport check_marginals(const DilationSpec& spec,
                                   const MatrixSequence& target, int horizon,
                                   double tol) {
  VerificationReport report;
  int n = target.n();
  for (int t = 1; t <= horizon; ++t) {
    double worst = 0.0;
    std::string where;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        std::vector<double> f(static_cast<size_t>(n), 0.0);
        f[static_cast<size_t>(j)] = 1.0;
        MarginalCheck mc = marginal_consistency(spec, target, f, t, k);
        if (mc.deviation > worst) {
          worst = mc.deviation;
          where = "start " + std::to_string(k) + ", f = indicator of state " +
                  std::to_string(j);
        }
      }
    report.add("marginal", t, tol, worst, worst > tol ? where : "");
  }
  return report;
}

int run_decompose(const std::string& input_text, bool greedy, bool pretty,
                  const std::string& out_path, std::ostream& out) {
  StochasticMatrix p = parse_matrix(input_text);
  ConvexDecomposition dec = greedy ? decompose_greedy(p) : decompose_full(p);
  emit(write_decomposition(dec, pretty), out_path, out);
  return 0;
}

int run_dilate(const std::string& input_text, AlphabetMode mode, bool pretty,
               const std::string& out_path, std::ostream& out) {
  MatrixSequence seq = parse_sequence(input_text);
  DilationSpec spec = make_dilation(seq, mode);
  emit(write_dilation(spec, pretty), out_path, out);
  return 0;
}

int run_simulate(const std::string& input_text, AlphabetMode mode, int start,
                 int horizon, std::uint64_t seed, int trajectories,
                 const std::string& out_path, std::ostream& out) {
  DilationSpec spec =
      payload_kind(input_text) == PayloadKind::Dilation
          ? parse_dilation(input_text)
          : make_dilation(parse_sequence(input_text), mode);
  if (start < 0 || start >= spec.alphabet().n())
    throw BadInput("start state outside the state space");
  std::vector<TrajectoryRecord> records =
      simulate(spec, start, horizon, seed, trajectories);
  emit(write_trajectories(records), out_path, out);
  return 0;
}

int finish_verify(const VerificationReport& report, const std::string& command,
                  bool timestamp, bool pretty, const std::string& out_path,
                  std::ostream& out) {
  emit(write_report(report, command, timestamp, pretty), out_path, out);
  return report.all_pass() ? 0 : 1;
}

int run_verify_classical(const std::string& input_text,
                         const std::string& target_text, AlphabetMode mode,
                         int horizon, std::uint64_t seed, double tol,
                         bool timestamp, bool pretty,
                         const std::string& out_path, std::ostream& out) {
  LoadedProblem problem = load_problem(input_text, target_text, mode);
  int h = effective_horizon(horizon, problem);
  VerificationReport report;
  report.merge(verify_markov(problem.spec, problem.target, h, tol));
  report.merge(check_marginals(problem.spec, problem.target, h, tol));
  report.merge(check_alpha_round_trip(problem.spec, std::max(h, 1), seed, 50));
  report.merge(check_cocycle(problem.spec, std::max(h, 1), seed, 50));
  return finish_verify(report, "verify-classical", timestamp, pretty,
                       out_path, out);
}

int run_verify_quantum(const std::string& input_text,
                       const std::string& target_text, AlphabetMode mode,
                       int horizon, std::uint64_t seed, double tol,
                       double flow_tol, bool timestamp, bool pretty,
                       const std::string& out_path, std::ostream& out) {
  LoadedProblem problem = load_problem(input_text, target_text, mode);
  if (!problem.spec.homogeneous() || !problem.target.homogeneous())
    throw BadInput("quantum verification needs a homogeneous evolution");
  const StochasticMatrix& p = problem.target.at(1);
  const Coupling& phi = problem.spec.coupling();
  UnitaryV v(phi);
  CVector upsilon = build_env_vector(problem.spec.q(1));
  int n = v.n();

  VerificationReport report;

  // unitality: recompute sum K'K - 1 (construction already enforces it)
  KrausChannel chan = kraus_channel(v, upsilon);
  CMatrix unit_sum = CMatrix::Zero(n, n);
  for (const CMatrix& k : chan.ops()) unit_sum += k.adjoint() * k;
  report.add("unitality", -1, tol,
             max_abs(unit_sum - CMatrix::Identity(n, n)));

  report.merge(verify_cms_extension(chan, p, tol));

  // one-step dilation identity on seeded random observables
  {
    double worst = 0.0;
    std::string where;
    CMatrix vd = v.dense();
    for (int r = 0; r < 20; ++r) {
      CMatrix a = seeded_matrix(n, seed, static_cast<std::uint64_t>(r));
      CMatrix lhs = conditional_expectation(
          vd.adjoint() * kron(a, CMatrix::Identity(v.gdim(), v.gdim())) * vd,
          upsilon);
      double dev = max_abs(lhs - chan.apply(a));
      if (dev > worst) {
        worst = dev;
        where = "sample " + std::to_string(r);
      }
    }
    report.add("one_step_dilation", 1, tol, worst, worst > tol ? where : "");
  }

  // flow versus channel powers on matrix units, within the dense cap
  for (int t = 1; t <= std::min(horizon, 3); ++t) {
    bool feasible = true;
    double worst = 0.0;
    std::string where;
    for (int i = 0; i < n && feasible; ++i)
      for (int j = 0; j < n && feasible; ++j) {
        CMatrix a = CMatrix::Zero(n, n);
        a(i, j) = 1.0;
        try {
          FlowResult fr = flow(v, upsilon, a, t);
          if (fr.dilation_deviation > worst) {
            worst = fr.dilation_deviation;
            where = "matrix unit (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")";
          }
        } catch (const DimensionTooLarge&) {
          feasible = false;
        }
      }
    if (!feasible) {
      report.add_info("flow_skipped", t, 0.0,
                      "dense flow for this alphabet exceeds the size cap");
      break;
    }
    report.add("flow_dilation", t, flow_tol, worst,
               worst > flow_tol ? where : "");
  }

  // diagonal transport identities for every window indicator at once
  for (int width = 1; width <= 2; ++width)
    for (int t = 1; t <= std::min(horizon, 2); ++t) {
      try {
        report.merge(check_cqd1_indicators(phi, v, 1, width, t, tol));
      } catch (const DimensionTooLarge&) {
        report.add_info("cqd1_skipped", t,
                        static_cast<double>(width),
                        "window width " + std::to_string(width) +
                            " exceeds the index cap at this horizon");
      }
    }

  // classical-versus-quantum expectations: exhaustive indicators on the
  // single-site window, one fixed two-factor polynomial
  {
    int m = v.gdim();
    double worst = 0.0;
    std::string where;
    for (int k = 0; k < n; ++k) {
      std::int64_t configs = static_cast<std::int64_t>(n) * m;
      for (std::int64_t c = 0; c < configs; ++c) {
        DiagonalObservable f = indicator_observable(n, m, 1, 1, c);
        Polynomial eta{{{1.0, {1}}}};
        VerificationReport sub = check_cqd2(problem.spec, k, {f}, eta, tol);
        double dev = sub.max_deviation();
        if (dev > worst) {
          worst = dev;
          where = "start " + std::to_string(k) + ", configuration " +
                  std::to_string(c);
        }
      }
    }
    report.add("cqd2_indicators", -1, tol, worst, worst > tol ? where : "");

    DiagonalObservable f1 = indicator_observable(n, m, 1, 1, 0);
    DiagonalObservable f2{1, 0, n, m, {}};
    f2.values.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) f2.values[static_cast<size_t>(i)] = i + 0.5;
    Polynomial eta{{{3.0, {1, 1}}, {-1.0, {0, 2}}, {0.5, {}}}};
    double worst_poly = 0.0;
    for (int k = 0; k < n; ++k) {
      VerificationReport sub =
          check_cqd2(problem.spec, k, {f1, f2}, eta, tol);
      worst_poly = std::max(worst_poly, sub.max_deviation());
    }
    report.add("cqd2_polynomial", -1, tol, worst_poly);
  }

  // Davis family of the target decomposition defines the same channel
  {
    KrausChannel davis = davis_channel(decompose_greedy(p));
    double worst = 0.0;
    std::string where;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        CMatrix a = CMatrix::Zero(n, n);
        a(i, j) = 1.0;
        double dev = max_abs(davis.apply(a) - chan.apply(a));
        if (dev > worst) {
          worst = dev;
          where = "matrix unit (" + std::to_string(i) + ", " +
                  std::to_string(j) + ")";
        }
      }
    report.add("davis_equivalence", -1, tol, worst, worst > tol ? where : "");
  }

  return finish_verify(report, "verify-quantum", timestamp, pretty, out_path,
                       out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Classical and quantum dilations of finite-state Markov "
               "evolutions"};
  app.require_subcommand(1);

  std::string input_path, target_path, out_path, mode_name;
  std::uint64_t seed = 0;
  int horizon = 3;
  int trajectories = 1;
  int start = 0;
  double tol = -1.0;
  bool pretty = false, no_timestamp = false, greedy = false, full = false;

  auto add_common = [&](CLI::App* sub, bool with_mode) {
    sub->add_option("--input", input_path, "input JSON file")->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_flag("--pretty", pretty, "indent JSON output");
    if (with_mode)
      sub->add_option("--mode", mode_name,
                      "alphabet mode: universal or minimal");
  };

  CLI::App* cmd_decompose = app.add_subcommand(
      "decompose", "convex decomposition into deterministic matrices");
  add_common(cmd_decompose, false);
  cmd_decompose->add_flag("--greedy", greedy,
                          "sparse greedy decomposition (at most N^2-N+1 "
                          "terms)");
  cmd_decompose->add_flag("--full", full,
                          "product-formula decomposition over all N^N maps");

  CLI::App* cmd_dilate =
      app.add_subcommand("dilate", "emit the dilation of an evolution");
  add_common(cmd_dilate, true);

  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "sample seeded trajectories of the dilated chain");
  add_common(cmd_simulate, true);
  cmd_simulate->add_option("--horizon", horizon, "number of steps")
      ->check(CLI::NonNegativeNumber);
  cmd_simulate->add_option("--seed", seed, "random seed");
  cmd_simulate
      ->add_option("--trajectories", trajectories, "number of trajectories")
      ->check(CLI::PositiveNumber);
  cmd_simulate->add_option("--start", start, "start state")
      ->check(CLI::NonNegativeNumber);

  auto add_verify = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, true);
    sub->add_option("--target", target_path,
                    "evolution the dilation must reproduce (dilation inputs "
                    "only)");
    sub->add_option("--horizon", horizon, "largest time checked")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "random seed for sampled checks");
    sub->add_option("--tol", tol, "tolerance override for every check")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", no_timestamp,
                  "omit the report timestamp so equal runs are "
                  "byte-identical");
    return sub;
  };
  CLI::App* cmd_vc = add_verify(
      "verify-classical",
      "Markov property, marginal consistency, and dynamics round trips");
  CLI::App* cmd_vq = add_verify(
      "verify-quantum",
      "extension, dilation identities, flow, and transport checks");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("mdil");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    std::string input_text = read_file(input_path);
    std::string target_text =
        target_path.empty() ? std::string() : read_file(target_path);

    if (app.got_subcommand(cmd_decompose)) {
      if (greedy && full)
        throw BadInput("--greedy and --full are mutually exclusive");
      return run_decompose(input_text, greedy, pretty, out_path, out);
    }

    if (app.got_subcommand(cmd_dilate)) {
      AlphabetMode mode = mode_name.empty() ? AlphabetMode::Universal
                                            : parse_alphabet_mode(mode_name);
      return run_dilate(input_text, mode, pretty, out_path, out);
    }

    if (app.got_subcommand(cmd_simulate)) {
      AlphabetMode mode = mode_name.empty() ? AlphabetMode::Universal
                                            : parse_alphabet_mode(mode_name);
      return run_simulate(input_text, mode, start, horizon, seed,
                          trajectories, out_path, out);
    }

    if (app.got_subcommand(cmd_vc)) {
      AlphabetMode mode = mode_name.empty() ? AlphabetMode::Universal
                                            : parse_alphabet_mode(mode_name);
      double use_tol = tol > 0 ? tol : 1e-10;
      return run_verify_classical(input_text, target_text, mode, horizon,
                                  seed, use_tol, !no_timestamp, pretty,
                                  out_path, out);
    }

    if (app.got_subcommand(cmd_vq)) {
      AlphabetMode mode = mode_name.empty() ? AlphabetMode::Minimal
                                            : parse_alphabet_mode(mode_name);
      double use_tol = tol > 0 ? tol : kQuantumTol;
      double use_flow_tol = tol > 0 ? tol : kFlowTol;
      return run_verify_quantum(input_text, target_text, mode, horizon, seed,
                                use_tol, use_flow_tol, !no_timestamp, pretty,
                                out_path, out);
    }

    throw BadInput("no command given");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mdil::cli
