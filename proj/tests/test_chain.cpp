#include "doctest.h"

#include <cmath>
#include <vector>

#include "mdil/chain.hpp"
#include "mdil/decompose.hpp"
#include "test_util.hpp"

using namespace mdil;

namespace {

StochasticMatrix oracle2() {
  return StochasticMatrix(2, {0.7, 0.3, 0.4, 0.6});
}

// Path law of the input-label automaton: labels drawn per step from the
// decomposition weights, state moved by the labelled map.
PathLaw automaton_law(const std::vector<ConvexDecomposition>& decs, int k,
                      int horizon) {
  int n = decs.front().n;
  PathLaw law(n, horizon);
  std::vector<int> path(static_cast<size_t>(horizon));
  struct Frame {
    int state;
    double weight;
  };
  // depth-first product over the per-step terms
  std::vector<size_t> choice(static_cast<size_t>(horizon), 0);
  std::vector<Frame> stack{{k, 1.0}};
  while (!stack.empty()) {
    size_t depth = stack.size() - 1;
    if (depth == static_cast<size_t>(horizon)) {
      law.accum(law.index_of(path)) += stack.back().weight;
      stack.pop_back();
      continue;
    }
    size_t& c = choice[depth];
    const auto& terms = decs[depth].terms;
    if (c == terms.size()) {
      c = 0;
      stack.pop_back();
      continue;
    }
    const auto& term = terms[c++];
    if (term.weight == 0.0) continue;
    DeterministicMap beta = map_from_label(term.label, n);
    int next = beta(stack.back().state);
    path[depth] = next;
    stack.push_back({next, stack.back().weight * term.weight});
  }
  return law;
}

}  // namespace

TEST_CASE("trajectories follow the coupling map step by step") {
  DilationSpec spec = universal_dilation(oracle2());
  auto records = simulate(spec, 1, 4, 97, 50);
  REQUIRE(records.size() == 50);
  for (const auto& r : records) {
    CHECK(r.start == 1);
    CHECK(r.horizon == 4);
    REQUIRE(r.inputs.size() == 4);
    REQUIRE(r.states.size() == 5);
    CHECK(r.states[0] == 1);
    for (int t = 1; t <= 4; ++t) {
      CHECK(r.states[static_cast<size_t>(t)] ==
            spec.coupling().system_image(r.states[static_cast<size_t>(t - 1)],
                                         r.inputs[static_cast<size_t>(t - 1)]));
      // running symbol counts
      for (int g = 0; g < spec.alphabet().size(); ++g) {
        int expect = 0;
        for (int s = 0; s < t; ++s)
          if (r.inputs[static_cast<size_t>(s)] == g) ++expect;
        CHECK(r.counts[static_cast<size_t>(t - 1)][static_cast<size_t>(g)] ==
              expect);
      }
    }
  }
}

TEST_CASE("observable update is a sum over coupling branches") {
  DilationSpec spec = minimal_dilation(oracle2());
  std::vector<double> f{2.5, -1.0};
  auto records = simulate(spec, 0, 3, 101, 30);
  for (const auto& r : records)
    for (int t = 1; t <= 3; ++t) {
      double lhs = f[static_cast<size_t>(r.states[static_cast<size_t>(t)])];
      double rhs = 0.0;
      for (int g = 0; g < spec.alphabet().size(); ++g) {
        if (r.inputs[static_cast<size_t>(t - 1)] != g) continue;
        rhs += f[static_cast<size_t>(spec.coupling().system_image(
            r.states[static_cast<size_t>(t - 1)], g))];
      }
      CHECK(lhs == rhs);
    }
}

TEST_CASE("a fixed seed reproduces trajectories bit for bit") {
  DilationSpec spec = universal_dilation(oracle2());
  auto a = simulate(spec, 0, 3, 12345, 40);
  auto b = simulate(spec, 0, 3, 12345, 40);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].inputs == b[i].inputs);
    CHECK(a[i].states == b[i].states);
    CHECK(a[i].counts == b[i].counts);
  }
  // a longer run extends, never reshuffles, the shorter one
  auto c = simulate(spec, 0, 3, 12345, 60);
  for (size_t i = 0; i < a.size(); ++i) CHECK(c[i].inputs == a[i].inputs);
  auto d = simulate(spec, 0, 3, 54321, 40);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i)
    if (d[i].inputs != a[i].inputs) differs = true;
  CHECK(differs);
}

TEST_CASE("per-step laws drive the matching simulation step") {
  Coupling phi = build_coupling(EnvironmentAlphabet::universal(2));
  int gsize = phi.alphabet().size();
  std::vector<Distribution> inputs{Distribution::point_mass(gsize, 2),
                                   Distribution::point_mass(gsize, 5)};
  DilationSpec spec(phi, inputs, false);
  auto records = simulate(spec, 0, 2, 7, 5);
  for (const auto& r : records) {
    CHECK(r.inputs[0] == 2);
    CHECK(r.inputs[1] == 5);
  }
  CHECK_THROWS_AS(simulate(spec, 0, 3, 7, 1), HorizonExceeded);
}

TEST_CASE("path codec round trips") {
  PathLaw law(3, 4);
  CHECK(law.paths() == 81);
  for (std::int64_t idx = 0; idx < law.paths(); ++idx) {
    std::vector<int> path = law.path_at(idx);
    CHECK(static_cast<int>(path.size()) == 4);
    CHECK(law.index_of(path) == idx);
  }
  // first state is the most significant digit
  CHECK(law.index_of({1, 0, 0, 0}) == 27);
  CHECK(law.index_of({0, 0, 0, 2}) == 2);
}

TEST_CASE("exact path law sums to one and matches matrix products") {
  for (int n : {2, 3}) {
    StochasticMatrix p = mdil_test::random_stochastic(n, 103, n);
    DilationSpec spec = universal_dilation(p);
    MatrixSequence seq(p);
    for (int k = 0; k < n; ++k) {
      PathLaw law = exact_path_law(spec, k, 3);
      CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-12));
      // one-coordinate marginals against powers of the matrix
      for (int t = 1; t <= 3; ++t) {
        StochasticMatrix pt = seq.product(t);
        for (int j = 0; j < n; ++j) {
          double mass = 0.0;
          for (std::int64_t idx = 0; idx < law.paths(); ++idx)
            if (law.path_at(idx)[static_cast<size_t>(t - 1)] == j)
              mass += law.prob(idx);
          CHECK(mass == doctest::Approx(pt(k, j)).epsilon(1e-11));
        }
      }
    }
  }
}

TEST_CASE("dilated chain law equals the input-label automaton law") {
  for (int n : {2, 3}) {
    std::vector<StochasticMatrix> steps;
    for (std::uint64_t t = 0; t < 3; ++t)
      steps.push_back(mdil_test::random_sparse_stochastic(n, 107, 10 * n + t));
    MatrixSequence seq(steps);
    DilationSpec spec = make_dilation(seq, AlphabetMode::Universal);
    std::vector<ConvexDecomposition> decs;
    for (int t = 1; t <= 3; ++t) decs.push_back(decompose_full(seq.at(t)));
    for (int k = 0; k < n; ++k) {
      PathLaw dilated = exact_path_law(spec, k, 3);
      PathLaw automaton = automaton_law(decs, k, 3);
      for (std::int64_t idx = 0; idx < dilated.paths(); ++idx)
        CHECK(dilated.prob(idx) ==
              doctest::Approx(automaton.prob(idx)).epsilon(1e-12));
    }
  }
}

TEST_CASE("homogeneous and repeated-step dilations induce the same law") {
  StochasticMatrix p = mdil_test::random_stochastic(2, 109, 0);
  DilationSpec homogeneous = minimal_dilation(p);
  MatrixSequence repeated(std::vector<StochasticMatrix>{p, p, p});
  DilationSpec per_step = make_dilation(repeated, AlphabetMode::Minimal);
  for (int k = 0; k < 2; ++k) {
    PathLaw a = exact_path_law(homogeneous, k, 3);
    PathLaw b = exact_path_law(per_step, k, 3);
    for (std::int64_t idx = 0; idx < a.paths(); ++idx)
      CHECK(a.prob(idx) == doctest::Approx(b.prob(idx)).epsilon(1e-12));
  }
}

TEST_CASE("conditional transition probabilities match the target") {
  StochasticMatrix p = oracle2();
  CHECK(verify_markov(universal_dilation(p), MatrixSequence(p), 4, 1e-10)
            .all_pass());
  CHECK(verify_markov(minimal_dilation(p), MatrixSequence(p), 4, 1e-10)
            .all_pass());

  std::vector<StochasticMatrix> steps;
  for (std::uint64_t t = 0; t < 3; ++t)
    steps.push_back(mdil_test::random_stochastic(3, 113, t));
  MatrixSequence seq(steps);
  CHECK(verify_markov(make_dilation(seq, AlphabetMode::Universal), seq, 3,
                      1e-10)
            .all_pass());
  CHECK(verify_markov(make_dilation(seq, AlphabetMode::Minimal), seq, 3,
                      1e-10)
            .all_pass());
}

TEST_CASE("markov verification flags a wrong target") {
  StochasticMatrix p = oracle2();
  StochasticMatrix wrong(2, {0.6, 0.4, 0.4, 0.6});
  VerificationReport report =
      verify_markov(universal_dilation(p), MatrixSequence(wrong), 3, 1e-10);
  CHECK_FALSE(report.all_pass());
  CHECK(report.max_deviation() > 0.05);
}

TEST_CASE("single-time marginals agree with matrix powers") {
  StochasticMatrix p = oracle2();
  DilationSpec spec = universal_dilation(p);
  MatrixSequence seq(p);

  MarginalCheck ones =
      marginal_consistency(spec, seq, {1.0, 1.0}, 3, 0);
  CHECK(ones.lhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ones.rhs == doctest::Approx(1.0).epsilon(1e-12));

  MarginalCheck first = marginal_consistency(spec, seq, {1.0, 0.0}, 1, 0);
  CHECK(first.lhs == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(first.rhs == doctest::Approx(0.7).epsilon(1e-12));

  for (int t = 0; t <= 3; ++t)
    for (int k = 0; k < 2; ++k) {
      MarginalCheck mc =
          marginal_consistency(spec, seq, {0.3, -1.7}, t, k);
      CHECK(mc.deviation <= 1e-10);
    }
}

TEST_CASE("sampled path frequencies approach the exact law") {
  StochasticMatrix p = oracle2();
  DilationSpec spec = minimal_dilation(p);
  const int kTraj = 20000;
  const int kHorizon = 2;
  auto records = simulate(spec, 0, kHorizon, 20260815, kTraj);
  PathLaw law = exact_path_law(spec, 0, kHorizon);
  std::vector<int> hits(static_cast<size_t>(law.paths()), 0);
  for (const auto& r : records) {
    std::vector<int> path(r.states.begin() + 1, r.states.end());
    ++hits[static_cast<size_t>(law.index_of(path))];
  }
  for (std::int64_t idx = 0; idx < law.paths(); ++idx) {
    double prob = law.prob(idx);
    double freq = static_cast<double>(hits[static_cast<size_t>(idx)]) / kTraj;
    double sigma = std::sqrt(prob * (1.0 - prob) / kTraj);
    CHECK(std::abs(freq - prob) <= 4.0 * sigma + 1e-12);
  }
}

TEST_CASE("exact enumeration respects its cap") {
  StochasticMatrix p = mdil_test::random_stochastic(3, 127, 0);
  DilationSpec spec = universal_dilation(p);
  CHECK_THROWS_AS(exact_path_law(spec, 0, 4, 1000), EnumerationTooLarge);
}
