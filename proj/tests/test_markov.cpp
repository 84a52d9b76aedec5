#include "doctest.h"

#include <vector>

#include "mdil/markov.hpp"
#include "test_util.hpp"

using namespace mdil;

TEST_CASE("stochastic matrix validates entries and row sums") {
  CHECK_NOTHROW(StochasticMatrix(2, {0.7, 0.3, 0.4, 0.6}));
  CHECK_THROWS_AS(StochasticMatrix(2, {0.7, -0.3, 0.4, 0.6}), NegativeEntry);
  CHECK_THROWS_AS(StochasticMatrix(2, {0.7, 0.2, 0.4, 0.6}), RowSumDeviation);
  CHECK_THROWS_AS(StochasticMatrix(2, {0.7, 0.3, 0.4}), BadInput);
  CHECK_THROWS_AS(StochasticMatrix(0, {}), BadInput);
}

TEST_CASE("rows within tolerance renormalize to exact unit sums") {
  double eps = 4e-13;
  StochasticMatrix p(2, {0.7 + eps, 0.3, 0.4, 0.6 - eps});
  for (int i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 2; ++j) sum += p(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("row sum deviation carries the offending row") {
  try {
    StochasticMatrix(2, {1.0, 0.0, 0.5, 0.6});
    FAIL("expected RowSumDeviation");
  } catch (const RowSumDeviation& e) {
    CHECK(e.row == 1);
    CHECK(e.deviation == doctest::Approx(0.1));
  }
}

TEST_CASE("matrix product composes one-step transitions") {
  StochasticMatrix p(2, {0.7, 0.3, 0.4, 0.6});
  StochasticMatrix p2 = p * p;
  CHECK(p2(0, 0) == doctest::Approx(0.7 * 0.7 + 0.3 * 0.4).epsilon(1e-15));
  CHECK(p2(0, 1) == doctest::Approx(0.7 * 0.3 + 0.3 * 0.6).epsilon(1e-15));
  StochasticMatrix id = StochasticMatrix::identity(2);
  CHECK((p * id).max_abs_diff(p) == 0.0);
  CHECK((id * p).max_abs_diff(p) == 0.0);
}

TEST_CASE("deterministic maps become 0/1 matrices") {
  DeterministicMap swap({1, 0});
  StochasticMatrix d = det_matrix(swap);
  CHECK(d(0, 1) == 1.0);
  CHECK(d(1, 0) == 1.0);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(1, 1) == 0.0);
}

TEST_CASE("evolve_observable applies P to functions") {
  StochasticMatrix p(2, {0.7, 0.3, 0.4, 0.6});
  std::vector<double> f{1.0, 0.0};
  std::vector<double> pf = evolve_observable(p, f);
  CHECK(pf[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(pf[1] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("distributions validate and push forward") {
  Distribution mu({0.25, 0.75});
  CHECK_THROWS_AS(Distribution({0.5, -0.5}), NegativeEntry);
  CHECK_THROWS_AS(Distribution({0.5, 0.4}), RowSumDeviation);
  Distribution pm = Distribution::point_mass(3, 1);
  CHECK(pm[0] == 0.0);
  CHECK(pm[1] == 1.0);
  StochasticMatrix p(2, {0.7, 0.3, 0.4, 0.6});
  Distribution next = mu.step(p);
  CHECK(next[0] == doctest::Approx(0.25 * 0.7 + 0.75 * 0.4).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(0.25 * 0.3 + 0.75 * 0.6).epsilon(1e-15));
}

TEST_CASE("homogeneous sequences repeat one matrix forever") {
  StochasticMatrix p(2, {0.7, 0.3, 0.4, 0.6});
  MatrixSequence seq(p);
  CHECK(seq.homogeneous());
  CHECK(seq.horizon() == -1);
  CHECK(seq.at(1).max_abs_diff(p) == 0.0);
  CHECK(seq.at(100).max_abs_diff(p) == 0.0);
  CHECK(seq.product(2).max_abs_diff(p * p) == 0.0);
  CHECK(seq.product(0).max_abs_diff(StochasticMatrix::identity(2)) == 0.0);
  CHECK_THROWS_AS(seq.at(0), HorizonExceeded);
}

TEST_CASE("inhomogeneous sequences have a hard horizon") {
  StochasticMatrix a = mdil_test::random_stochastic(3, 7, 0);
  StochasticMatrix b = mdil_test::random_stochastic(3, 7, 1);
  MatrixSequence seq(std::vector<StochasticMatrix>{a, b});
  CHECK_FALSE(seq.homogeneous());
  CHECK(seq.horizon() == 2);
  CHECK(seq.at(1).max_abs_diff(a) == 0.0);
  CHECK(seq.at(2).max_abs_diff(b) == 0.0);
  CHECK_THROWS_AS(seq.at(3), HorizonExceeded);
  CHECK(seq.product(2).max_abs_diff(a * b) == 0.0);
}
