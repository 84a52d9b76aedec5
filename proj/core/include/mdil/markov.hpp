// markov.hpp
// Finite state spaces, row-stochastic matrices, deterministic maps, and
// distributions.  Everything downstream (decompositions, dilations, quantum
// extensions) is built on these types.

#pragma once

#include <cstdint>
#include <vector>

#include "mdil/errors.hpp"

namespace mdil {

// Validation tolerance for row sums; rows within this of 1 are renormalized,
// larger deviations raise RowSumDeviation.
inline constexpr double kRowSumTol = 1e-12;

// State space {0, .., n-1}.
struct StateSpace {
  int n = 0;

  explicit StateSpace(int size) : n(size) {
    if (size <= 0) throw BadInput("state space must have at least one point");
  }

  bool contains(int i) const { return 0 <= i && i < n; }
};

// Total map beta : {0..n-1} -> {0..n-1}, stored as the image table.
struct DeterministicMap {
  std::vector<int> image;

  DeterministicMap() = default;
  explicit DeterministicMap(std::vector<int> img) : image(std::move(img)) {}

  int n() const { return static_cast<int>(image.size()); }
  int operator()(int i) const { return image[static_cast<size_t>(i)]; }

  bool operator==(const DeterministicMap&) const = default;
};

// Row-stochastic matrix: nonnegative entries, each row summing to 1.
// Construction validates and renormalizes rows whose sums are within the
// tolerance of 1.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  StochasticMatrix(int n, std::vector<double> entries,
                   double row_sum_tol = kRowSumTol);

  // Identity matrix of size n.
  static StochasticMatrix identity(int n);

  int n() const { return n_; }
  double operator()(int i, int j) const {
    return entries_[static_cast<size_t>(i) * n_ + j];
  }
  const std::vector<double>& entries() const { return entries_; }

  // Matrix product this * rhs (composition of one-step transitions).
  StochasticMatrix operator*(const StochasticMatrix& rhs) const;

  // Row i as a probability vector.
  std::vector<double> row(int i) const;

  // max_ij |this_ij - rhs_ij|
  double max_abs_diff(const StochasticMatrix& rhs) const;

 private:
  int n_ = 0;
  std::vector<double> entries_;  // row-major, n_ * n_
};

// 0/1 matrix of the deterministic map beta: D[i][j] = 1 iff beta(i) = j.
StochasticMatrix det_matrix(const DeterministicMap& beta);

// P f for an observable f : states -> reals, i.e. (Pf)(i) = sum_j P_ij f(j).
std::vector<double> evolve_observable(const StochasticMatrix& p,
                                      const std::vector<double>& f);

// Probability vector on a state space.  Same validation policy as matrix
// rows: negative entries raise, sums within kRowSumTol of 1 renormalize.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> weights,
                        double sum_tol = kRowSumTol);

  // Point mass at state i in a space of size n.
  static Distribution point_mass(int n, int i);

  int n() const { return static_cast<int>(weights_.size()); }
  double operator[](int i) const { return weights_[static_cast<size_t>(i)]; }
  const std::vector<double>& weights() const { return weights_; }

  // Pushforward along a one-step transition: (mu P)_j = sum_i mu_i P_ij.
  Distribution step(const StochasticMatrix& p) const;

 private:
  std::vector<double> weights_;
};

// Finite (possibly inhomogeneous) sequence of transition matrices
// P(1), P(2), .., P(T).  Time indices are 1-based to match the dynamics:
// P(t) moves the chain from time t-1 to time t.
class MatrixSequence {
 public:
  MatrixSequence() = default;

  // Homogeneous chain: P(t) = p for every t >= 1; horizon() is unbounded.
  explicit MatrixSequence(StochasticMatrix p);

  // Inhomogeneous chain with an explicit horizon.
  explicit MatrixSequence(std::vector<StochasticMatrix> steps);

  int n() const;
  bool homogeneous() const { return homogeneous_; }

  // Largest t for which at(t) is defined; -1 when unbounded.
  int horizon() const;

  // Transition matrix for step t >= 1.
  const StochasticMatrix& at(int t) const;

  // Product P(1) P(2) .. P(t); t = 0 gives the identity.
  StochasticMatrix product(int t) const;

 private:
  bool homogeneous_ = false;
  std::vector<StochasticMatrix> steps_;
};

}  // namespace mdil
