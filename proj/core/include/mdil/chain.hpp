// chain.hpp
// The Markov chain realized by a dilation: seeded trajectory simulation,
// exact path laws by enumeration over the input-law supports, and checks
// that the realized process has the target conditional probabilities.

#pragma once

#include <cstdint>
#include <vector>

#include "mdil/dilation.hpp"
#include "mdil/report.hpp"

namespace mdil {

// Cap on the number of input sequences enumerated exactly.
inline constexpr std::int64_t kEnumerationCap = 10'000'000;

// One realization: inputs Y_1..Y_T drawn from q(t), states
// X_t = system_image(X_{t-1}, Y_t), and running input counts
// counts[t-1][g] = #{s <= t : Y_s = g}.
struct TrajectoryRecord {
  int start = 0;
  int horizon = 0;
  std::vector<int> inputs;               // Y_t at index t-1
  std::vector<int> states;               // X_t at index t
  std::vector<std::vector<int>> counts;  // per t, per symbol
};

// Y_t is a pure function of (seed, trajectory index, t), so output is
// bit-identical across runs and independent of trajectory order.
std::vector<TrajectoryRecord> simulate(const DilationSpec& spec, int k,
                                       int horizon, std::uint64_t seed,
                                       int n_trajectories);

// Exact law of the state path (X_1, .., X_T) for a fixed start.  Paths are
// indexed by sum of X_t * N^(T-t) (X_1 most significant).
class PathLaw {
 public:
  PathLaw(int n, int horizon);

  int n() const { return n_; }
  int horizon() const { return horizon_; }
  std::int64_t paths() const { return static_cast<std::int64_t>(probs_.size()); }

  std::int64_t index_of(const std::vector<int>& path) const;
  std::vector<int> path_at(std::int64_t index) const;

  double prob(std::int64_t index) const {
    return probs_[static_cast<size_t>(index)];
  }
  double prob(const std::vector<int>& path) const {
    return prob(index_of(path));
  }
  double& accum(std::int64_t index) {
    return probs_[static_cast<size_t>(index)];
  }

  double total() const;

 private:
  int n_ = 0;
  int horizon_ = 0;
  std::vector<double> probs_;
};

// Sums exact probabilities over all input sequences in the support of
// q(1) x .. x q(T).
PathLaw exact_path_law(const DilationSpec& spec, int k, int horizon,
                       std::int64_t cap = kEnumerationCap);

// For every start k, every t < T and every positive-probability state
// prefix, the exact conditional law of X_{t+1} must match row X_t of
// target(t+1); also asserts induced_transition(phi, q(t)) = target(t).
VerificationReport verify_markov(const DilationSpec& spec,
                                 const MatrixSequence& target, int horizon,
                                 double tol);

struct MarginalCheck {
  double lhs = 0.0;        // (target(1) .. target(t) f)(k)
  double rhs = 0.0;        // sum over paths of f(X_t) * prob
  double deviation = 0.0;
};

MarginalCheck marginal_consistency(const DilationSpec& spec,
                                   const MatrixSequence& target,
                                   const std::vector<double>& f, int t, int k);

}  // namespace mdil
