// decompose.hpp
// Convex decompositions of stochastic matrices into deterministic matrices:
// the full product-formula decomposition over all N^N maps and a sparse
// greedy decomposition with at most N^2 - N + 1 terms.

#pragma once

#include <cstdint>
#include <vector>

#include "mdil/markov.hpp"

namespace mdil {

// Labels 0 .. N^N-1 enumerate all maps {0..N-1} -> {0..N-1}.
using MapLabel = std::int64_t;

// Default cap on N^N when enumerating the full label space.
inline constexpr std::int64_t kLabelCap = 1'000'000;

// Decomposition weight-sum tolerance (looser than kRowSumTol because greedy
// termination leaves residual mass up to N^2 * 1e-12).
inline constexpr double kWeightSumTol = 1e-10;

// N^N with overflow/cap guard.
std::int64_t label_space_size(int n, std::int64_t cap = kLabelCap);

// beta(i) = i-th base-N digit of label, most significant digit = beta(0).
DeterministicMap map_from_label(MapLabel label, int n);
MapLabel label_of_map(const DeterministicMap& beta);

enum class DecompositionMode { Full, Sparse };

struct DecompositionTerm {
  double weight = 0.0;
  MapLabel label = 0;
};

// P = sum over terms of weight * det_matrix(map_from_label(label)).
// Full mode keeps zero-weight terms (the label set is all of 0..N^N-1);
// Sparse mode keeps only positive weights.
struct ConvexDecomposition {
  int n = 0;
  DecompositionMode mode = DecompositionMode::Sparse;
  std::vector<DecompositionTerm> terms;

  // Throws unless weights are nonnegative and sum to 1 within kWeightSumTol,
  // labels are distinct and in range, and Sparse weights are positive.
  void validate() const;
};

// All N^N terms, p_label = prod_i P(i, beta_label(i)).
ConvexDecomposition decompose_full(const StochasticMatrix& p,
                                   std::int64_t cap = kLabelCap);

// Greedy residual subtraction: per iteration take j(i) = argmax of residual
// row i (ties to the smallest column), weight w = min_i residual(i, j(i)),
// emit and subtract, until every residual entry is <= 1e-12.  Never needs
// more than N^2 - N + 1 terms.
ConvexDecomposition decompose_greedy(const StochasticMatrix& p);

// Residual threshold for greedy termination.
inline constexpr double kGreedyResidualTol = 1e-12;

// sum of weight * det_matrix(beta), validated stochastic at the
// decomposition weight tolerance.
StochasticMatrix recombine(const ConvexDecomposition& dec);

}  // namespace mdil
