#include "mdil/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace mdil {

std::int64_t label_space_size(int n, std::int64_t cap) {
  if (n <= 0) throw BadInput("state space must have at least one point");
  std::int64_t size = 1;
  for (int i = 0; i < n; ++i) {
    if (size > cap / n)
      throw LabelSpaceTooLarge("N^N exceeds cap " + std::to_string(cap) +
                               " for N = " + std::to_string(n));
    size *= n;
  }
  if (size > cap)
    throw LabelSpaceTooLarge("N^N exceeds cap " + std::to_string(cap) +
                             " for N = " + std::to_string(n));
  return size;
}

DeterministicMap map_from_label(MapLabel label, int n) {
  std::int64_t space = label_space_size(n);
  if (label < 0 || label >= space)
    throw LabelOutOfRange("label " + std::to_string(label) +
                          " outside 0.." + std::to_string(space - 1));
  std::vector<int> image(static_cast<size_t>(n));
  std::int64_t rest = label;
  for (int i = n - 1; i >= 0; --i) {
    image[static_cast<size_t>(i)] = static_cast<int>(rest % n);
    rest /= n;
  }
  return DeterministicMap(std::move(image));
}

MapLabel label_of_map(const DeterministicMap& beta) {
  int n = beta.n();
  if (n <= 0) throw BadInput("map on empty space");
  MapLabel label = 0;
  for (int i = 0; i < n; ++i) {
    int v = beta(i);
    if (v < 0 || v >= n)
      throw LabelOutOfRange("map image " + std::to_string(v) +
                            " outside state space");
    label = label * n + v;
  }
  return label;
}

void ConvexDecomposition::validate() const {
  if (n <= 0) throw BadInput("decomposition over empty space");
  std::int64_t space = label_space_size(n);
  std::set<MapLabel> seen;
  double sum = 0.0;
  for (const auto& term : terms) {
    if (term.weight < 0.0)
      throw NegativeEntry("negative decomposition weight " +
                          std::to_string(term.weight));
    if (mode == DecompositionMode::Sparse && term.weight <= 0.0)
      throw BadInput("sparse decomposition carries a zero-weight term");
    if (term.label < 0 || term.label >= space)
      throw LabelOutOfRange("label " + std::to_string(term.label) +
                            " outside 0.." + std::to_string(space - 1));
    if (!seen.insert(term.label).second)
      throw BadInput("duplicate label " + std::to_string(term.label));
    sum += term.weight;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw RowSumDeviation(0, sum - 1.0);
}

ConvexDecomposition decompose_full(const StochasticMatrix& p,
                                   std::int64_t cap) {
  int n = p.n();
  std::int64_t space = label_space_size(n, cap);
  ConvexDecomposition dec;
  dec.n = n;
  dec.mode = DecompositionMode::Full;
  dec.terms.reserve(static_cast<size_t>(space));
  std::vector<int> image(static_cast<size_t>(n), 0);
  for (MapLabel label = 0; label < space; ++label) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= p(i, image[static_cast<size_t>(i)]);
    dec.terms.push_back({w, label});
    // advance base-N counter; digit for i = N-1 is least significant,
    // matching map_from_label
    for (int i = n - 1; i >= 0; --i) {
      int& d = image[static_cast<size_t>(i)];
      if (++d < n) break;
      d = 0;
    }
  }
  dec.validate();
  return dec;
}

ConvexDecomposition decompose_greedy(const StochasticMatrix& p) {
  int n = p.n();
  std::vector<double> residual = p.entries();
  ConvexDecomposition dec;
  dec.n = n;
  dec.mode = DecompositionMode::Sparse;
  int max_terms = n * n - n + 1;
  for (int iter = 0; iter <= max_terms; ++iter) {
    double top = 0.0;
    for (double v : residual) top = std::max(top, v);
    if (top <= kGreedyResidualTol) {
      dec.validate();
      return dec;
    }
    if (iter == max_terms) break;
    std::vector<int> image(static_cast<size_t>(n));
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_v = residual[static_cast<size_t>(i) * n];
      for (int j = 1; j < n; ++j) {
        double v = residual[static_cast<size_t>(i) * n + j];
        if (v > best_v) {
          best_v = v;
          best = j;
        }
      }
      image[static_cast<size_t>(i)] = best;
      w = std::min(w, best_v);
    }
    if (w <= 0.0)
      throw NonConvergence("greedy stalled with residual " +
                           std::to_string(top));
    for (int i = 0; i < n; ++i)
      residual[static_cast<size_t>(i) * n + image[static_cast<size_t>(i)]] -= w;
    dec.terms.push_back({w, label_of_map(DeterministicMap(image))});
  }
  throw NonConvergence("greedy did not terminate within " +
                       std::to_string(max_terms) + " terms");
}

StochasticMatrix recombine(const ConvexDecomposition& dec) {
  dec.validate();
  int n = dec.n;
  std::vector<double> entries(static_cast<size_t>(n) * n, 0.0);
  for (const auto& term : dec.terms) {
    if (term.weight == 0.0) continue;
    DeterministicMap beta = map_from_label(term.label, n);
    for (int i = 0; i < n; ++i)
      entries[static_cast<size_t>(i) * n + beta(i)] += term.weight;
  }
  return StochasticMatrix(n, std::move(entries), kWeightSumTol);
}

}  // namespace mdil
