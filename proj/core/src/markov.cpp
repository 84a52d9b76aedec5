#include "mdil/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdil {

namespace {

// Scales a nonnegative block to unit sum, then nudges the largest entry
// until re-summation in index order yields exactly 1.0.  Construction is a
// fixed point on its own output, so reconstructing from entries() (and in
// particular a serialization round trip) is bit-exact.
void normalize_exact(double* e, int n) {
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += e[j];
  if (sum == 1.0) return;
  for (int j = 0; j < n; ++j) e[j] /= sum;
  for (int round = 0; round < 8; ++round) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += e[j];
    if (s == 1.0) return;
    int k = 0;
    for (int j = 1; j < n; ++j)
      if (e[j] > e[k]) k = j;
    e[k] += 1.0 - s;
  }
}

// Validates nonnegativity and row sum, renormalizing in place.
void validate_row(std::vector<double>& entries, int n, int row, double tol) {
  double* e = entries.data() + static_cast<size_t>(row) * n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (e[j] < 0.0)
      throw NegativeEntry("negative entry at (" + std::to_string(row) + ", " +
                          std::to_string(j) + "): " + std::to_string(e[j]));
    sum += e[j];
  }
  double dev = sum - 1.0;
  if (std::abs(dev) > tol) throw RowSumDeviation(row, dev);
  normalize_exact(e, n);
}

}  // namespace

StochasticMatrix::StochasticMatrix(int n, std::vector<double> entries,
                                   double row_sum_tol)
    : n_(n), entries_(std::move(entries)) {
  if (n <= 0) throw BadInput("matrix size must be positive");
  if (entries_.size() != static_cast<size_t>(n) * n)
    throw BadInput("entry count does not match matrix size");
  for (int i = 0; i < n_; ++i) validate_row(entries_, n_, i, row_sum_tol);
}

StochasticMatrix StochasticMatrix::identity(int n) {
  std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) e[static_cast<size_t>(i) * n + i] = 1.0;
  return StochasticMatrix(n, std::move(e));
}

StochasticMatrix StochasticMatrix::operator*(const StochasticMatrix& rhs) const {
  if (n_ != rhs.n_) throw DimMismatch("matrix product size mismatch");
  std::vector<double> out(static_cast<size_t>(n_) * n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < n_; ++k) {
      double v = (*this)(i, k);
      if (v == 0.0) continue;
      for (int j = 0; j < n_; ++j)
        out[static_cast<size_t>(i) * n_ + j] += v * rhs(k, j);
    }
  return StochasticMatrix(n_, std::move(out));
}

std::vector<double> StochasticMatrix::row(int i) const {
  return std::vector<double>(entries_.begin() + static_cast<size_t>(i) * n_,
                             entries_.begin() + static_cast<size_t>(i + 1) * n_);
}

double StochasticMatrix::max_abs_diff(const StochasticMatrix& rhs) const {
  if (n_ != rhs.n_) throw DimMismatch("matrix diff size mismatch");
  double m = 0.0;
  for (size_t k = 0; k < entries_.size(); ++k)
    m = std::max(m, std::abs(entries_[k] - rhs.entries_[k]));
  return m;
}

StochasticMatrix det_matrix(const DeterministicMap& beta) {
  int n = beta.n();
  if (n <= 0) throw BadInput("deterministic map on empty space");
  std::vector<double> e(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    int j = beta(i);
    if (j < 0 || j >= n)
      throw BadInput("map image " + std::to_string(j) + " out of range");
    e[static_cast<size_t>(i) * n + j] = 1.0;
  }
  return StochasticMatrix(n, std::move(e));
}

std::vector<double> evolve_observable(const StochasticMatrix& p,
                                      const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != p.n())
    throw DimMismatch("observable length does not match state space");
  std::vector<double> out(f.size(), 0.0);
  for (int i = 0; i < p.n(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < p.n(); ++j) acc += p(i, j) * f[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = acc;
  }
  return out;
}

Distribution::Distribution(std::vector<double> weights, double sum_tol)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw BadInput("empty distribution");
  double sum = 0.0;
  for (size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] < 0.0)
      throw NegativeEntry("negative weight at " + std::to_string(i));
    sum += weights_[i];
  }
  double dev = sum - 1.0;
  if (std::abs(dev) > sum_tol) throw RowSumDeviation(0, dev);
  normalize_exact(weights_.data(), static_cast<int>(weights_.size()));
}

Distribution Distribution::point_mass(int n, int i) {
  if (i < 0 || i >= n) throw BadInput("point mass outside state space");
  std::vector<double> w(static_cast<size_t>(n), 0.0);
  w[static_cast<size_t>(i)] = 1.0;
  return Distribution(std::move(w));
}

Distribution Distribution::step(const StochasticMatrix& p) const {
  if (p.n() != n()) throw DimMismatch("distribution/matrix size mismatch");
  std::vector<double> out(weights_.size(), 0.0);
  for (int i = 0; i < n(); ++i) {
    double w = weights_[static_cast<size_t>(i)];
    if (w == 0.0) continue;
    for (int j = 0; j < n(); ++j) out[static_cast<size_t>(j)] += w * p(i, j);
  }
  return Distribution(std::move(out));
}

MatrixSequence::MatrixSequence(StochasticMatrix p) : homogeneous_(true) {
  steps_.push_back(std::move(p));
}

MatrixSequence::MatrixSequence(std::vector<StochasticMatrix> steps)
    : homogeneous_(false), steps_(std::move(steps)) {
  if (steps_.empty()) throw BadInput("empty matrix sequence");
  for (const auto& m : steps_)
    if (m.n() != steps_.front().n())
      throw DimMismatch("matrix sequence mixes sizes");
}

int MatrixSequence::n() const {
  if (steps_.empty()) throw BadInput("uninitialized matrix sequence");
  return steps_.front().n();
}

int MatrixSequence::horizon() const {
  return homogeneous_ ? -1 : static_cast<int>(steps_.size());
}

const StochasticMatrix& MatrixSequence::at(int t) const {
  if (t < 1) throw HorizonExceeded("time index must be >= 1");
  if (homogeneous_) return steps_.front();
  if (t > static_cast<int>(steps_.size()))
    throw HorizonExceeded("time " + std::to_string(t) + " beyond horizon " +
                          std::to_string(steps_.size()));
  return steps_[static_cast<size_t>(t - 1)];
}

StochasticMatrix MatrixSequence::product(int t) const {
  if (t < 0) throw HorizonExceeded("negative time");
  StochasticMatrix acc = StochasticMatrix::identity(n());
  for (int s = 1; s <= t; ++s) acc = acc * at(s);
  return acc;
}

}  // namespace mdil
