#include "mdil/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdil/rng.hpp"

namespace mdil {

std::vector<TrajectoryRecord> simulate(const DilationSpec& spec, int k,
                                       int horizon, std::uint64_t seed,
                                       int n_trajectories) {
  const auto& a = spec.alphabet();
  if (k < 0 || k >= a.n()) throw BadInput("start state outside state space");
  if (horizon < 0) throw BadInput("negative horizon");
  if (n_trajectories < 0) throw BadInput("negative trajectory count");
  if (!spec.homogeneous() && horizon > spec.horizon())
    throw HorizonExceeded("horizon " + std::to_string(horizon) +
                          " beyond input laws (" +
                          std::to_string(spec.horizon()) + ")");
  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<size_t>(n_trajectories));
  for (int r = 0; r < n_trajectories; ++r) {
    TrajectoryRecord rec;
    rec.start = k;
    rec.horizon = horizon;
    rec.states.push_back(k);
    std::vector<int> counts(static_cast<size_t>(a.size()), 0);
    for (int t = 1; t <= horizon; ++t) {
      double u = counter_uniform(seed, static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(t));
      int g = sample_index(spec.q(t).weights(), u);
      rec.inputs.push_back(g);
      rec.states.push_back(
          spec.coupling().system_image(rec.states.back(), g));
      ++counts[static_cast<size_t>(g)];
      rec.counts.push_back(counts);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

PathLaw::PathLaw(int n, int horizon) : n_(n), horizon_(horizon) {
  if (n <= 0) throw BadInput("path law over empty state space");
  if (horizon < 0) throw BadInput("negative horizon");
  std::int64_t count = 1;
  for (int t = 0; t < horizon; ++t) {
    if (count > kEnumerationCap / n)
      throw EnumerationTooLarge("N^T exceeds enumeration cap");
    count *= n;
  }
  probs_.assign(static_cast<size_t>(count), 0.0);
}

std::int64_t PathLaw::index_of(const std::vector<int>& path) const {
  if (static_cast<int>(path.size()) != horizon_)
    throw BadInput("path length differs from horizon");
  std::int64_t idx = 0;
  for (int j : path) {
    if (j < 0 || j >= n_) throw BadInput("path state outside state space");
    idx = idx * n_ + j;
  }
  return idx;
}

std::vector<int> PathLaw::path_at(std::int64_t index) const {
  if (index < 0 || index >= paths()) throw BadInput("path index out of range");
  std::vector<int> path(static_cast<size_t>(horizon_));
  for (int t = horizon_ - 1; t >= 0; --t) {
    path[static_cast<size_t>(t)] = static_cast<int>(index % n_);
    index /= n_;
  }
  return path;
}

double PathLaw::total() const {
  double s = 0.0;
  for (double p : probs_) s += p;
  return s;
}

namespace {

// Support of a law: symbol indices with positive mass.
std::vector<int> support(const Distribution& q) {
  std::vector<int> s;
  for (int g = 0; g < q.n(); ++g)
    if (q[g] > 0.0) s.push_back(g);
  return s;
}

void enumerate_paths(const DilationSpec& spec,
                     const std::vector<std::vector<int>>& supports, int t,
                     int x, double prob, std::int64_t path_index, int n,
                     PathLaw& law) {
  if (t == static_cast<int>(supports.size())) {
    law.accum(path_index) += prob;
    return;
  }
  const Distribution& q = spec.q(t + 1);
  for (int g : supports[static_cast<size_t>(t)]) {
    int y = spec.coupling().system_image(x, g);
    enumerate_paths(spec, supports, t + 1, y, prob * q[g],
                    path_index * n + y, n, law);
  }
}

}  // namespace

PathLaw exact_path_law(const DilationSpec& spec, int k, int horizon,
                       std::int64_t cap) {
  const auto& a = spec.alphabet();
  if (k < 0 || k >= a.n()) throw BadInput("start state outside state space");
  if (!spec.homogeneous() && horizon > spec.horizon())
    throw HorizonExceeded("horizon beyond input laws");
  std::vector<std::vector<int>> supports;
  std::int64_t sequences = 1;
  for (int t = 1; t <= horizon; ++t) {
    supports.push_back(support(spec.q(t)));
    std::int64_t s = static_cast<std::int64_t>(supports.back().size());
    if (s == 0) throw BadInput("input law with empty support");
    if (sequences > cap / s)
      throw EnumerationTooLarge("input sequence count exceeds cap " +
                                std::to_string(cap));
    sequences *= s;
  }
  PathLaw law(a.n(), horizon);
  enumerate_paths(spec, supports, 0, k, 1.0, 0, a.n(), law);
  double total = law.total();
  if (std::abs(total - 1.0) > 1e-10)
    throw Error("path law mass " + std::to_string(total) + " is not 1");
  return law;
}

VerificationReport verify_markov(const DilationSpec& spec,
                                 const MatrixSequence& target, int horizon,
                                 double tol) {
  VerificationReport report;
  const auto& a = spec.alphabet();
  if (target.n() != a.n())
    throw DimMismatch("target state space differs from dilation");

  for (int t = 1; t <= horizon; ++t) {
    StochasticMatrix induced = induced_transition(spec.coupling(), spec.q(t));
    report.add("induced_transition", t, tol,
               induced.max_abs_diff(target.at(t)));
  }

  // Conditionals at step t+1 from the exact law of (X_1 .. X_{t+1}).
  for (int k = 0; k < a.n(); ++k) {
    std::vector<PathLaw> laws;
    for (int t = 1; t <= horizon; ++t)
      laws.push_back(exact_path_law(spec, k, t));
    for (int t = 0; t < horizon; ++t) {
      const PathLaw& law = laws[static_cast<size_t>(t)];
      double worst = 0.0;
      std::string where;
      std::int64_t prefixes = (t == 0) ? 1 : laws[static_cast<size_t>(t - 1)].paths();
      for (std::int64_t w = 0; w < prefixes; ++w) {
        double prefix_prob = 0.0;
        for (int j = 0; j < a.n(); ++j) prefix_prob += law.prob(w * a.n() + j);
        if (prefix_prob <= 0.0) continue;
        int last = (t == 0) ? k
                            : laws[static_cast<size_t>(t - 1)]
                                  .path_at(w)
                                  .back();
        for (int j = 0; j < a.n(); ++j) {
          double cond = law.prob(w * a.n() + j) / prefix_prob;
          double dev = std::abs(cond - target.at(t + 1)(last, j));
          if (dev > worst) {
            worst = dev;
            where = "k=" + std::to_string(k) + " prefix#" + std::to_string(w) +
                    " j=" + std::to_string(j);
          }
        }
      }
      report.add("markov_conditional", t + 1, tol, worst,
                 worst > tol ? where : "");
    }
  }
  return report;
}

MarginalCheck marginal_consistency(const DilationSpec& spec,
                                   const MatrixSequence& target,
                                   const std::vector<double>& f, int t,
                                   int k) {
  if (static_cast<int>(f.size()) != target.n())
    throw DimMismatch("observable length differs from state space");
  StochasticMatrix prod = target.product(t);
  double lhs = 0.0;
  for (int j = 0; j < target.n(); ++j)
    lhs += prod(k, j) * f[static_cast<size_t>(j)];

  double rhs;
  if (t == 0) {
    rhs = f[static_cast<size_t>(k)];
  } else {
    PathLaw law = exact_path_law(spec, k, t);
    rhs = 0.0;
    for (std::int64_t idx = 0; idx < law.paths(); ++idx)
      rhs += law.prob(idx) * f[static_cast<size_t>(idx % target.n())];
  }
  return {lhs, rhs, std::abs(lhs - rhs)};
}

}  // namespace mdil
