#include "mdil/dilation.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace mdil {

EnvironmentAlphabet::EnvironmentAlphabet(int n, AlphabetMode mode,
                                         std::vector<MapLabel> labels)
    : n_(n), mode_(mode), labels_(std::move(labels)) {
  if (n <= 0) throw BadInput("alphabet needs a nonempty state space");
  if (labels_.empty()) throw BadInput("alphabet needs at least one label");
  std::int64_t space = label_space_size(n);
  for (size_t k = 0; k < labels_.size(); ++k) {
    if (labels_[k] < 0 || labels_[k] >= space)
      throw LabelOutOfRange("label " + std::to_string(labels_[k]) +
                            " outside 0.." + std::to_string(space - 1));
    if (k > 0 && labels_[k] <= labels_[k - 1])
      throw BadInput("labels must be strictly increasing");
  }
}

EnvironmentAlphabet EnvironmentAlphabet::universal(int n, std::int64_t cap) {
  std::int64_t space = label_space_size(n, cap);
  if (space > cap / n)
    throw LabelSpaceTooLarge("N * N^N exceeds cap " + std::to_string(cap));
  std::vector<MapLabel> labels(static_cast<size_t>(space));
  for (std::int64_t l = 0; l < space; ++l) labels[static_cast<size_t>(l)] = l;
  return EnvironmentAlphabet(n, AlphabetMode::Universal, std::move(labels));
}

EnvironmentAlphabet EnvironmentAlphabet::minimal(int n,
                                                 std::vector<MapLabel> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return EnvironmentAlphabet(n, AlphabetMode::Minimal, std::move(labels));
}

EnvironmentAlphabet EnvironmentAlphabet::minimal(
    const ConvexDecomposition& dec) {
  dec.validate();
  std::vector<MapLabel> labels;
  labels.reserve(dec.terms.size());
  for (const auto& term : dec.terms) labels.push_back(term.label);
  return minimal(dec.n, std::move(labels));
}

int EnvironmentAlphabet::symbol_at(int j, int label_pos) const {
  if (j < 0 || j >= n_) throw BadInput("state index outside state space");
  if (label_pos < 0 || label_pos >= num_labels())
    throw BadInput("label position outside alphabet");
  return j * num_labels() + label_pos;
}

int EnvironmentAlphabet::symbol(int j, MapLabel label) const {
  int pos = find_label(label);
  if (pos < 0)
    throw LabelNotInAlphabet("label " + std::to_string(label) +
                             " not in alphabet");
  return symbol_at(j, pos);
}

int EnvironmentAlphabet::state_of(int g) const {
  if (g < 0 || g >= size()) throw BadInput("symbol index outside alphabet");
  return g / num_labels();
}

int EnvironmentAlphabet::label_pos_of(int g) const {
  if (g < 0 || g >= size()) throw BadInput("symbol index outside alphabet");
  return g % num_labels();
}

MapLabel EnvironmentAlphabet::label_of(int g) const {
  return labels_[static_cast<size_t>(label_pos_of(g))];
}

int EnvironmentAlphabet::find_label(MapLabel label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return -1;
  return static_cast<int>(it - labels_.begin());
}

Coupling::Coupling(EnvironmentAlphabet alphabet, std::vector<int> forward)
    : alphabet_(std::move(alphabet)), forward_(std::move(forward)) {
  int npts = alphabet_.n() * alphabet_.size();
  if (static_cast<int>(forward_.size()) != npts)
    throw BadInput("coupling table size does not match N * |G|");
  inverse_.assign(static_cast<size_t>(npts), -1);
  for (int x = 0; x < npts; ++x) {
    int y = forward_[static_cast<size_t>(x)];
    if (y < 0 || y >= npts)
      throw BadInput("coupling image " + std::to_string(y) + " out of range");
    if (inverse_[static_cast<size_t>(y)] != -1)
      throw BadInput("coupling table is not injective at image " +
                     std::to_string(y));
    inverse_[static_cast<size_t>(y)] = x;
  }
  for (int y = 0; y < npts; ++y)
    if (inverse_[static_cast<size_t>(y)] == -1)
      throw BadInput("coupling table is not surjective");
}

namespace {

std::vector<int> stratum_table(const EnvironmentAlphabet& a,
                               const std::vector<int>& stratum_positions) {
  int npts = a.n() * a.size();
  std::vector<int> fwd(static_cast<size_t>(npts), -1);
  std::vector<char> used(static_cast<size_t>(npts), 0);
  for (int pos : stratum_positions) {
    DeterministicMap beta = map_from_label(a.labels()[static_cast<size_t>(pos)],
                                           a.n());
    for (int i = 0; i < a.n(); ++i) {
      int x = i * a.size() + a.symbol_at(0, pos);
      int y = beta(i) * a.size() + a.symbol_at(i, pos);
      if (used[static_cast<size_t>(y)])
        throw CompletionImpossible("stratum images collide");
      fwd[static_cast<size_t>(x)] = y;
      used[static_cast<size_t>(y)] = 1;
    }
  }
  // leftover domain to leftover codomain, both in ascending flat order
  int y = 0;
  for (int x = 0; x < npts; ++x) {
    if (fwd[static_cast<size_t>(x)] != -1) continue;
    while (y < npts && used[static_cast<size_t>(y)]) ++y;
    if (y == npts) throw CompletionImpossible("codomain exhausted");
    fwd[static_cast<size_t>(x)] = y;
    used[static_cast<size_t>(y)] = 1;
  }
  return fwd;
}

}  // namespace

Coupling build_coupling(const EnvironmentAlphabet& alphabet) {
  std::vector<int> positions(static_cast<size_t>(alphabet.num_labels()));
  for (int k = 0; k < alphabet.num_labels(); ++k)
    positions[static_cast<size_t>(k)] = k;
  return Coupling(alphabet, stratum_table(alphabet, positions));
}

Coupling build_coupling(const EnvironmentAlphabet& alphabet,
                        const std::vector<MapLabel>& stratum_labels) {
  std::vector<int> positions;
  positions.reserve(stratum_labels.size());
  for (MapLabel l : stratum_labels) {
    int pos = alphabet.find_label(l);
    if (pos < 0)
      throw LabelNotInAlphabet("stratum label " + std::to_string(l) +
                               " not in alphabet");
    positions.push_back(pos);
  }
  return Coupling(alphabet, stratum_table(alphabet, positions));
}

EnvironmentWindow EnvironmentWindow::filled(int lo, int hi, int fill) {
  if (hi < lo) return EnvironmentWindow();
  return EnvironmentWindow(lo,
                           std::vector<int>(static_cast<size_t>(hi - lo + 1),
                                            fill));
}

int EnvironmentWindow::at(int n) const {
  if (!contains(n))
    throw WindowUnderflow("coordinate " + std::to_string(n) +
                          " not materialized (window [" + std::to_string(lo_) +
                          ", " + std::to_string(hi()) + "])");
  return symbols_[static_cast<size_t>(n - lo_)];
}

void EnvironmentWindow::set(int n, int g) {
  if (!contains(n))
    throw WindowUnderflow("coordinate " + std::to_string(n) +
                          " not materialized (window [" + std::to_string(lo_) +
                          ", " + std::to_string(hi()) + "])");
  symbols_[static_cast<size_t>(n - lo_)] = g;
}

DilationSpec::DilationSpec(Coupling coupling, std::vector<Distribution> inputs,
                           bool homogeneous,
                           std::optional<Distribution> negative_side)
    : coupling_(std::move(coupling)),
      inputs_(std::move(inputs)),
      homogeneous_(homogeneous),
      negative_side_(std::move(negative_side)) {
  if (inputs_.empty()) throw BadInput("dilation needs at least one input law");
  if (homogeneous_ && inputs_.size() != 1)
    throw BadInput("homogeneous dilation takes exactly one input law");
  int gsize = coupling_.alphabet().size();
  for (const auto& q : inputs_)
    if (q.n() != gsize) throw DimMismatch("input law size differs from |G|");
  if (negative_side_ && negative_side_->n() != gsize)
    throw DimMismatch("negative-side law size differs from |G|");
}

int DilationSpec::horizon() const {
  return homogeneous_ ? -1 : static_cast<int>(inputs_.size());
}

const Distribution& DilationSpec::q(int t) const {
  if (t < 1) throw HorizonExceeded("input laws start at t = 1");
  if (homogeneous_) return inputs_.front();
  if (t > static_cast<int>(inputs_.size()))
    throw HorizonExceeded("no input law for t = " + std::to_string(t));
  return inputs_[static_cast<size_t>(t - 1)];
}

const Distribution& DilationSpec::negative_side() const {
  return negative_side_ ? *negative_side_ : inputs_.front();
}

GlobalState alpha_apply(const Coupling& phi, GlobalState z, int steps) {
  for (; steps > 0; --steps) {
    auto [x, g] = phi.apply(z.system, z.env.at(1));
    z.env.set(1, g);
    z.env.shift_by(-1);
    z.system = x;
    z.clock += 1;
  }
  for (; steps < 0; ++steps) {
    z.env.shift_by(1);
    auto [x, g] = phi.apply_inverse(z.system, z.env.at(1));
    z.env.set(1, g);
    z.system = x;
    z.clock -= 1;
  }
  return z;
}

GlobalState alpha_apply(const DilationSpec& spec, GlobalState z, int steps) {
  return alpha_apply(spec.coupling(), std::move(z), steps);
}

int env_component(const Coupling& phi, const GlobalState& z0, int n, int t) {
  if (t < 1) throw BadInput("env_component needs t >= 1");
  if (n <= -t || n >= 1) return z0.env.at(n + t);
  GlobalState zs = alpha_apply(phi, z0, t - 1 + n);
  return phi.env_image(zs.system, z0.env.at(n + t));
}

int env_component(const DilationSpec& spec, const GlobalState& z0, int n,
                  int t) {
  return env_component(spec.coupling(), z0, n, t);
}

GlobalState cocycle_apply(const Coupling& phi, GlobalState z, int t) {
  if (t < 0) throw BadInput("cocycle_apply needs t >= 0");
  for (int s = 1; s <= t; ++s) {
    auto [x, g] = phi.apply(z.system, z.env.at(s));
    z.env.set(s, g);
    z.system = x;
  }
  return z;
}

GlobalState cocycle_apply(const DilationSpec& spec, GlobalState z, int t) {
  return cocycle_apply(spec.coupling(), std::move(z), t);
}

StochasticMatrix induced_transition(const Coupling& phi,
                                    const Distribution& q) {
  const auto& a = phi.alphabet();
  if (q.n() != a.size()) throw DimMismatch("law size differs from |G|");
  int n = a.n();
  std::vector<double> entries(static_cast<size_t>(n) * n, 0.0);
  for (int g = 0; g < a.size(); ++g) {
    double w = q[g];
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i)
      entries[static_cast<size_t>(i) * n + phi.system_image(i, g)] += w;
  }
  return StochasticMatrix(n, std::move(entries), kWeightSumTol);
}

Distribution universal_q(const ConvexDecomposition& dec,
                         const EnvironmentAlphabet& alphabet) {
  dec.validate();
  if (dec.n != alphabet.n())
    throw DimMismatch("decomposition and alphabet state spaces differ");
  std::vector<double> weights(static_cast<size_t>(alphabet.size()), 0.0);
  for (const auto& term : dec.terms) {
    int pos = alphabet.find_label(term.label);
    if (pos < 0)
      throw LabelNotInAlphabet("decomposition label " +
                               std::to_string(term.label) +
                               " not in alphabet");
    weights[static_cast<size_t>(alphabet.symbol_at(0, pos))] = term.weight;
  }
  return Distribution(std::move(weights), kWeightSumTol);
}

DilationSpec make_dilation(const MatrixSequence& seq, AlphabetMode mode) {
  int steps = seq.homogeneous() ? 1 : seq.horizon();
  if (mode == AlphabetMode::Universal) {
    EnvironmentAlphabet alphabet = EnvironmentAlphabet::universal(seq.n());
    Coupling phi = build_coupling(alphabet);
    std::vector<Distribution> inputs;
    inputs.reserve(static_cast<size_t>(steps));
    for (int t = 1; t <= steps; ++t)
      inputs.push_back(universal_q(decompose_full(seq.at(t)), alphabet));
    return DilationSpec(std::move(phi), std::move(inputs), seq.homogeneous());
  }
  std::vector<ConvexDecomposition> decs;
  decs.reserve(static_cast<size_t>(steps));
  std::set<MapLabel> label_union;
  for (int t = 1; t <= steps; ++t) {
    decs.push_back(decompose_greedy(seq.at(t)));
    for (const auto& term : decs.back().terms) label_union.insert(term.label);
  }
  EnvironmentAlphabet alphabet = EnvironmentAlphabet::minimal(
      seq.n(), std::vector<MapLabel>(label_union.begin(), label_union.end()));
  Coupling phi = build_coupling(alphabet);
  std::vector<Distribution> inputs;
  inputs.reserve(decs.size());
  for (const auto& dec : decs) inputs.push_back(universal_q(dec, alphabet));
  return DilationSpec(std::move(phi), std::move(inputs), seq.homogeneous());
}

DilationSpec universal_dilation(const StochasticMatrix& p) {
  return make_dilation(MatrixSequence(p), AlphabetMode::Universal);
}

DilationSpec minimal_dilation(const StochasticMatrix& p) {
  return make_dilation(MatrixSequence(p), AlphabetMode::Minimal);
}

}  // namespace mdil
