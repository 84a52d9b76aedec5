// dilation.hpp
// Environment-coupled invertible dynamics over a finite alphabet G = E x L:
// the coupling map phi on E x G, the global evolution alpha = shift after
// one-site coupling on E x G^Z, its cocycle form, and the induced one-step
// transition matrix.  One universal coupling per N reproduces every
// stochastic matrix on N states by choosing the input law alone.

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mdil/decompose.hpp"
#include "mdil/markov.hpp"

namespace mdil {

enum class AlphabetMode { Universal, Minimal };

// Symbols g = (j, l) with j a state index and l a map label.  Universal
// mode carries all N^N labels, Minimal mode only the labels of a given
// sparse decomposition.  Index codec (fixed, serialized as such):
//   g = j * num_labels() + position of l in labels() (sorted ascending).
class EnvironmentAlphabet {
 public:
  EnvironmentAlphabet() = default;

  static EnvironmentAlphabet universal(int n, std::int64_t cap = kLabelCap);
  static EnvironmentAlphabet minimal(int n, std::vector<MapLabel> labels);
  static EnvironmentAlphabet minimal(const ConvexDecomposition& dec);

  int n() const { return n_; }
  AlphabetMode mode() const { return mode_; }
  const std::vector<MapLabel>& labels() const { return labels_; }
  int num_labels() const { return static_cast<int>(labels_.size()); }
  int size() const { return n_ * num_labels(); }

  int symbol_at(int j, int label_pos) const;
  int symbol(int j, MapLabel label) const;  // LabelNotInAlphabet when absent
  int state_of(int g) const;
  int label_pos_of(int g) const;
  MapLabel label_of(int g) const;
  int find_label(MapLabel label) const;  // position, or -1 when absent

  bool operator==(const EnvironmentAlphabet&) const = default;

 private:
  EnvironmentAlphabet(int n, AlphabetMode mode, std::vector<MapLabel> labels);

  int n_ = 0;
  AlphabetMode mode_ = AlphabetMode::Universal;
  std::vector<MapLabel> labels_;  // sorted ascending, distinct
};

// Bijection phi on E x G stored as forward/inverse tables over the flat
// point codec x = i * |G| + g.  On the distinguished stratum j = 0 it acts
// as phi(i, (0, l)) = (beta_l(i), (i, l)); the leftover domain is matched
// to the leftover codomain in ascending flat order (equivalently,
// lexicographic (i, j, l) order).
class Coupling {
 public:
  Coupling() = default;

  // Validates that `forward` is a bijection on 0 .. N|G|-1.
  Coupling(EnvironmentAlphabet alphabet, std::vector<int> forward);

  const EnvironmentAlphabet& alphabet() const { return alphabet_; }
  int points() const { return static_cast<int>(forward_.size()); }

  int flat(int i, int g) const { return i * alphabet_.size() + g; }
  std::pair<int, int> unflat(int x) const {
    return {x / alphabet_.size(), x % alphabet_.size()};
  }

  int forward(int x) const { return forward_[static_cast<size_t>(x)]; }
  int inverse(int x) const { return inverse_[static_cast<size_t>(x)]; }

  std::pair<int, int> apply(int i, int g) const {
    return unflat(forward(flat(i, g)));
  }
  std::pair<int, int> apply_inverse(int i, int g) const {
    return unflat(inverse(flat(i, g)));
  }

  // Component views of phi(i, g).
  int system_image(int i, int g) const { return apply(i, g).first; }
  int env_image(int i, int g) const { return apply(i, g).second; }

  const std::vector<int>& forward_table() const { return forward_; }

  bool operator==(const Coupling&) const = default;

 private:
  EnvironmentAlphabet alphabet_;
  std::vector<int> forward_;
  std::vector<int> inverse_;
};

// Coupling with the stratum rule applied for every alphabet label.
Coupling build_coupling(const EnvironmentAlphabet& alphabet);

// Stratum rule restricted to the given labels (each must be in the
// alphabet); the rest of the domain is completed lexicographically.
Coupling build_coupling(const EnvironmentAlphabet& alphabet,
                        const std::vector<MapLabel>& stratum_labels);

// Contiguous block of materialized environment coordinates [lo, hi].
// Reading or writing outside the block raises WindowUnderflow; the
// dynamics never invents symbols.  Default-constructed: empty.
class EnvironmentWindow {
 public:
  EnvironmentWindow() = default;
  EnvironmentWindow(int lo, std::vector<int> symbols)
      : lo_(lo), symbols_(std::move(symbols)) {}

  // Window [lo, hi] with every coordinate set to `fill`.
  static EnvironmentWindow filled(int lo, int hi, int fill);

  bool empty() const { return symbols_.empty(); }
  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(symbols_.size()) - 1; }
  bool contains(int n) const { return n >= lo_ && n <= hi(); }

  int at(int n) const;
  void set(int n, int g);

  // Relabels coordinates: the symbol at n moves to n + delta.
  void shift_by(int delta) { lo_ += delta; }

  const std::vector<int>& symbols() const { return symbols_; }

  bool operator==(const EnvironmentWindow&) const = default;

 private:
  int lo_ = 0;
  std::vector<int> symbols_;
};

// Point of the global system-environment dynamics.
struct GlobalState {
  int system = 0;
  EnvironmentWindow env;
  int clock = 0;

  bool operator==(const GlobalState&) const = default;
};

// Full dilation datum: (G, phi, q(t) for t >= 1) plus the per-coordinate
// law on coordinates <= 0 (defaults to q(1); the induced chain law does
// not depend on it).
class DilationSpec {
 public:
  DilationSpec() = default;
  DilationSpec(Coupling coupling, std::vector<Distribution> inputs,
               bool homogeneous,
               std::optional<Distribution> negative_side = std::nullopt);

  const Coupling& coupling() const { return coupling_; }
  const EnvironmentAlphabet& alphabet() const { return coupling_.alphabet(); }
  bool homogeneous() const { return homogeneous_; }

  // Largest t with q(t) defined; -1 when homogeneous (unbounded).
  int horizon() const;

  // Input law for coordinate t >= 1.
  const Distribution& q(int t) const;

  // Per-coordinate law for coordinates <= 0.
  const Distribution& negative_side() const;
  const std::optional<Distribution>& negative_side_override() const {
    return negative_side_;
  }

  const std::vector<Distribution>& inputs() const { return inputs_; }

 private:
  Coupling coupling_;
  std::vector<Distribution> inputs_;
  bool homogeneous_ = false;
  std::optional<Distribution> negative_side_;
};

// Signed powers of alpha = shift after coupling at coordinate 1.  A forward
// step couples (system, coordinate 1) through phi and then relabels every
// coordinate n+1 to n; negative steps invert exactly.  Touched coordinates
// must be materialized.
GlobalState alpha_apply(const DilationSpec& spec, GlobalState z, int steps);
GlobalState alpha_apply(const Coupling& phi, GlobalState z, int steps);

// Coordinate n of alpha^t(z0) by the closed formula: the plain shifted
// symbol when n <= -t or n >= 1, and the coupling output
// env_image(X_{t-1+n}, Y_{n+t}) in between (X_s the system trajectory).
int env_component(const DilationSpec& spec, const GlobalState& z0, int n,
                  int t);
int env_component(const Coupling& phi, const GlobalState& z0, int n, int t);

// Shift-free evolution: couples the system through coordinates 1..t in
// order, writing outputs back in place.  System component agrees with
// alpha_apply; coordinates <= 0 are never touched.
GlobalState cocycle_apply(const DilationSpec& spec, GlobalState z, int t);
GlobalState cocycle_apply(const Coupling& phi, GlobalState z, int t);

// P_ij = sum of q_g over symbols with system_image(i, g) = j.
StochasticMatrix induced_transition(const Coupling& phi,
                                    const Distribution& q);

// Law on G carried by a decomposition: mass p_l at (0, l), zero elsewhere.
Distribution universal_q(const ConvexDecomposition& dec,
                         const EnvironmentAlphabet& alphabet);

// Alphabet + coupling + per-step universal_q for a whole evolution.
// Universal mode uses full decompositions, Minimal mode greedy ones (with
// the label union across steps when the sequence is inhomogeneous).
DilationSpec make_dilation(const MatrixSequence& seq, AlphabetMode mode);
DilationSpec universal_dilation(const StochasticMatrix& p);
DilationSpec minimal_dilation(const StochasticMatrix& p);

}  // namespace mdil
