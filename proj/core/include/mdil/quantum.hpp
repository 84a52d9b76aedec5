// quantum.hpp
// Operator extension of the environment-coupled dynamics: the permutation
// unitary V induced by the coupling, the environment vector of square-root
// weights, the Kraus channel it defines on system observables, windowed
// operators on finitely many environment sites, the shift automorphism J,
// the adapted flow j_t, and the identities tying them to the classical
// chain.  Homogeneous evolutions only.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "mdil/dilation.hpp"
#include "mdil/report.hpp"

namespace mdil {

using Cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Largest dense operator dimension realized explicitly.
inline constexpr int kDenseDimCap = 5000;

// Larger cap for diagonal index transport, which stores vectors, not
// dense matrices.
inline constexpr std::int64_t kIndexMapCap = 10'000'000;

inline constexpr double kQuantumTol = 1e-10;
inline constexpr double kFlowTol = 1e-9;

double max_abs(const CMatrix& a);

CVector kron(const CVector& a, const CVector& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CVector kron_power(const CVector& v, int t);

// Permutation unitary on H (x) Z with V|i,g> = |phi(i,g)>.  Basis |i,g>
// is ordered i major, g minor, so the basis index equals the coupling's
// flat point index and V is exact 0/1 data.
class UnitaryV {
 public:
  explicit UnitaryV(Coupling phi);

  int n() const { return phi_.alphabet().n(); }
  int gdim() const { return phi_.alphabet().size(); }
  int dim() const { return n() * gdim(); }
  const Coupling& coupling() const { return phi_; }

  // Image of basis index x under V.
  int permute(int x) const { return phi_.forward(x); }
  int permute_inverse(int x) const { return phi_.inverse(x); }

  CMatrix dense() const;

  // N x N block <., g| V |., g'>: entry (i, j) is [phi(j, g') = (i, g)].
  CMatrix block(int g, int g_prime) const;

 private:
  Coupling phi_;
};

// upsilon with entries sqrt(q_g); unit norm.
CVector build_env_vector(const Distribution& q);

// Heisenberg-picture channel a -> sum_g K_g' a K_g (adjoint on the left).
// Construction enforces unitality sum_g K_g' K_g = 1.
class KrausChannel {
 public:
  explicit KrausChannel(std::vector<CMatrix> ops,
                        double unitality_tol = kQuantumTol);

  int dim() const { return static_cast<int>(ops_.front().rows()); }
  const std::vector<CMatrix>& ops() const { return ops_; }

  CMatrix apply(const CMatrix& a) const;

 private:
  std::vector<CMatrix> ops_;
};

// K_g = sum_{g'} sqrt(q_{g'}) V_{gg'}.
KrausChannel kraus_channel(const UnitaryV& v, const CVector& upsilon);

// Kraus family sqrt(p_l) |beta_l(i)><i| over decomposition terms; the
// channel output is always diagonal.
KrausChannel davis_channel(const ConvexDecomposition& dec);

// T^t(a); t = 0 is the identity map.
CMatrix heisenberg_apply(const KrausChannel& chan, const CMatrix& a, int t);

// Diagonal (multiplication) operator of a function on the state space.
CMatrix diag_observable(const std::vector<double>& f);

// T(m_{e_j}) = m_{P e_j} for every basis indicator; the off-diagonal mass
// of the outputs is recorded informationally.
VerificationReport verify_cms_extension(const KrausChannel& chan,
                                        const StochasticMatrix& p,
                                        double tol = kQuantumTol);

// Compression by a fixed environment vector or density: for A on
// H (x) K (environment factor minor),
//   E_kappa[A](i, j)  = sum_{a,b} conj(kappa_a) A(i m + a, j m + b) kappa_b
//   E_rho[A](i, j)    = sum_{a,b} A(i m + a, j m + b) rho(b, a)
CMatrix conditional_expectation(const CMatrix& a, const CVector& kappa);
CMatrix conditional_expectation(const CMatrix& a, const CMatrix& rho);

// E_rho with rho the matrix unit |z><z'|; the slices reassemble A as
// A = sum_{z,z'} slice(A, z, z') (x) |z'><z|.
CMatrix matrix_element_slice(const CMatrix& a, int z, int z_prime,
                             int env_dim);

// Dense operator on H (x) Z_lo (x) .. (x) Z_hi, identity implied outside
// the window.  H is the most significant index factor, then sites in
// increasing coordinate order; basis index
//   x = (((i * m + g_lo) * m + g_{lo+1}) .. ) * m + g_hi.
// An empty window ([1, 0]) is a system-only operator.
struct WindowOperator {
  int lo = 1;
  int hi = 0;
  int n = 0;
  int gdim = 1;
  CMatrix mat;

  int sites() const { return hi - lo + 1; }
};

std::int64_t window_dim(int n, int gdim, int sites,
                        std::int64_t cap = kDenseDimCap);

WindowOperator embed_system(const CMatrix& a, int gdim);

// Identity padding to a containing window.
WindowOperator extend_window(const WindowOperator& a, int lo, int hi);

// Relabels sites: content of coordinate s moves to s + delta.
WindowOperator shift_window(WindowOperator a, int delta);

// Both sides are extended to the union window first.
WindowOperator window_product(const WindowOperator& a,
                              const WindowOperator& b);
WindowOperator window_adjoint(const WindowOperator& a);
double window_max_abs_diff(const WindowOperator& a, const WindowOperator& b);

// E over every environment site with the same per-site vector.
CMatrix window_conditional_expectation(const WindowOperator& a,
                                       const CVector& upsilon_site);

// Function F on E x G^[lo,hi], stored over the WindowOperator basis codec.
struct DiagonalObservable {
  int lo = 1;
  int hi = 0;
  int n = 0;
  int gdim = 1;
  std::vector<double> values;

  int sites() const { return hi - lo + 1; }
  WindowOperator multiplication_operator() const;
};

// Indicator of one basis configuration.
DiagonalObservable indicator_observable(int n, int gdim, int lo, int hi,
                                        std::int64_t config);

// J(A) = V1' Theta(A) V1: shift the window right, extend so coordinate 1
// is present, conjugate by V acting on (H, site 1).  A *-automorphism of
// the window algebras; automorphism_J_inverse undoes it exactly.
WindowOperator automorphism_J(const UnitaryV& v, const WindowOperator& a);
WindowOperator automorphism_J_inverse(const UnitaryV& v,
                                      const WindowOperator& a);

// Adapted flow: j_0(a) = a on H, and
//   j_t(a) = sum_{z,z'} j_{t-1}(slice(V'(a x 1)V, z, z')) (x) |z'><z|
// on H (x) Z_1 .. Z_t.  Also reports || E_{ups^t}[j_t(a)] - T^t(a) ||_max.
struct FlowResult {
  WindowOperator jt;
  double dilation_deviation = 0.0;
};

FlowResult flow(const UnitaryV& v, const CVector& upsilon, const CMatrix& a,
                int t, std::int64_t cap = kDenseDimCap);

// J^t(m_F) versus m_{F o alpha^t}, the right side evaluated through the
// classical dynamics.  Diagonals stay diagonal under J, so J^t acts here
// as an exact index map; the dense automorphism_J is cross-checked against
// this path in the test suite.
VerificationReport check_cqd1(const Coupling& phi, const UnitaryV& v,
                              const DiagonalObservable& f, int t,
                              double tol = kQuantumTol);

// All basis indicators of the window [lo, hi] at once: compares the J^t
// index map against alpha^t configuration transport, configuration by
// configuration.
VerificationReport check_cqd1_indicators(const Coupling& phi,
                                         const UnitaryV& v, int lo, int hi,
                                         int t, double tol = kQuantumTol);

// Multivariate polynomial eta(x_1, .., x_k) as a sum of monomials.
struct Polynomial {
  struct Term {
    double coeff = 0.0;
    std::vector<int> exponents;
  };
  std::vector<Term> terms;

  double eval(const std::vector<double>& x) const;

  static Polynomial constant(double c);
};

// Classical expectation E_k[eta(F_1, .., F_k)] under the product input law
// against the trace of eta(m_{F_1}, .., m_{F_k}) in the vector state
// |k> (x) |ups (x) .. (x) ups> over the union window.  The m_{F_i} commute
// (all diagonal), so eta of them is evaluated pointwise on the diagonals.
VerificationReport check_cqd2(const DilationSpec& spec, int k,
                              const std::vector<DiagonalObservable>& fs,
                              const Polynomial& eta, double tol = kQuantumTol);

// u with u|j> = phase_j |sigma(j)> for the permutation sigma of P; the
// conjugation a -> u' a u extends P on diagonals for any unit phases.
struct AutomorphismResult {
  CMatrix u;
  VerificationReport report;
};

AutomorphismResult permutation_automorphism(const StochasticMatrix& p,
                                            const std::vector<Cplx>& phases);

}  // namespace mdil
