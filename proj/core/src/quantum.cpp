#include "mdil/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace mdil {

namespace {

std::int64_t pow_int(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

double max_abs(const CMatrix& a) {
  double m = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      m = std::max(m, std::abs(a(r, c)));
  return m;
}

CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      out(i * b.size() + j) = a(i) * b(j);
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CVector kron_power(const CVector& v, int t) {
  CVector out(1);
  out(0) = 1.0;
  for (int i = 0; i < t; ++i) out = kron(out, v);
  return out;
}

UnitaryV::UnitaryV(Coupling phi) : phi_(std::move(phi)) {}

CMatrix UnitaryV::dense() const {
  CMatrix v = CMatrix::Zero(dim(), dim());
  for (int x = 0; x < dim(); ++x) v(permute(x), x) = 1.0;
  return v;
}

CMatrix UnitaryV::block(int g, int g_prime) const {
  CMatrix b = CMatrix::Zero(n(), n());
  for (int j = 0; j < n(); ++j) {
    auto [i, g_out] = phi_.unflat(permute(phi_.flat(j, g_prime)));
    if (g_out == g) b(i, j) = 1.0;
  }
  return b;
}

CVector build_env_vector(const Distribution& q) {
  CVector v(q.n());
  for (int g = 0; g < q.n(); ++g) v(g) = std::sqrt(q[g]);
  return v;
}

KrausChannel::KrausChannel(std::vector<CMatrix> ops, double unitality_tol)
    : ops_(std::move(ops)) {
  if (ops_.empty())
    throw BadInput("channel needs at least one Kraus operator");
  Eigen::Index d = ops_.front().rows();
  for (const auto& k : ops_)
    if (k.rows() != d || k.cols() != d)
      throw DimMismatch("Kraus operators must be square of equal size");
  CMatrix sum = CMatrix::Zero(d, d);
  for (const auto& k : ops_) sum += k.adjoint() * k;
  double dev = max_abs(sum - CMatrix::Identity(d, d));
  if (dev > unitality_tol)
    throw UnitalityViolation("sum K'K deviates from identity by " +
                             std::to_string(dev));
}

CMatrix KrausChannel::apply(const CMatrix& a) const {
  if (a.rows() != dim() || a.cols() != dim())
    throw DimMismatch("observable size differs from channel dimension");
  CMatrix out = CMatrix::Zero(dim(), dim());
  for (const auto& k : ops_) out += k.adjoint() * a * k;
  return out;
}

KrausChannel kraus_channel(const UnitaryV& v, const CVector& upsilon) {
  int n = v.n();
  int m = v.gdim();
  if (upsilon.size() != m)
    throw DimMismatch("environment vector size differs from |G|");
  std::vector<CMatrix> ops(static_cast<size_t>(m), CMatrix::Zero(n, n));
  for (int gp = 0; gp < m; ++gp) {
    Cplx w = upsilon(gp);
    if (w == Cplx(0.0, 0.0)) continue;
    for (int j = 0; j < n; ++j) {
      auto [i, g] = v.coupling().unflat(v.permute(v.coupling().flat(j, gp)));
      ops[static_cast<size_t>(g)](i, j) += w;
    }
  }
  return KrausChannel(std::move(ops));
}

KrausChannel davis_channel(const ConvexDecomposition& dec) {
  dec.validate();
  int n = dec.n;
  std::vector<CMatrix> ops;
  for (const auto& term : dec.terms) {
    if (term.weight == 0.0) continue;
    DeterministicMap beta = map_from_label(term.label, n);
    double root = std::sqrt(term.weight);
    for (int i = 0; i < n; ++i) {
      CMatrix k = CMatrix::Zero(n, n);
      k(beta(i), i) = root;
      ops.push_back(std::move(k));
    }
  }
  return KrausChannel(std::move(ops));
}

CMatrix heisenberg_apply(const KrausChannel& chan, const CMatrix& a, int t) {
  if (t < 0) throw BadInput("negative channel power");
  CMatrix out = a;
  for (int s = 0; s < t; ++s) out = chan.apply(out);
  return out;
}

CMatrix diag_observable(const std::vector<double>& f) {
  Eigen::Index n = static_cast<Eigen::Index>(f.size());
  CMatrix m = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = f[static_cast<size_t>(i)];
  return m;
}

VerificationReport verify_cms_extension(const KrausChannel& chan,
                                        const StochasticMatrix& p,
                                        double tol) {
  if (chan.dim() != p.n())
    throw DimMismatch("channel dimension differs from state space");
  VerificationReport report;
  int n = p.n();
  double offdiag = 0.0;
  for (int j = 0; j < n; ++j) {
    std::vector<double> f(static_cast<size_t>(n), 0.0);
    f[static_cast<size_t>(j)] = 1.0;
    CMatrix lhs = chan.apply(diag_observable(f));
    CMatrix rhs = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) rhs(i, i) = p(i, j);
    report.add("extension", -1, tol, max_abs(lhs - rhs),
               "f = indicator of state " + std::to_string(j));
    CMatrix off = lhs;
    off.diagonal().setZero();
    offdiag = std::max(offdiag, max_abs(off));
  }
  report.add_info("extension_offdiagonal_mass", -1, offdiag,
                  "largest off-diagonal output entry; not constrained");
  return report;
}

CMatrix conditional_expectation(const CMatrix& a, const CVector& kappa) {
  Eigen::Index m = kappa.size();
  if (m <= 0 || a.rows() != a.cols() || a.rows() % m != 0)
    throw DimMismatch("operator does not factor over the environment");
  Eigen::Index n = a.rows() / m;
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Cplx acc = 0.0;
      for (Eigen::Index x = 0; x < m; ++x) {
        if (kappa(x) == Cplx(0.0, 0.0)) continue;
        for (Eigen::Index y = 0; y < m; ++y)
          acc += std::conj(kappa(x)) * a(i * m + x, j * m + y) * kappa(y);
      }
      out(i, j) = acc;
    }
  return out;
}

CMatrix conditional_expectation(const CMatrix& a, const CMatrix& rho) {
  Eigen::Index m = rho.rows();
  if (m <= 0 || rho.cols() != m || a.rows() != a.cols() || a.rows() % m != 0)
    throw DimMismatch("operator does not factor over the environment");
  Eigen::Index n = a.rows() / m;
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Cplx acc = 0.0;
      for (Eigen::Index x = 0; x < m; ++x)
        for (Eigen::Index y = 0; y < m; ++y)
          acc += a(i * m + x, j * m + y) * rho(y, x);
      out(i, j) = acc;
    }
  return out;
}

CMatrix matrix_element_slice(const CMatrix& a, int z, int z_prime,
                             int env_dim) {
  Eigen::Index m = env_dim;
  if (m <= 0 || a.rows() != a.cols() || a.rows() % m != 0 || z < 0 ||
      z >= env_dim || z_prime < 0 || z_prime >= env_dim)
    throw DimMismatch("bad slice indices");
  Eigen::Index n = a.rows() / m;
  CMatrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = a(i * m + z_prime, j * m + z);
  return out;
}

std::int64_t window_dim(int n, int gdim, int sites, std::int64_t cap) {
  if (n <= 0 || gdim <= 0 || sites < 0) throw BadInput("bad window shape");
  std::int64_t dim = n;
  for (int s = 0; s < sites; ++s) {
    if (dim > cap / gdim)
      throw DimensionTooLarge("window dimension exceeds cap " +
                              std::to_string(cap));
    dim *= gdim;
  }
  if (dim > cap)
    throw DimensionTooLarge("window dimension exceeds cap " +
                            std::to_string(cap));
  return dim;
}

WindowOperator embed_system(const CMatrix& a, int gdim) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimMismatch("system operator must be square");
  return {1, 0, static_cast<int>(a.rows()), gdim, a};
}

WindowOperator extend_window(const WindowOperator& a, int lo, int hi) {
  if (hi < lo) {
    if (a.sites() > 0) throw BadInput("cannot shrink a window");
    return {lo, lo - 1, a.n, a.gdim, a.mat};
  }
  WindowOperator src = a;
  if (src.sites() == 0) {
    // system-only operator: anchor the (empty) window inside the target
    src.lo = lo;
    src.hi = lo - 1;
  }
  if (lo > src.lo || hi < src.hi) throw BadInput("window extension must widen");
  if (lo == src.lo && hi == src.hi) return src;
  int left = src.lo - lo;
  int right = hi - src.hi;
  std::int64_t dim_l = pow_int(src.gdim, left);
  std::int64_t dim_r = pow_int(src.gdim, right);
  std::int64_t dim_e = pow_int(src.gdim, src.sites());
  std::int64_t dim = window_dim(src.n, src.gdim, hi - lo + 1);
  WindowOperator out{lo, hi, src.n, src.gdim, CMatrix::Zero(dim, dim)};
  for (Eigen::Index xr = 0; xr < src.mat.rows(); ++xr) {
    std::int64_t ir = xr / dim_e, er = xr % dim_e;
    for (Eigen::Index xc = 0; xc < src.mat.cols(); ++xc) {
      Cplx v = src.mat(xr, xc);
      if (v == Cplx(0.0, 0.0)) continue;
      std::int64_t ic = xc / dim_e, ec = xc % dim_e;
      for (std::int64_t l = 0; l < dim_l; ++l)
        for (std::int64_t r = 0; r < dim_r; ++r) {
          std::int64_t row = ((ir * dim_l + l) * dim_e + er) * dim_r + r;
          std::int64_t col = ((ic * dim_l + l) * dim_e + ec) * dim_r + r;
          out.mat(row, col) = v;
        }
    }
  }
  return out;
}

WindowOperator shift_window(WindowOperator a, int delta) {
  a.lo += delta;
  a.hi += delta;
  return a;
}

namespace {

void check_compatible(const WindowOperator& a, const WindowOperator& b) {
  if (a.n != b.n || a.gdim != b.gdim)
    throw DimMismatch("window operators live on different spaces");
}

std::pair<int, int> union_window(const WindowOperator& a,
                                 const WindowOperator& b) {
  if (a.sites() == 0) return {b.lo, b.hi};
  if (b.sites() == 0) return {a.lo, a.hi};
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace

WindowOperator window_product(const WindowOperator& a,
                              const WindowOperator& b) {
  check_compatible(a, b);
  auto [lo, hi] = union_window(a, b);
  WindowOperator ea = extend_window(a, lo, hi);
  WindowOperator eb = extend_window(b, lo, hi);
  return {lo, hi, ea.n, ea.gdim, ea.mat * eb.mat};
}

WindowOperator window_adjoint(const WindowOperator& a) {
  return {a.lo, a.hi, a.n, a.gdim, a.mat.adjoint()};
}

double window_max_abs_diff(const WindowOperator& a, const WindowOperator& b) {
  check_compatible(a, b);
  auto [lo, hi] = union_window(a, b);
  WindowOperator ea = extend_window(a, lo, hi);
  WindowOperator eb = extend_window(b, lo, hi);
  return max_abs(ea.mat - eb.mat);
}

CMatrix window_conditional_expectation(const WindowOperator& a,
                                       const CVector& upsilon_site) {
  if (upsilon_site.size() != a.gdim)
    throw DimMismatch("per-site vector size differs from |G|");
  return conditional_expectation(a.mat, kron_power(upsilon_site, a.sites()));
}

WindowOperator DiagonalObservable::multiplication_operator() const {
  std::int64_t dim = window_dim(n, gdim, sites());
  if (static_cast<std::int64_t>(values.size()) != dim)
    throw DimMismatch("diagonal length differs from window dimension");
  WindowOperator out{lo, hi, n, gdim, CMatrix::Zero(dim, dim)};
  for (std::int64_t x = 0; x < dim; ++x)
    out.mat(x, x) = values[static_cast<size_t>(x)];
  return out;
}

DiagonalObservable indicator_observable(int n, int gdim, int lo, int hi,
                                        std::int64_t config) {
  std::int64_t dim = window_dim(n, gdim, hi - lo + 1, kIndexMapCap);
  if (config < 0 || config >= dim)
    throw BadInput("configuration out of range");
  DiagonalObservable f{lo, hi, n, gdim,
                       std::vector<double>(static_cast<size_t>(dim), 0.0)};
  f.values[static_cast<size_t>(config)] = 1.0;
  return f;
}

namespace {

// Permutation of the window basis coupling (system, site 1) through phi;
// other sites untouched.  Site 1 must lie in [lo, hi].
std::vector<std::int64_t> site1_permutation(const Coupling& phi, int lo,
                                            int hi, bool inverse) {
  if (1 < lo || 1 > hi) throw BadInput("site 1 not inside the window");
  int m = phi.alphabet().size();
  int n = phi.alphabet().n();
  int sites = hi - lo + 1;
  std::int64_t envdim = pow_int(m, sites);
  std::int64_t stride = pow_int(m, hi - 1);
  std::int64_t dim = static_cast<std::int64_t>(n) * envdim;
  std::vector<std::int64_t> perm(static_cast<size_t>(dim));
  for (std::int64_t x = 0; x < dim; ++x) {
    int i = static_cast<int>(x / envdim);
    int g = static_cast<int>((x % envdim) / stride % m);
    auto [i2, g2] = inverse ? phi.apply_inverse(i, g) : phi.apply(i, g);
    perm[static_cast<size_t>(x)] =
        x + (static_cast<std::int64_t>(i2) - i) * envdim +
        (static_cast<std::int64_t>(g2) - g) * stride;
  }
  return perm;
}

WindowOperator conjugate_site1(const UnitaryV& v, const WindowOperator& a,
                               bool inverse) {
  auto perm = site1_permutation(v.coupling(), a.lo, a.hi, inverse);
  WindowOperator out{a.lo, a.hi, a.n, a.gdim,
                     CMatrix(a.mat.rows(), a.mat.cols())};
  for (Eigen::Index x = 0; x < a.mat.rows(); ++x)
    for (Eigen::Index y = 0; y < a.mat.cols(); ++y)
      out.mat(x, y) = a.mat(perm[static_cast<size_t>(x)],
                            perm[static_cast<size_t>(y)]);
  return out;
}

}  // namespace

WindowOperator automorphism_J(const UnitaryV& v, const WindowOperator& a) {
  WindowOperator b = shift_window(a, 1);
  int lo = std::min(1, b.sites() == 0 ? 1 : b.lo);
  int hi = std::max(1, b.sites() == 0 ? 1 : b.hi);
  window_dim(b.n, b.gdim, hi - lo + 1);  // cap guard before densifying
  b = extend_window(b, lo, hi);
  return conjugate_site1(v, b, false);
}

WindowOperator automorphism_J_inverse(const UnitaryV& v,
                                      const WindowOperator& a) {
  int lo = std::min(1, a.sites() == 0 ? 1 : a.lo);
  int hi = std::max(1, a.sites() == 0 ? 1 : a.hi);
  window_dim(a.n, a.gdim, hi - lo + 1);
  WindowOperator b = extend_window(a, lo, hi);
  b = conjugate_site1(v, b, true);
  return shift_window(std::move(b), -1);
}

namespace {

CMatrix conj_system_by_v(const UnitaryV& v, const CMatrix& a) {
  int n = v.n(), m = v.gdim(), dim = n * m;
  if (a.rows() != n || a.cols() != n)
    throw DimMismatch("flow observable must act on the system alone");
  CMatrix out(dim, dim);
  for (int x = 0; x < dim; ++x) {
    int px = v.permute(x);
    for (int y = 0; y < dim; ++y) {
      int py = v.permute(y);
      out(x, y) = (px % m == py % m) ? a(px / m, py / m) : Cplx(0.0, 0.0);
    }
  }
  return out;
}

CMatrix flow_rec(const UnitaryV& v, const CMatrix& a, int t) {
  if (t == 0) return a;
  CMatrix b = conj_system_by_v(v, a);
  int m = v.gdim();
  std::int64_t sub = static_cast<std::int64_t>(v.n()) * pow_int(m, t - 1);
  CMatrix out = CMatrix::Zero(sub * m, sub * m);
  for (int z = 0; z < m; ++z)
    for (int zp = 0; zp < m; ++zp) {
      CMatrix s = matrix_element_slice(b, z, zp, m);
      if (s.isZero(0.0)) continue;
      CMatrix prev = flow_rec(v, s, t - 1);
      for (std::int64_t p = 0; p < sub; ++p)
        for (std::int64_t q = 0; q < sub; ++q)
          out(p * m + zp, q * m + z) += prev(p, q);
    }
  return out;
}

}  // namespace

FlowResult flow(const UnitaryV& v, const CVector& upsilon, const CMatrix& a,
                int t, std::int64_t cap) {
  if (t < 0) throw BadInput("negative flow time");
  window_dim(v.n(), v.gdim(), t, cap);
  CMatrix jt = flow_rec(v, a, t);
  CMatrix compressed = conditional_expectation(jt, kron_power(upsilon, t));
  CMatrix target = heisenberg_apply(kraus_channel(v, upsilon), a, t);
  FlowResult result;
  result.dilation_deviation = max_abs(compressed - target);
  result.jt = {1, t, v.n(), v.gdim(), std::move(jt)};
  return result;
}

namespace {

struct DiagonalTransport {
  int lo, hi;
  std::vector<std::int64_t> map;  // current basis index -> start basis index
};

// One J step on diagonals: J(diag v) = diag w on the window
// [min(1, lo+1), max(1, hi+1)] with w[x] = v[step(x)].
DiagonalTransport diagonal_j_step(const Coupling& phi, int lo, int hi,
                                  std::int64_t cap) {
  int m = phi.alphabet().size();
  int n = phi.alphabet().n();
  int lo2 = std::min(1, lo + 1);
  int hi2 = std::max(1, hi + 1);
  int sites2 = hi2 - lo2 + 1;
  std::int64_t dim2 = window_dim(n, m, sites2, cap);
  std::int64_t envdim2 = dim2 / n;
  DiagonalTransport out{lo2, hi2,
                        std::vector<std::int64_t>(static_cast<size_t>(dim2))};
  std::vector<int> gs(static_cast<size_t>(sites2));
  for (std::int64_t x = 0; x < dim2; ++x) {
    int i = static_cast<int>(x / envdim2);
    std::int64_t e = x % envdim2;
    for (int s = sites2 - 1; s >= 0; --s) {
      gs[static_cast<size_t>(s)] = static_cast<int>(e % m);
      e /= m;
    }
    auto coord = [&](int c) { return gs[static_cast<size_t>(c - lo2)]; };
    auto [i2, g12] = phi.apply(i, coord(1));
    std::int64_t old_index = i2;
    for (int s = lo; s <= hi; ++s)
      old_index = old_index * m + (s + 1 == 1 ? g12 : coord(s + 1));
    out.map[static_cast<size_t>(x)] = old_index;
  }
  return out;
}

// Composition of t diagonal J steps from window [lo, hi].
DiagonalTransport diagonal_j_transport(const Coupling& phi, int lo, int hi,
                                       int t, std::int64_t cap) {
  int n = phi.alphabet().n();
  int m = phi.alphabet().size();
  std::int64_t dim0 = window_dim(n, m, hi - lo + 1, cap);
  DiagonalTransport total{lo, hi,
                          std::vector<std::int64_t>(
                              static_cast<size_t>(dim0))};
  for (std::int64_t x = 0; x < dim0; ++x)
    total.map[static_cast<size_t>(x)] = x;
  for (int s = 0; s < t; ++s) {
    DiagonalTransport step = diagonal_j_step(phi, total.lo, total.hi, cap);
    for (auto& target : step.map)
      target = total.map[static_cast<size_t>(target)];
    total = std::move(step);
  }
  return total;
}

// Start-window basis index reached classically: run alpha^t from the
// configuration x over [lo, hi], then read the system and coordinates
// [f_lo, f_hi] of the result.
std::int64_t classical_transport(const Coupling& phi, int lo, int hi,
                                 std::int64_t x, int t, int f_lo, int f_hi) {
  int m = phi.alphabet().size();
  int sites = hi - lo + 1;
  std::int64_t envdim = pow_int(m, sites);
  int system = static_cast<int>(x / envdim);
  std::int64_t e = x % envdim;
  std::vector<int> gs(static_cast<size_t>(sites));
  for (int s = sites - 1; s >= 0; --s) {
    gs[static_cast<size_t>(s)] = static_cast<int>(e % m);
    e /= m;
  }
  GlobalState z{system, EnvironmentWindow(lo, std::move(gs)), 0};
  GlobalState zt = alpha_apply(phi, std::move(z), t);
  std::int64_t idx = zt.system;
  for (int s = f_lo; s <= f_hi; ++s) idx = idx * m + zt.env.at(s);
  return idx;
}

void require_matching(const Coupling& phi, const UnitaryV& v) {
  if (v.coupling().forward_table() != phi.forward_table())
    throw DimMismatch("unitary was built from a different coupling");
}

}  // namespace

VerificationReport check_cqd1(const Coupling& phi, const UnitaryV& v,
                              const DiagonalObservable& f, int t, double tol) {
  require_matching(phi, v);
  if (f.n != phi.alphabet().n() || f.gdim != phi.alphabet().size())
    throw DimMismatch("observable lives on a different alphabet");
  DiagonalTransport transport =
      diagonal_j_transport(phi, f.lo, f.hi, t, kIndexMapCap);
  double worst = 0.0;
  std::string where;
  std::int64_t dim = static_cast<std::int64_t>(transport.map.size());
  for (std::int64_t x = 0; x < dim; ++x) {
    double quantum =
        f.values[static_cast<size_t>(transport.map[static_cast<size_t>(x)])];
    double classical = f.values[static_cast<size_t>(classical_transport(
        phi, transport.lo, transport.hi, x, t, f.lo, f.hi))];
    double dev = std::abs(quantum - classical);
    if (dev > worst) {
      worst = dev;
      where = "configuration " + std::to_string(x);
    }
  }
  VerificationReport report;
  report.add("cqd1", t, tol, worst, worst > tol ? where : "");
  return report;
}

VerificationReport check_cqd1_indicators(const Coupling& phi,
                                         const UnitaryV& v, int lo, int hi,
                                         int t, double tol) {
  require_matching(phi, v);
  DiagonalTransport transport =
      diagonal_j_transport(phi, lo, hi, t, kIndexMapCap);
  std::int64_t dim = static_cast<std::int64_t>(transport.map.size());
  std::int64_t mismatches = 0;
  std::string where;
  for (std::int64_t x = 0; x < dim; ++x) {
    std::int64_t quantum = transport.map[static_cast<size_t>(x)];
    std::int64_t classical =
        classical_transport(phi, transport.lo, transport.hi, x, t, lo, hi);
    if (quantum != classical) {
      if (mismatches == 0)
        where = "first mismatch at configuration " + std::to_string(x);
      ++mismatches;
    }
  }
  VerificationReport report;
  report.add("cqd1_indicators", t, tol, mismatches == 0 ? 0.0 : 1.0,
             mismatches == 0 ? ""
                             : where + " (" + std::to_string(mismatches) +
                                   " of " + std::to_string(dim) + ")");
  return report;
}

double Polynomial::eval(const std::vector<double>& x) const {
  double acc = 0.0;
  for (const auto& term : terms) {
    if (term.exponents.size() > x.size())
      throw DimMismatch("polynomial arity exceeds argument count");
    double v = term.coeff;
    for (size_t i = 0; i < term.exponents.size(); ++i)
      for (int e = 0; e < term.exponents[i]; ++e) v *= x[i];
    acc += v;
  }
  return acc;
}

Polynomial Polynomial::constant(double c) { return {{{c, {}}}}; }

namespace {

// Observable values over a containing window (reads only original sites).
std::vector<double> widen_observable(const DiagonalObservable& f, int lo,
                                     int hi) {
  if (f.sites() > 0 && (lo > f.lo || hi < f.hi))
    throw BadInput("observable widening must widen");
  int m = f.gdim;
  int sites = hi - lo + 1;
  std::int64_t dim = window_dim(f.n, m, sites, kIndexMapCap);
  std::vector<double> out(static_cast<size_t>(dim));
  std::int64_t envdim = pow_int(m, sites);
  std::vector<int> gs(static_cast<size_t>(sites));
  for (std::int64_t x = 0; x < dim; ++x) {
    std::int64_t e = x % envdim;
    for (int s = sites - 1; s >= 0; --s) {
      gs[static_cast<size_t>(s)] = static_cast<int>(e % m);
      e /= m;
    }
    std::int64_t idx = x / envdim;
    for (int s = f.lo; s <= f.hi; ++s)
      idx = idx * m + gs[static_cast<size_t>(s - lo)];
    out[static_cast<size_t>(x)] = f.values[static_cast<size_t>(idx)];
  }
  return out;
}

}  // namespace

VerificationReport check_cqd2(const DilationSpec& spec, int k,
                              const std::vector<DiagonalObservable>& fs,
                              const Polynomial& eta, double tol) {
  if (fs.empty()) throw BadInput("needs at least one observable");
  const auto& a = spec.alphabet();
  if (k < 0 || k >= a.n()) throw BadInput("start state outside state space");
  bool any_sites = false;
  int lo = 1, hi = 0;
  for (const auto& f : fs) {
    if (f.n != a.n() || f.gdim != a.size())
      throw DimMismatch("observable lives on a different alphabet");
    if (f.sites() == 0) continue;
    lo = any_sites ? std::min(lo, f.lo) : f.lo;
    hi = any_sites ? std::max(hi, f.hi) : f.hi;
    any_sites = true;
  }
  if (!any_sites) {
    lo = 1;
    hi = 0;
  }
  int m = a.size();
  int sites = hi - lo + 1;
  std::int64_t envdim = pow_int(m, sites);
  if (static_cast<std::int64_t>(a.n()) * envdim > kIndexMapCap)
    throw WindowTooLarge("observable window too wide for enumeration");

  std::vector<std::vector<double>> values;
  values.reserve(fs.size());
  for (const auto& f : fs) values.push_back(widen_observable(f, lo, hi));

  std::vector<const Distribution*> site_laws;
  for (int s = lo; s <= hi; ++s)
    site_laws.push_back(s >= 1 ? &spec.q(s) : &spec.negative_side());

  std::vector<double> args(fs.size());

  // classical side: exact enumeration over the product-law support
  double classical = 0.0;
  std::vector<int> gs(static_cast<size_t>(sites), 0);
  std::function<void(int, double)> recurse = [&](int s, double w) {
    if (s == sites) {
      std::int64_t idx = k;
      for (int c = 0; c < sites; ++c)
        idx = idx * m + gs[static_cast<size_t>(c)];
      for (size_t fi = 0; fi < fs.size(); ++fi)
        args[fi] = values[fi][static_cast<size_t>(idx)];
      classical += w * eta.eval(args);
      return;
    }
    const Distribution& q = *site_laws[static_cast<size_t>(s)];
    for (int g = 0; g < m; ++g) {
      if (q[g] <= 0.0) continue;
      gs[static_cast<size_t>(s)] = g;
      recurse(s + 1, w * q[g]);
    }
  };
  recurse(0, 1.0);

  // quantum side: eta of commuting diagonals in the vector state
  // |k> (x) (x)_s |sqrt(q_s)>
  double quantum = 0.0;
  std::vector<CVector> site_vectors;
  site_vectors.reserve(site_laws.size());
  for (const Distribution* q : site_laws)
    site_vectors.push_back(build_env_vector(*q));
  for (std::int64_t e = 0; e < envdim; ++e) {
    Cplx amp = 1.0;
    std::int64_t rest = e;
    for (int s = sites - 1; s >= 0; --s) {
      amp *= site_vectors[static_cast<size_t>(s)](
          static_cast<Eigen::Index>(rest % m));
      rest /= m;
    }
    if (amp == Cplx(0.0, 0.0)) continue;
    std::int64_t idx = k * envdim + e;
    for (size_t fi = 0; fi < fs.size(); ++fi)
      args[fi] = values[fi][static_cast<size_t>(idx)];
    quantum += std::norm(amp) * eta.eval(args);
  }

  VerificationReport report;
  report.add("cqd2", -1, tol, std::abs(classical - quantum),
             "classical " + std::to_string(classical) + ", quantum " +
                 std::to_string(quantum));
  return report;
}

AutomorphismResult permutation_automorphism(const StochasticMatrix& p,
                                            const std::vector<Cplx>& phases) {
  int n = p.n();
  if (static_cast<int>(phases.size()) != n)
    throw BadInput("need one phase per state");
  for (const Cplx& ph : phases)
    if (std::abs(std::abs(ph) - 1.0) > 1e-12)
      throw BadInput("phases must have unit modulus");
  std::vector<int> sigma(static_cast<size_t>(n), -1);
  std::vector<char> hit(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = p(i, j);
      if (std::abs(v - 1.0) <= 1e-12) {
        if (sigma[static_cast<size_t>(i)] != -1)
          throw NotAPermutation("row " + std::to_string(i) +
                                " has two unit entries");
        sigma[static_cast<size_t>(i)] = j;
      } else if (v > 1e-12) {
        throw NotAPermutation("entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") is fractional");
      }
    }
    if (sigma[static_cast<size_t>(i)] == -1)
      throw NotAPermutation("row " + std::to_string(i) +
                            " has no unit entry");
    int target = sigma[static_cast<size_t>(i)];
    if (hit[static_cast<size_t>(target)])
      throw NotAPermutation("column " + std::to_string(target) +
                            " hit twice");
    hit[static_cast<size_t>(target)] = 1;
  }

  AutomorphismResult result;
  result.u = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    result.u(sigma[static_cast<size_t>(j)], j) =
        phases[static_cast<size_t>(j)];

  for (int j = 0; j < n; ++j) {
    std::vector<double> f(static_cast<size_t>(n), 0.0);
    f[static_cast<size_t>(j)] = 1.0;
    CMatrix lhs = result.u.adjoint() * diag_observable(f) * result.u;
    CMatrix rhs = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) rhs(i, i) = p(i, j);
    result.report.add("permutation_extension", -1, kQuantumTol,
                      max_abs(lhs - rhs),
                      "f = indicator of state " + std::to_string(j));
  }
  return result;
}

}  // namespace mdil
