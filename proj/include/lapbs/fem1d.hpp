#pragma once

// P1 finite elements for the Laplace-transformed one-asset Black-Scholes
// equation
//
//   (z + r) u - 1/2 sigma^2 x^2 u'' - r x u' = u0   on (0, L)
//
// in the weak form
//
//   z (u, v) + 1/2 sigma^2 (x^2 u', v') + (sigma^2 - r) (x u', v) + r (u, v) = (u0, v)
//
// with a Dirichlet node at x = 0 and either a Dirichlet node or the exact
// (transparent) Robin relation u'(L) = c(z) u(L) at x = L.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "lapbs/contour.hpp"

namespace lapbs {

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, long index) : std::runtime_error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

struct Market1D {
  double r{0.05};
  double sigma{0.3};
  double strike{50.0};
  double maturity{1.0};
  double L{200.0};

  void check() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("Market1D: sigma must be positive");
    if (!(strike > 0.0)) throw std::invalid_argument("Market1D: strike must be positive");
    if (!(maturity > 0.0)) throw std::invalid_argument("Market1D: maturity must be positive");
    if (!(L >= strike)) throw std::invalid_argument("Market1D: truncation L must cover the strike");
  }
};

/// Uniform mesh 0 = x_0 < ... < x_M = L.
struct Mesh1D {
  double length{1.0};
  int cells{1};

  Mesh1D() = default;
  Mesh1D(double L, int m) : length(L), cells(m) {
    if (!(L > 0.0) || m < 1) throw std::invalid_argument("Mesh1D: need L > 0 and at least one cell");
  }
  int nodes() const { return cells + 1; }
  double h() const { return length / cells; }
  double x(int i) const { return i == cells ? length : h() * i; }
};

template <class Scalar>
struct Field1D {
  Mesh1D mesh;
  std::vector<Scalar> values;
};
using ComplexField = Field1D<cplx>;
using RealField = Field1D<double>;

/// Tridiagonal matrix; lower[i] = A(i, i-1), upper[i] = A(i, i+1).
template <class Scalar>
struct Tridiag {
  std::vector<Scalar> lower, diag, upper;

  explicit Tridiag(std::size_t n = 0) : lower(n), diag(n), upper(n) {}
  std::size_t size() const { return diag.size(); }

  std::vector<Scalar> apply(const std::vector<Scalar>& x) const {
    const std::size_t n = size();
    std::vector<Scalar> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      Scalar v = diag[i] * x[i];
      if (i > 0) v += lower[i] * x[i - 1];
      if (i + 1 < n) v += upper[i] * x[i + 1];
      y[i] = v;
    }
    return y;
  }

  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
      m = std::max(m, std::abs(lower[i]) + std::abs(diag[i]) + std::abs(upper[i]));
    return m;
  }
};

// ---------------------------------------------------------------------------
// Payoffs and boundary data

inline double payoff_put(double x, double strike) { return std::max(strike - x, 0.0); }

/// Vanilla put payoff; `kinks` lists the points where it is not smooth.
struct PutPayoff {
  double strike;
  double operator()(double x) const { return payoff_put(x, strike); }
  std::array<double, 1> kinks() const { return {strike}; }
};

/// Laplace transform of u(0, t) = K exp(-r t).
inline cplx left_dirichlet_transform(cplx z, double strike, double r) {
  const cplx d = z + r;
  if (d == cplx{0.0, 0.0}) throw std::domain_error("left_dirichlet_transform: z = -r is a pole");
  return strike / d;
}

/// c(z) in u'(L) = c(z) u(L): logarithmic derivative of the decaying exterior
/// solution x^lambda, principal square root.
inline cplx robin_coefficient(cplx z, double r, double sigma, double L) {
  const double s2 = sigma * sigma;
  const double drift = r - 0.5 * s2;
  const cplx radicand = drift * drift + 2.0 * s2 * (r + z);
  if (radicand == cplx{0.0, 0.0}) throw std::domain_error("robin_coefficient: zero radicand");
  return (-drift - std::sqrt(radicand)) / (L * s2);
}

struct Dirichlet {
  std::function<cplx(cplx)> value;
};
struct TransparentRobin {};

struct BoundarySpec {
  Dirichlet left;
  std::variant<Dirichlet, TransparentRobin> right;
};

inline Dirichlet zero_dirichlet() {
  return Dirichlet{[](cplx) { return cplx{0.0, 0.0}; }};
}

// ---------------------------------------------------------------------------
// Assembly

/// Mass matrix and spatial operator B (which includes the r u term) over all
/// nodes, integrated exactly element by element.
struct Operators1D {
  Mesh1D mesh;
  Tridiag<double> mass;
  Tridiag<double> spatial;
};

inline Operators1D assemble_operators(const Mesh1D& mesh, const Market1D& m) {
  const int n = mesh.nodes();
  Operators1D ops{mesh, Tridiag<double>(n), Tridiag<double>(n)};
  const double h = mesh.h();
  const double s2 = m.sigma * m.sigma;
  for (int e = 0; e < mesh.cells; ++e) {
    const double a = mesh.x(e);
    // Integrals over [a, a+h] in local coordinates, no cancellation for large a.
    const double int_x2 = h * (a * a + a * h + h * h / 3.0);
    const double int_x_phi0 = h * (0.5 * a + h / 6.0);
    const double int_x_phi1 = h * (0.5 * a + h / 3.0);

    const double diff = 0.5 * s2 * int_x2 / (h * h);
    const double conv = s2 - m.r;  // coefficient of x u' v
    const double m_diag = h / 3.0, m_off = h / 6.0;

    // local (row, col): row is the test function
    const double k00 = diff + conv * int_x_phi0 * (-1.0 / h) + m.r * m_diag;
    const double k01 = -diff + conv * int_x_phi0 * (1.0 / h) + m.r * m_off;
    const double k10 = -diff + conv * int_x_phi1 * (-1.0 / h) + m.r * m_off;
    const double k11 = diff + conv * int_x_phi1 * (1.0 / h) + m.r * m_diag;

    ops.spatial.diag[e] += k00;
    ops.spatial.upper[e] += k01;
    ops.spatial.lower[e + 1] += k10;
    ops.spatial.diag[e + 1] += k11;

    ops.mass.diag[e] += m_diag;
    ops.mass.upper[e] += m_off;
    ops.mass.lower[e + 1] += m_off;
    ops.mass.diag[e + 1] += m_diag;
  }
  return ops;
}

/// (u0, phi_i) for a piecewise-linear payoff, exact: each element is split at
/// the payoff kinks and Simpson's rule integrates the quadratic pieces.
template <class Payoff>
std::vector<double> load_vector(const Mesh1D& mesh, const Payoff& u0) {
  std::vector<double> b(mesh.nodes(), 0.0);
  const double h = mesh.h();
  for (int e = 0; e < mesh.cells; ++e) {
    const double a = mesh.x(e), c = mesh.x(e + 1);
    std::vector<double> cuts{a};
    for (double k : u0.kinks())
      if (k > a && k < c) cuts.push_back(k);
    cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double lo = cuts[p], hi = cuts[p + 1], mid = 0.5 * (lo + hi);
      auto phi0 = [&](double x) { return (c - x) / h; };
      auto phi1 = [&](double x) { return (x - a) / h; };
      const double w = (hi - lo) / 6.0;
      b[e] += w * (u0(lo) * phi0(lo) + 4.0 * u0(mid) * phi0(mid) + u0(hi) * phi0(hi));
      b[e + 1] += w * (u0(lo) * phi1(lo) + 4.0 * u0(mid) * phi1(mid) + u0(hi) * phi1(hi));
    }
  }
  return b;
}

/// Linear system over the non-Dirichlet nodes [first, first + A.size()).
template <class Scalar>
struct LinearSystem1D {
  Mesh1D mesh;
  Tridiag<Scalar> A;
  std::vector<Scalar> rhs;
  int first{1};
  Scalar left_value{};
  std::optional<Scalar> right_value;  // empty for a Robin right end
};

/// System for (z M + B) u = b with the boundary conditions applied.
inline LinearSystem1D<cplx> assemble(const Operators1D& ops, const std::vector<double>& load, const Market1D& m,
                                     cplx z, const BoundarySpec& bc) {
  const int M = ops.mesh.cells;
  const bool robin = std::holds_alternative<TransparentRobin>(bc.right);
  const int last = robin ? M : M - 1;
  const int n = last;  // unknowns 1 .. last
  if (n < 1) throw std::invalid_argument("assemble: mesh has no interior unknowns");

  LinearSystem1D<cplx> sys;
  sys.mesh = ops.mesh;
  sys.A = Tridiag<cplx>(n);
  sys.rhs.assign(n, cplx{});
  sys.first = 1;
  sys.left_value = bc.left.value(z);
  if (!robin) sys.right_value = std::get<Dirichlet>(bc.right).value(z);

  for (int k = 0; k < n; ++k) {
    const int i = k + 1;
    sys.A.diag[k] = ops.spatial.diag[i] + z * ops.mass.diag[i];
    if (k > 0) sys.A.lower[k] = ops.spatial.lower[i] + z * ops.mass.lower[i];
    if (k + 1 < n) sys.A.upper[k] = ops.spatial.upper[i] + z * ops.mass.upper[i];
    sys.rhs[k] = load[i];
  }
  // Dirichlet lifting
  sys.rhs[0] -= (ops.spatial.lower[1] + z * ops.mass.lower[1]) * sys.left_value;
  if (sys.right_value) sys.rhs[n - 1] -= (ops.spatial.upper[M - 1] + z * ops.mass.upper[M - 1]) * *sys.right_value;
  if (robin) {
    // -1/2 sigma^2 L^2 u'(L) vbar(L) from integrating by parts, with u'(L) = c u(L)
    const double L = ops.mesh.length;
    sys.A.diag[n - 1] -= 0.5 * m.sigma * m.sigma * L * L * robin_coefficient(z, m.r, m.sigma, L);
  }
  return sys;
}

template <class Payoff>
LinearSystem1D<cplx> assemble(const Mesh1D& mesh, const Market1D& m, cplx z, const BoundarySpec& bc,
                              const Payoff& u0) {
  return assemble(assemble_operators(mesh, m), load_vector(mesh, u0), m, z, bc);
}

/// Gaussian elimination without pivoting for a tridiagonal system. Throws
/// SolverError on a vanishing pivot.
template <class Scalar>
std::vector<Scalar> solve_tridiagonal(const Tridiag<Scalar>& A, const std::vector<Scalar>& b) {
  const std::size_t n = A.size();
  std::vector<Scalar> c(n), d(n), x(n);
  Scalar piv = A.diag[0];
  if (piv == Scalar{}) throw SolverError("solve_tridiagonal: zero pivot", 0);
  c[0] = A.upper[0] / piv;
  d[0] = b[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = A.diag[i] - A.lower[i] * c[i - 1];
    if (piv == Scalar{} || !std::isfinite(std::abs(piv)))
      throw SolverError("solve_tridiagonal: pivot breakdown", static_cast<long>(i));
    c[i] = i + 1 < n ? A.upper[i] / piv : Scalar{};
    d[i] = (b[i] - A.lower[i] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

template <class Scalar>
double residual_inf(const Tridiag<Scalar>& A, const std::vector<Scalar>& x, const std::vector<Scalar>& b) {
  const auto ax = A.apply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, std::abs(ax[i] - b[i]));
  return r;
}

template <class Scalar>
double norm_inf(const std::vector<Scalar>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Solve and scatter back onto the full node set, checking the residual
/// against 1e-12 * ||A|| * ||x||.
template <class Scalar>
Field1D<Scalar> solve(const LinearSystem1D<Scalar>& sys) {
  const auto x = solve_tridiagonal(sys.A, sys.rhs);
  const double res = residual_inf(sys.A, x, sys.rhs);
  const double scale = sys.A.norm_inf() * norm_inf(x);
  if (res > 1e-12 * scale && res > 0.0) throw SolverError("solve: residual check failed", -1);

  Field1D<Scalar> f{sys.mesh, std::vector<Scalar>(sys.mesh.nodes())};
  f.values[0] = sys.left_value;
  std::copy(x.begin(), x.end(), f.values.begin() + sys.first);
  if (sys.right_value) f.values.back() = *sys.right_value;
  return f;
}

/// The Example 1/2 boundary data: u(0) = K/(z+r) and either u(L) = 0 or the
/// transparent condition.
inline BoundarySpec put_boundary(const Market1D& m, bool transparent) {
  BoundarySpec bc;
  bc.left = Dirichlet{[K = m.strike, r = m.r](cplx z) { return left_dirichlet_transform(z, K, r); }};
  if (transparent)
    bc.right = TransparentRobin{};
  else
    bc.right = zero_dirichlet();
  return bc;
}

}  // namespace lapbs
