#pragma once

// P1 finite elements for the Laplace-transformed two-asset basket equation
//
//   (z + r) u - 1/2 sum_ij a_ij x_i x_j u_ij - r sum_i x_i u_i = u0
//
// on [0, L1] x [0, L2]. Integrating the second-order term by parts gives
//
//   1/2 sum_ij a_ij (x_i x_j u_j, v_i) + sum_j beta_j (x_j u_j, v) + r (u, v)
//   beta_j = 1/2 (sum_i a_ij + a_jj) - r
//
// plus boundary terms that vanish on the x_i = 0 edges (the weight x_i does)
// and become Robin terms on transparent far edges.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "lapbs/contour.hpp"
#include "lapbs/fem1d.hpp"

namespace lapbs {

struct Basket2D {
  double r{0.05};
  std::array<std::array<double, 2>, 2> a{{{0.09, -0.018}, {-0.018, 0.09}}};
  double strike{100.0};
  double maturity{1.0};
  double L1{300.0};
  double L2{300.0};

  void check() const {
    if (a[0][1] != a[1][0]) throw std::invalid_argument("Basket2D: a must be symmetric");
    if (!(a[0][0] > 0.0) || !(a[1][1] > 0.0) || !(a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0))
      throw std::invalid_argument("Basket2D: a must be positive definite");
    if (!(maturity > 0.0) || !(strike > 0.0)) throw std::invalid_argument("Basket2D: bad strike or maturity");
  }
};

/// Uniform (M1+1) x (M2+1) grid; each cell is split along the diagonal from
/// (i, j) to (i+1, j+1). Node (i, j) has index j * (M1 + 1) + i.
struct Mesh2D {
  double L1{1.0}, L2{1.0};
  int M1{1}, M2{1};

  Mesh2D() = default;
  Mesh2D(double l1, double l2, int m1, int m2) : L1(l1), L2(l2), M1(m1), M2(m2) {
    if (!(l1 > 0.0) || !(l2 > 0.0) || m1 < 1 || m2 < 1) throw std::invalid_argument("Mesh2D: bad extents");
  }
  int nodes() const { return (M1 + 1) * (M2 + 1); }
  int node(int i, int j) const { return j * (M1 + 1) + i; }
  double h1() const { return L1 / M1; }
  double h2() const { return L2 / M2; }
  double x1(int i) const { return i == M1 ? L1 : h1() * i; }
  double x2(int j) const { return j == M2 ? L2 : h2() * j; }

  template <class F>
  void for_each_triangle(F&& f) const {
    for (int j = 0; j < M2; ++j)
      for (int i = 0; i < M1; ++i) {
        f(std::array<int, 3>{node(i, j), node(i + 1, j), node(i + 1, j + 1)},
          std::array<std::array<double, 2>, 3>{{{x1(i), x2(j)}, {x1(i + 1), x2(j)}, {x1(i + 1), x2(j + 1)}}});
        f(std::array<int, 3>{node(i, j), node(i + 1, j + 1), node(i, j + 1)},
          std::array<std::array<double, 2>, 3>{{{x1(i), x2(j)}, {x1(i + 1), x2(j + 1)}, {x1(i), x2(j + 1)}}});
      }
  }
};

template <class Scalar>
struct Field2D {
  Mesh2D mesh;
  std::vector<Scalar> values;
};
using ComplexField2D = Field2D<cplx>;
using RealField2D = Field2D<double>;

enum class EdgeCondition { NeumannZero, DirichletZero, TransparentRobin };

struct EdgeSpec {
  EdgeCondition x1_zero{EdgeCondition::NeumannZero};
  EdgeCondition x2_zero{EdgeCondition::NeumannZero};
  EdgeCondition x1_far{EdgeCondition::DirichletZero};
  EdgeCondition x2_far{EdgeCondition::DirichletZero};

  static EdgeSpec dirichlet_far() { return {}; }
  static EdgeSpec transparent_far() {
    return {EdgeCondition::NeumannZero, EdgeCondition::NeumannZero, EdgeCondition::TransparentRobin,
            EdgeCondition::TransparentRobin};
  }
};

// ---------------------------------------------------------------------------
// Payoff

inline double payoff_basket_maxput(double x1, double x2, double strike) {
  return std::max(strike - std::max(x1, x2), 0.0);
}

/// One linear piece of a piecewise-linear payoff: value c0 + c1 x1 + c2 x2 on
/// the convex region where every half-plane n0 + n1 x1 + n2 x2 >= 0.
struct LinearPiece {
  std::vector<std::array<double, 3>> half_planes;
  std::array<double, 3> value;
};

struct MaxPutPayoff {
  double strike;
  double operator()(double x1, double x2) const { return payoff_basket_maxput(x1, x2, strike); }
  std::vector<LinearPiece> pieces() const {
    return {LinearPiece{{{0.0, 1.0, -1.0}, {strike, -1.0, 0.0}}, {strike, -1.0, 0.0}},
            LinearPiece{{{0.0, -1.0, 1.0}, {strike, 0.0, -1.0}}, {strike, 0.0, -1.0}}};
  }
};

namespace detail {
using Point2 = std::array<double, 2>;

inline std::vector<Point2> clip(const std::vector<Point2>& poly, const std::array<double, 3>& hp) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  auto side = [&](const Point2& p) { return hp[0] + hp[1] * p[0] + hp[2] * p[1]; };
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& p = poly[k];
    const Point2& q = poly[(k + 1) % n];
    const double sp = side(p), sq = side(q);
    if (sp >= 0.0) out.push_back(p);
    if ((sp >= 0.0) != (sq >= 0.0)) {
      const double t = sp / (sp - sq);
      out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return out;
}

inline double tri_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

/// Barycentric coordinates of p in triangle v.
inline std::array<double, 3> barycentric(const std::array<Point2, 3>& v, const Point2& p) {
  const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
  const double l1 = ((p[0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (p[1] - v[0][1])) / det;
  const double l2 = ((v[1][0] - v[0][0]) * (p[1] - v[0][1]) - (p[0] - v[0][0]) * (v[1][1] - v[0][1])) / det;
  return {1.0 - l1 - l2, l1, l2};
}

template <class Scalar>
Eigen::SparseMatrix<Scalar> restrict_to(const Eigen::SparseMatrix<Scalar>& A, const std::vector<int>& node_to_free,
                                        int n_free) {
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it; ++it) {
      const int r = node_to_free[it.row()], c = node_to_free[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  Eigen::SparseMatrix<Scalar> out(n_free, n_free);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}
}  // namespace detail

/// (u0, phi_i) integrated exactly: each triangle is clipped against every
/// linear piece and the quadratic integrand is integrated on the resulting
/// polygons with the edge-midpoint rule.
template <class Payoff>
Eigen::VectorXd load_vector2d(const Mesh2D& mesh, const Payoff& u0) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.nodes());
  const auto pieces = u0.pieces();
  mesh.for_each_triangle([&](const std::array<int, 3>& idx, const std::array<detail::Point2, 3>& v) {
    for (const auto& piece : pieces) {
      std::vector<detail::Point2> poly(v.begin(), v.end());
      for (const auto& hp : piece.half_planes) {
        poly = detail::clip(poly, hp);
        if (poly.size() < 3) break;
      }
      if (poly.size() < 3) continue;
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const std::array<detail::Point2, 3> sub{poly[0], poly[k], poly[k + 1]};
        const double area = detail::tri_area(sub[0], sub[1], sub[2]);
        if (area == 0.0) continue;
        for (int m = 0; m < 3; ++m) {
          const detail::Point2 mid{0.5 * (sub[m][0] + sub[(m + 1) % 3][0]), 0.5 * (sub[m][1] + sub[(m + 1) % 3][1])};
          const double f = piece.value[0] + piece.value[1] * mid[0] + piece.value[2] * mid[1];
          const auto lam = detail::barycentric(v, mid);
          for (int c = 0; c < 3; ++c) b[idx[c]] += area / 3.0 * f * lam[c];
        }
      }
    }
  });
  return b;
}

struct Operators2D {
  Mesh2D mesh;
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> spatial;  // includes r * mass
  Eigen::SparseMatrix<double> convection;  // the sum_j beta_j (x_j u_j, v) part of spatial
  Eigen::SparseMatrix<double> edge_x1_far;  // int u v ds over x1 = L1
  Eigen::SparseMatrix<double> edge_x2_far;  // int u v ds over x2 = L2
};

inline Operators2D assemble_operators2d(const Mesh2D& mesh, const Basket2D& b) {
  using T = Eigen::Triplet<double>;
  std::vector<T> tm, ts, tc;
  const std::size_t nt = 2 * static_cast<std::size_t>(mesh.M1) * mesh.M2;
  tm.reserve(9 * nt);
  ts.reserve(9 * nt);
  tc.reserve(9 * nt);
  std::array<double, 2> beta{};
  for (int j = 0; j < 2; ++j) beta[j] = 0.5 * (b.a[0][j] + b.a[1][j] + b.a[j][j]) - b.r;

  mesh.for_each_triangle([&](const std::array<int, 3>& idx, const std::array<detail::Point2, 3>& v) {
    const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    const double area = 0.5 * std::abs(det);
    std::array<std::array<double, 2>, 3> g{};
    g[0] = {(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det};
    g[1] = {(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det};
    g[2] = {(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det};
    // edge midpoints; the rule is exact for the quadratic moments needed here
    std::array<detail::Point2, 3> mid{};
    for (int m = 0; m < 3; ++m)
      mid[m] = {0.5 * (v[m][0] + v[(m + 1) % 3][0]), 0.5 * (v[m][1] + v[(m + 1) % 3][1])};
    // phi_k at midpoint m: 1/2 for the two endpoints of edge m
    auto phi_mid = [](int m, int k) { return (k == m || k == (m + 1) % 3) ? 0.5 : 0.0; };

    std::array<std::array<double, 2>, 2> xx{};
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) s += mid[m][p] * mid[m][q];
        xx[p][q] = area / 3.0 * s;
      }
    for (int row = 0; row < 3; ++row) {
      std::array<double, 2> x_phi{};  // int x_j phi_row
      for (int p = 0; p < 2; ++p) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) s += mid[m][p] * phi_mid(m, row);
        x_phi[p] = area / 3.0 * s;
      }
      for (int col = 0; col < 3; ++col) {
        double diff = 0.0;
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) diff += 0.5 * b.a[p][q] * xx[p][q] * g[col][q] * g[row][p];
        double conv = 0.0;
        for (int q = 0; q < 2; ++q) conv += beta[q] * x_phi[q] * g[col][q];
        const double mass = area / 12.0 * (row == col ? 2.0 : 1.0);
        tm.emplace_back(idx[row], idx[col], mass);
        ts.emplace_back(idx[row], idx[col], diff + conv + b.r * mass);
        tc.emplace_back(idx[row], idx[col], conv);
      }
    }
  });

  std::vector<T> e1, e2;
  for (int k = 0; k < mesh.M2; ++k) {
    const int p = mesh.node(mesh.M1, k), q = mesh.node(mesh.M1, k + 1);
    const double h = mesh.h2();
    e1.insert(e1.end(), {T(p, p, h / 3), T(q, q, h / 3), T(p, q, h / 6), T(q, p, h / 6)});
  }
  for (int k = 0; k < mesh.M1; ++k) {
    const int p = mesh.node(k, mesh.M2), q = mesh.node(k + 1, mesh.M2);
    const double h = mesh.h1();
    e2.insert(e2.end(), {T(p, p, h / 3), T(q, q, h / 3), T(p, q, h / 6), T(q, p, h / 6)});
  }
  const int n = mesh.nodes();
  Operators2D ops{mesh, {}, {}, {}, {}, {}};
  auto build = [n](Eigen::SparseMatrix<double>& A, const std::vector<T>& t) {
    A.resize(n, n);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
  };
  build(ops.mass, tm);
  build(ops.spatial, ts);
  build(ops.convection, tc);
  build(ops.edge_x1_far, e1);
  build(ops.edge_x2_far, e2);
  return ops;
}

/// node -> free index (or -1 on Dirichlet-zero edges).
inline std::vector<int> free_numbering(const Mesh2D& mesh, const EdgeSpec& edges, int* n_free = nullptr) {
  if (edges.x1_zero == EdgeCondition::TransparentRobin || edges.x2_zero == EdgeCondition::TransparentRobin)
    throw std::invalid_argument("free_numbering: transparent conditions are only defined on far edges");
  std::vector<int> map(mesh.nodes(), -1);
  int k = 0;
  for (int j = 0; j <= mesh.M2; ++j)
    for (int i = 0; i <= mesh.M1; ++i) {
      const bool dir = (i == 0 && edges.x1_zero == EdgeCondition::DirichletZero) ||
                       (j == 0 && edges.x2_zero == EdgeCondition::DirichletZero) ||
                       (i == mesh.M1 && edges.x1_far == EdgeCondition::DirichletZero) ||
                       (j == mesh.M2 && edges.x2_far == EdgeCondition::DirichletZero);
      if (!dir) map[mesh.node(i, j)] = k++;
    }
  if (n_free) *n_free = k;
  return map;
}

template <class Scalar>
struct LinearSystem2D {
  Mesh2D mesh;
  Eigen::SparseMatrix<Scalar> A;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs;
  std::vector<int> node_to_free;
};

/// Full-node matrix z M + B with the transparent Robin terms, before
/// Dirichlet elimination.
inline Eigen::SparseMatrix<cplx> operator_at(const Operators2D& ops, const Basket2D& b, cplx z,
                                             const EdgeSpec& edges) {
  Eigen::SparseMatrix<cplx> A = ops.spatial.cast<cplx>() + z * ops.mass.cast<cplx>();
  if (edges.x1_far == EdgeCondition::TransparentRobin) {
    const double L = ops.mesh.L1, a11 = b.a[0][0];
    const cplx c = robin_coefficient(z, b.r, std::sqrt(a11), L);
    A -= (0.5 * a11 * L * L * c) * ops.edge_x1_far.cast<cplx>();
  }
  if (edges.x2_far == EdgeCondition::TransparentRobin) {
    const double L = ops.mesh.L2, a22 = b.a[1][1];
    const cplx c = robin_coefficient(z, b.r, std::sqrt(a22), L);
    A -= (0.5 * a22 * L * L * c) * ops.edge_x2_far.cast<cplx>();
  }
  return A;
}

inline LinearSystem2D<cplx> assemble2d(const Operators2D& ops, const Eigen::VectorXd& load, const Basket2D& b,
                                       cplx z, const EdgeSpec& edges) {
  int n_free = 0;
  LinearSystem2D<cplx> sys;
  sys.mesh = ops.mesh;
  sys.node_to_free = free_numbering(ops.mesh, edges, &n_free);
  sys.A = detail::restrict_to(operator_at(ops, b, z, edges), sys.node_to_free, n_free);
  sys.rhs.resize(n_free);
  for (int i = 0; i < ops.mesh.nodes(); ++i)
    if (sys.node_to_free[i] >= 0) sys.rhs[sys.node_to_free[i]] = load[i];
  return sys;
}

template <class Payoff>
LinearSystem2D<cplx> assemble2d(const Mesh2D& mesh, const Basket2D& b, cplx z, const EdgeSpec& edges,
                                const Payoff& u0) {
  return assemble2d(assemble_operators2d(mesh, b), load_vector2d(mesh, u0), b, z, edges);
}

/// Sparse LU solve; throws SolverError if factorisation fails or the relative
/// residual exceeds 1e-10.
template <class Scalar>
Field2D<Scalar> solve2d(const LinearSystem2D<Scalar>& sys) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(sys.A);
  if (lu.info() != Eigen::Success) throw SolverError("solve2d: factorisation failed: " + lu.lastErrorMessage(), -1);
  const Vec x = lu.solve(sys.rhs);
  const double bn = sys.rhs.norm();
  const double res = (sys.A * x - sys.rhs).norm();
  if (bn > 0.0 && !(res <= 1e-10 * bn)) throw SolverError("solve2d: relative residual " + std::to_string(res / bn), -1);

  Field2D<Scalar> f{sys.mesh, std::vector<Scalar>(sys.mesh.nodes(), Scalar{})};
  for (int i = 0; i < sys.mesh.nodes(); ++i)
    if (sys.node_to_free[i] >= 0) f.values[i] = x[sys.node_to_free[i]];
  return f;
}

/// P1 interpolant at (x1, x2) inside the mesh.
template <class Scalar>
Scalar evaluate(const Field2D<Scalar>& f, double x1, double x2) {
  const Mesh2D& m = f.mesh;
  const double s = x1 / m.h1(), t = x2 / m.h2();
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, m.M1 - 1);
  const int j = std::clamp(static_cast<int>(std::floor(t)), 0, m.M2 - 1);
  const double fx = s - i, fy = t - j;
  const Scalar u00 = f.values[m.node(i, j)], u10 = f.values[m.node(i + 1, j)];
  const Scalar u11 = f.values[m.node(i + 1, j + 1)], u01 = f.values[m.node(i, j + 1)];
  if (fx >= fy) return u00 + fx * (u10 - u00) + fy * (u11 - u10);
  return u00 + fy * (u01 - u00) + fx * (u11 - u01);
}

/// ||u - u_ref|| / ||u_ref|| in L2 over u's domain. The reference mesh must
/// nest the coarse one (integer spacing ratio, same diagonal direction), so
/// the coarse P1 function is represented exactly on the reference mesh.
inline double relative_l2_error(const RealField2D& u, const RealField2D& ref) {
  const Mesh2D& c = u.mesh;
  const Mesh2D& f = ref.mesh;
  const double r1 = c.h1() / f.h1(), r2 = c.h2() / f.h2();
  const int k1 = static_cast<int>(std::lround(r1)), k2 = static_cast<int>(std::lround(r2));
  if (k1 < 1 || k2 < 1 || std::abs(r1 - k1) > 1e-9 * r1 || std::abs(r2 - k2) > 1e-9 * r2 || k1 != k2)
    throw std::invalid_argument("relative_l2_error: reference mesh does not nest the coarse mesh");
  const int n1 = c.M1 * k1, n2 = c.M2 * k2;
  if (n1 > f.M1 || n2 > f.M2) throw std::invalid_argument("relative_l2_error: reference domain too small");

  std::vector<double> diff(static_cast<std::size_t>(n1 + 1) * (n2 + 1));
  for (int j = 0; j <= n2; ++j)
    for (int i = 0; i <= n1; ++i) {
      const int I = std::min(i / k1, c.M1 - 1), J = std::min(j / k2, c.M2 - 1);
      const double fx = static_cast<double>(i - I * k1) / k1, fy = static_cast<double>(j - J * k2) / k2;
      const double u00 = u.values[c.node(I, J)], u10 = u.values[c.node(I + 1, J)];
      const double u11 = u.values[c.node(I + 1, J + 1)], u01 = u.values[c.node(I, J + 1)];
      const double uc = fx >= fy ? u00 + fx * (u10 - u00) + fy * (u11 - u10) : u00 + fy * (u01 - u00) + fx * (u11 - u01);
      diff[static_cast<std::size_t>(j) * (n1 + 1) + i] = uc - ref.values[f.node(i, j)];
    }
  // exact P1 L2 norm on each fine triangle: area/12 (sum v^2 + (sum v)^2)
  auto tri = [](double a, double b, double d) { return a * a + b * b + d * d + (a + b + d) * (a + b + d); };
  double e2 = 0.0, r2n = 0.0;
  auto D = [&](int i, int j) { return diff[static_cast<std::size_t>(j) * (n1 + 1) + i]; };
  auto R = [&](int i, int j) { return ref.values[f.node(i, j)]; };
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      e2 += tri(D(i, j), D(i + 1, j), D(i + 1, j + 1)) + tri(D(i, j), D(i + 1, j + 1), D(i, j + 1));
      r2n += tri(R(i, j), R(i + 1, j), R(i + 1, j + 1)) + tri(R(i, j), R(i + 1, j + 1), R(i, j + 1));
    }
  return std::sqrt(e2 / r2n);
}

}  // namespace lapbs
