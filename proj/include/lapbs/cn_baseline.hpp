#pragma once

// Crank-Nicolson time marching on the same P1 mass and spatial matrices as
// the Laplace-domain solvers:
//
//   (M + dt/2 B) u^{n+1} = (M - dt/2 B) u^n
//
// with Dirichlet values imposed strongly at every step. The initial vector is
// the L2 projection of the payoff (the same data the transformed solves see).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lapbs/fem1d.hpp"
#include "lapbs/fem2d.hpp"

namespace lapbs {

struct MarchConfig {
  int steps{1};

  static MarchConfig from_dt(double maturity, double dt) {
    return MarchConfig{static_cast<int>(std::lround(maturity / dt))};
  }
  void check() const {
    if (steps < 1) throw std::invalid_argument("MarchConfig: need at least one step");
  }
};

/// Time-domain Dirichlet data u(0, t) and u(L, t).
struct TimeBoundary1D {
  std::function<double(double)> left;
  std::function<double(double)> right;
};

inline TimeBoundary1D put_time_boundary(const Market1D& m) {
  return {[K = m.strike, r = m.r](double t) { return K * std::exp(-r * t); }, [](double) { return 0.0; }};
}

namespace detail {
// Rows 1 .. M-1 of a + c b as a tridiagonal over the interior nodes.
inline Tridiag<double> interior_combination(const Tridiag<double>& a, const Tridiag<double>& b, double c) {
  const std::size_t n = a.size() - 2;
  Tridiag<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k + 1;
    out.diag[k] = a.diag[i] + c * b.diag[i];
    if (k > 0) out.lower[k] = a.lower[i] + c * b.lower[i];
    if (k + 1 < n) out.upper[k] = a.upper[i] + c * b.upper[i];
  }
  return out;
}
}  // namespace detail

template <class Payoff>
RealField march1d(const Mesh1D& mesh, const Market1D& m, const TimeBoundary1D& bc, const Payoff& u0,
                  const MarchConfig& cfg) {
  cfg.check();
  const int M = mesh.cells;
  if (M < 2) throw std::invalid_argument("march1d: need at least one interior node");
  const auto ops = assemble_operators(mesh, m);
  const auto load = load_vector(mesh, u0);
  const double dt = m.maturity / cfg.steps;

  std::vector<double> u(mesh.nodes());
  // L2 projection on the interior, boundary nodes from the t = 0 data
  {
    const auto Mi = detail::interior_combination(ops.mass, ops.spatial, 0.0);
    std::vector<double> rhs(M - 1);
    for (int k = 0; k < M - 1; ++k) rhs[k] = load[k + 1];
    u.front() = bc.left(0.0);
    u.back() = bc.right(0.0);
    rhs.front() -= ops.mass.lower[1] * u.front();
    rhs.back() -= ops.mass.upper[M - 1] * u.back();
    const auto x = solve_tridiagonal(Mi, rhs);
    std::copy(x.begin(), x.end(), u.begin() + 1);
  }

  const auto lhs = detail::interior_combination(ops.mass, ops.spatial, 0.5 * dt);
  std::vector<double> rhs(M - 1);
  for (int n = 0; n < cfg.steps; ++n) {
    const double t1 = (n + 1) * dt;
    for (int k = 0; k < M - 1; ++k) {
      const int i = k + 1;
      rhs[k] = (ops.mass.lower[i] - 0.5 * dt * ops.spatial.lower[i]) * u[i - 1] +
               (ops.mass.diag[i] - 0.5 * dt * ops.spatial.diag[i]) * u[i] +
               (ops.mass.upper[i] - 0.5 * dt * ops.spatial.upper[i]) * u[i + 1];
    }
    const double gl = bc.left(t1), gr = bc.right(t1);
    rhs.front() -= (ops.mass.lower[1] + 0.5 * dt * ops.spatial.lower[1]) * gl;
    rhs.back() -= (ops.mass.upper[M - 1] + 0.5 * dt * ops.spatial.upper[M - 1]) * gr;
    const auto x = solve_tridiagonal(lhs, rhs);
    u.front() = gl;
    std::copy(x.begin(), x.end(), u.begin() + 1);
    u.back() = gr;
  }
  return RealField{mesh, std::move(u)};
}

/// Two-asset march with zero Neumann / zero Dirichlet edges.
template <class Payoff>
RealField2D march2d(const Mesh2D& mesh, const Basket2D& b, const EdgeSpec& edges, const Payoff& u0,
                    const MarchConfig& cfg) {
  cfg.check();
  if (edges.x1_far == EdgeCondition::TransparentRobin || edges.x2_far == EdgeCondition::TransparentRobin)
    throw std::invalid_argument("march2d: transparent edges have no time-domain form here");
  const auto ops = assemble_operators2d(mesh, b);
  const Eigen::VectorXd load = load_vector2d(mesh, u0);
  int n_free = 0;
  const auto map = free_numbering(mesh, edges, &n_free);
  const Eigen::SparseMatrix<double> Mf = detail::restrict_to(ops.mass, map, n_free);
  const Eigen::SparseMatrix<double> Bf = detail::restrict_to(ops.spatial, map, n_free);
  Eigen::VectorXd bf(n_free);
  for (int i = 0; i < mesh.nodes(); ++i)
    if (map[i] >= 0) bf[map[i]] = load[i];

  const double dt = b.maturity / cfg.steps;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(Mf);
  if (lu.info() != Eigen::Success) throw SolverError("march2d: mass factorisation failed", -1);
  Eigen::VectorXd u = lu.solve(bf);

  Eigen::SparseMatrix<double> lhs = Mf + 0.5 * dt * Bf;
  const Eigen::SparseMatrix<double> rhs_op = Mf - 0.5 * dt * Bf;
  lhs.makeCompressed();
  lu.compute(lhs);
  if (lu.info() != Eigen::Success) throw SolverError("march2d: step factorisation failed", -1);
  for (int n = 0; n < cfg.steps; ++n) {
    const Eigen::VectorXd rhs = rhs_op * u;
    u = lu.solve(rhs);
  }
  RealField2D out{mesh, std::vector<double>(mesh.nodes(), 0.0)};
  for (int i = 0; i < mesh.nodes(); ++i)
    if (map[i] >= 0) out.values[i] = u[map[i]];
  return out;
}

}  // namespace lapbs
