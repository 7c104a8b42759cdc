#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "lapbs/analytic.hpp"
#include "lapbs/experiments.hpp"
#include "lapbs/fem1d.hpp"

using namespace lapbs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("row of B at x_i = 10, h = 5", "[fem1d]") {
  const Market1D m{0.05, 0.3, 50.0, 1.0, 20.0};
  const auto ops = assemble_operators(Mesh1D(20.0, 4), m);
  const double s2 = m.sigma * m.sigma, h = 5.0, conv = s2 - m.r;
  // int x^2 on [5,10] and [10,15]; int x phi_i on the same elements
  const double x2_left = 875.0 / 3.0, x2_right = 2375.0 / 3.0;
  const double xphi_left = 125.0 / 6.0, xphi_right = 175.0 / 6.0;
  const int i = 2;
  CHECK_THAT(ops.spatial.lower[i],
             WithinRel(-0.5 * s2 * x2_left / (h * h) - conv * xphi_left / h + m.r * h / 6.0, 1e-13));
  CHECK_THAT(ops.spatial.diag[i],
             WithinRel(0.5 * s2 * (x2_left + x2_right) / (h * h) + conv * (xphi_left - xphi_right) / h +
                           m.r * 2.0 * h / 3.0,
                       1e-13));
  CHECK_THAT(ops.spatial.upper[i],
             WithinRel(-0.5 * s2 * x2_right / (h * h) + conv * xphi_right / h + m.r * h / 6.0, 1e-13));
  CHECK(ops.mass.lower[i] == h / 6.0);
  CHECK(ops.mass.diag[i] == 2.0 * h / 3.0);
  CHECK(ops.mass.upper[i] == h / 6.0);
}

TEST_CASE("B annihilates x and maps 1 to r M 1 on interior rows", "[fem1d]") {
  const Market1D m{0.05, 0.3, 50.0, 1.0, 200.0};
  const Mesh1D mesh(200.0, 37);
  const auto ops = assemble_operators(mesh, m);
  std::vector<double> x(mesh.nodes()), one(mesh.nodes(), 1.0);
  for (int i = 0; i < mesh.nodes(); ++i) x[i] = mesh.x(i);
  const auto Bx = ops.spatial.apply(x);
  const auto B1 = ops.spatial.apply(one);
  const auto M1 = ops.mass.apply(one);
  for (int i = 1; i < mesh.cells; ++i) {
    CHECK_THAT(Bx[i], WithinAbs(0.0, 1e-11 * ops.spatial.norm_inf() * 200.0));
    CHECK_THAT(B1[i], WithinRel(m.r * M1[i], 1e-12));
  }
}

TEST_CASE("payoff load vector is exact", "[fem1d]") {
  const PutPayoff u0{50.0};
  for (int M : {10, 7, 33}) {
    const Mesh1D mesh(200.0, M);
    const auto b = load_vector(mesh, u0);
    double total = 0.0;
    for (double v : b) total += v;
    CHECK_THAT(total, WithinRel(1250.0, 1e-13));
    const double h = mesh.h();
    for (int i = 0; i < mesh.nodes(); ++i) {
      const double xi = mesh.x(i);
      auto f = [&](double x) { return u0(x) * std::max(0.0, 1.0 - std::abs(x - xi) / h); };
      double ref = 0.0;
      for (double lo : {xi - h, xi}) {
        const double a = std::max(lo, 0.0), c = std::min(lo + h, 200.0);
        if (c <= a) continue;
        if (a < 50.0 && 50.0 < c)
          ref += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, 50.0) +
                 boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 50.0, c);
        else
          ref += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, c);
      }
      CHECK_THAT(b[i], WithinAbs(ref, 1e-10 * std::max(1.0, std::abs(ref))));
    }
  }
}

TEST_CASE("transparent coefficient solves the exterior characteristic equation", "[fem1d]") {
  const double r = 0.05, sigma = 0.3, L = 50.0;
  for (const auto& nd : quadrature_nodes(put_contour_rows()[4])) {
    const cplx c = robin_coefficient(nd.z, r, sigma, L);
    const cplx lam = L * c;  // u = (x/L)^lam outside
    const cplx res = 0.5 * sigma * sigma * lam * lam + (r - 0.5 * sigma * sigma) * lam - (nd.z + r);
    CHECK(std::abs(res) <= 1e-12 * std::max(1.0, std::abs(nd.z)));
    CHECK(lam.real() < 0.0);
  }
  // r = 1/2, sigma = 1: alpha = 0 and the radicand 2 (r + z) vanishes at z = -1/2
  CHECK_THROWS_AS(robin_coefficient(cplx{-0.5, 0.0}, 0.5, 1.0, L), std::domain_error);
}

TEST_CASE("Thomas solver", "[fem1d]") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const std::size_t n = 50;
  Tridiag<cplx> A(n);
  std::vector<cplx> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    A.lower[i] = {g(rng), g(rng)};
    A.upper[i] = {g(rng), g(rng)};
    A.diag[i] = cplx{g(rng), g(rng)} + 6.0;
    b[i] = {g(rng), g(rng)};
  }
  const auto x = solve_tridiagonal(A, b);
  CHECK(residual_inf(A, x, b) <= 1e-13 * A.norm_inf() * norm_inf(x));

  Tridiag<double> Z(3);
  Z.diag = {1.0, 0.0, 1.0};
  Z.lower = {0.0, 0.0, 0.0};
  Z.upper = {0.0, 0.0, 0.0};
  try {
    solve_tridiagonal(Z, std::vector<double>{1.0, 1.0, 1.0});
    FAIL("expected a pivot breakdown");
  } catch (const SolverError& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("solutions at conjugate nodes are conjugate", "[fem1d]") {
  const Market1D m{0.05, 0.3, 50.0, 1.0, 50.0};
  const Mesh1D mesh(m.L, 40);
  const auto ops = assemble_operators(mesh, m);
  const auto load = load_vector(mesh, PutPayoff{m.strike});
  for (bool transparent : {false, true}) {
    const auto bc = put_boundary(m, transparent);
    const cplx z{1.7, 23.0};
    const auto a = solve(assemble(ops, load, m, z, bc));
    const auto b = solve(assemble(ops, load, m, std::conj(z), bc));
    for (int i = 0; i < mesh.nodes(); ++i) CHECK(std::abs(a.values[i] - std::conj(b.values[i])) <= 1e-12 * 50.0);
  }
}

namespace {
// u(x) = x exp(-x/20) on (0, 40) for real z; the load is (f, phi) with f
// from the strong form (z + r) u - 1/2 sigma^2 x^2 u'' - r x u'.
struct Manufactured {
  double z, r, sigma;
  static double u(double x) { return x * std::exp(-x / 20.0); }
  double operator()(double x) const {
    const double e = std::exp(-x / 20.0);
    const double du = e * (1.0 - x / 20.0);
    const double d2u = e * (-2.0 / 20.0 + x / 400.0);
    return (z + r) * u(x) - 0.5 * sigma * sigma * x * x * d2u - r * x * du;
  }
  std::array<double, 0> kinks() const { return {}; }
};
}  // namespace

TEST_CASE("manufactured solution converges at second order", "[fem1d]") {
  const Market1D m{0.05, 0.3, 30.0, 1.0, 40.0};
  const Manufactured f{1.0, m.r, m.sigma};
  BoundarySpec bc;
  bc.left = zero_dirichlet();
  bc.right = Dirichlet{[](cplx) { return cplx{Manufactured::u(40.0), 0.0}; }};
  std::vector<double> err;
  for (int M : {40, 80, 160, 320}) {
    const auto sol = solve(assemble(Mesh1D(40.0, M), m, cplx{f.z, 0.0}, bc, f));
    std::vector<double> re(sol.values.size());
    for (std::size_t i = 0; i < re.size(); ++i) {
      re[i] = sol.values[i].real();
      CHECK(std::abs(sol.values[i].imag()) < 1e-14);
    }
    err.push_back(l2_error(re, 0.0, 40.0, &Manufactured::u));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK_THAT(*reduction_rate(err[k - 1], err[k]), WithinAbs(2.0, 0.1));
}

TEST_CASE("market validation", "[fem1d]") {
  CHECK_THROWS(Market1D{0.05, -0.3, 50.0, 1.0, 200.0}.check());
  CHECK_THROWS(Mesh1D(200.0, 0));
  CHECK_NOTHROW(Market1D{0.05, 0.3, 50.0, 1.0, 200.0}.check());
}
