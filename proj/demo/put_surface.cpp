// Price a European put at several maturities from one set of transformed
// solves, and compare with the closed form.

#include <cstdio>

#include "lapbs/analytic.hpp"
#include "lapbs/experiments.hpp"

int main() {
  using namespace lapbs;
  const Market1D m{0.05, 0.3, 50.0, 1.0, 200.0};
  const Mesh1D mesh(m.L, 400);
  const auto ops = assemble_operators(mesh, m);
  const auto load = load_vector(mesh, PutPayoff{m.strike});
  const auto bc = put_boundary(m, false);
  const ContourParams contour = put_contour_rows()[4];

  auto solver = [&](cplx z) { return solve(assemble(ops, load, m, z, bc)).values; };
  const auto run = solve_ensemble(solver, contour, 2);

  const double spot = 50.0;
  const int i = static_cast<int>(spot / mesh.h());
  std::printf("%6s %14s %14s\n", "t", "laplace", "closed form");
  for (double t : {0.5, 0.75, 1.0, 1.25}) {
    const auto inv = invert_at(run.ensemble, t);
    std::printf("%6.2f %14.8f %14.8f\n", t, inv.values[i], bs_put(spot, t, m.strike, m.r, m.sigma));
  }
}
