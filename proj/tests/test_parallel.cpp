#include <catch_amalgamated.hpp>

#include <atomic>
#include <cstring>

#include "lapbs/experiments.hpp"
#include "lapbs/parallel.hpp"

using namespace lapbs;

namespace {
struct PutSolver {
  Market1D m{0.05, 0.3, 50.0, 1.0, 200.0};
  Mesh1D mesh{200.0, 160};
  Operators1D ops = assemble_operators(mesh, m);
  std::vector<double> load = load_vector(mesh, PutPayoff{50.0});
  BoundarySpec bc = put_boundary(m, false);
  std::vector<cplx> operator()(cplx z) const { return solve(assemble(ops, load, m, z, bc)).values; }
};

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}
}  // namespace

TEST_CASE("ensembles and inversions are bitwise independent of the worker count", "[parallel]") {
  const PutSolver solver;
  const auto p = put_contour_rows()[4];
  const auto base = solve_ensemble(solver, p, 1);
  const auto u1 = invert_at(base.ensemble, 1.0).values;
  for (int w : {2, 3, 4, 7, 20}) {
    const auto run = solve_ensemble(solver, p, w);
    CHECK(run.timing.workers == w);
    for (int j = 0; j < p.n; ++j)
      CHECK(std::memcmp(run.ensemble.values[j].data(), base.ensemble.values[j].data(),
                        base.ensemble.values[j].size() * sizeof(cplx)) == 0);
    CHECK(bitwise_equal(invert_at(run.ensemble, 1.0).values, u1));
  }
}

TEST_CASE("a persistently failing node is reported by index", "[parallel]") {
  const auto p = put_contour_rows()[2];
  const auto nodes = conjugate_half_nodes(p);
  auto solver = [&](cplx z) -> std::vector<cplx> {
    if (z == nodes[3].z) throw SolverError("singular", -1);
    return {z};
  };
  for (int w : {1, 4}) {
    try {
      solve_ensemble(solver, p, w);
      FAIL("expected EnsembleError");
    } catch (const EnsembleError& e) {
      CHECK(e.node() == 3);
      CHECK(std::string(e.what()).find("singular") != std::string::npos);
    }
  }
}

TEST_CASE("a transient failure is retried once", "[parallel]") {
  const auto p = put_contour_rows()[2];
  const auto nodes = conjugate_half_nodes(p);
  std::atomic<int> calls{0}, failures{0};
  auto solver = [&](cplx z) -> std::vector<cplx> {
    ++calls;
    if (z == nodes[5].z && failures.fetch_add(1) == 0) throw std::runtime_error("flaky");
    return {z};
  };
  const auto run = solve_ensemble(solver, p, 3);
  CHECK(calls == p.n + 1);
  CHECK(run.ensemble.values[5][0] == nodes[5].z);
}

TEST_CASE("speedup table", "[parallel]") {
  const PutSolver solver;
  const auto rows = speedup_table(solver, put_contour_rows()[4], {1, 2});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].speedup == 1.0);
  CHECK(rows[1].workers == 2);
  CHECK(rows[1].seconds > 0.0);
  CHECK_THROWS_AS(solve_ensemble(solver, put_contour_rows()[4], 0), std::invalid_argument);
}
