#include <catch_amalgamated.hpp>

#include <cmath>

#include "lapbs/experiments.hpp"
#include "lapbs/inversion.hpp"

using namespace lapbs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
double invert_scalar(const ContourParams& p, cplx (*F)(cplx), double t, double* imag = nullptr) {
  const auto ens = make_ensemble(p, [F](cplx z) { return std::vector<cplx>{F(z)}; });
  const auto inv = invert_at(ens, t);
  if (imag) *imag = inv.imag_residual;
  return inv.values[0];
}
cplx shifted(cplx z) { return 1.0 / (z + 1.0); }
cplx inv_sq(cplx z) { return 1.0 / (z * z); }
}  // namespace

TEST_CASE("scalar transform pairs at t = 1", "[inversion]") {
  const auto p = put_contour_rows()[4];
  double im = 0.0;
  CHECK_THAT(invert_scalar(p, shifted, 1.0, &im), WithinRel(std::exp(-1.0), 1e-6));
  CHECK(im < 1e-14);
  CHECK_THAT(invert_scalar(p, inv_sq, 1.0), WithinRel(1.0, 1e-6));
  for (double a : {0.05, 5.0}) {
    const auto ens = make_ensemble(p, [a](cplx z) { return std::vector<cplx>{1.0 / (z + a)}; });
    CHECK_THAT(invert_at(ens, 1.0).values[0], WithinRel(std::exp(-a), 1e-6));
  }
}

TEST_CASE("more nodes help until the plateau", "[inversion]") {
  const auto rows = put_contour_rows();
  const double e3 = std::abs(invert_scalar(rows[0], shifted, 1.0) - std::exp(-1.0));
  const double e9 = std::abs(invert_scalar(rows[2], shifted, 1.0) - std::exp(-1.0));
  const double e15 = std::abs(invert_scalar(rows[4], shifted, 1.0) - std::exp(-1.0));
  CHECK(e9 < 1e-3 * e3);
  CHECK(e15 < e9);
}

TEST_CASE("one ensemble serves several times", "[inversion]") {
  const auto p = put_contour_rows()[4];
  const auto ens = make_ensemble(p, [](cplx z) { return std::vector<cplx>{shifted(z), inv_sq(z)}; });
  const auto many = invert_many(ens, {0.8, 1.0, 1.2});
  REQUIRE(many.size() == 3);
  CHECK(many[1].values == invert_at(ens, 1.0).values);
  for (std::size_t k = 0; k < 3; ++k) {
    const double t = 0.8 + 0.2 * static_cast<double>(k);
    CHECK_THAT(many[k].values[0], WithinRel(std::exp(-t), 1e-5));
    CHECK_THAT(many[k].values[1], WithinRel(t, 1e-5));
  }
}

TEST_CASE("inversion argument checks", "[inversion]") {
  const auto p = put_contour_rows()[0];
  auto ens = make_ensemble(p, [](cplx z) { return std::vector<cplx>{shifted(z)}; });
  CHECK_THROWS_AS(invert_at(ens, 0.0), std::domain_error);
  ens.values.pop_back();
  CHECK_THROWS_AS(invert_at(ens, 1.0), std::invalid_argument);
}

TEST_CASE("compensated sum", "[inversion]") {
  detail::CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 2.0);
}

TEST_CASE("direct trapezoid baseline", "[inversion]") {
  // F(z) = 1/(z+1): partial sums converge slowly to e^{-t} plus the aliasing
  // term e^{-2 alpha T} sum, which is tiny for alpha T = 10
  auto F = [](cplx z) { return 1.0 / (z + 1.0); };
  const double exact = std::exp(-1.0);
  const double e_small = std::abs(direct_trapezoid(5.0, 2.0, 200, F, 1.0) - exact);
  const double e_large = std::abs(direct_trapezoid(5.0, 2.0, 20000, F, 1.0) - exact);
  CHECK(e_large < e_small);
  CHECK(e_large < 1e-2 * exact);
  CHECK_THROWS(direct_trapezoid(5.0, 2.0, 1, F, 1.0));
  CHECK_THROWS(direct_trapezoid(5.0, 2.0, 100, F, 2.5));
}
