#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "lapbs/contour.hpp"
#include "lapbs/experiments.hpp"

using namespace lapbs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("kappa for the one-asset example", "[contour]") {
  const double m = mu(0.05, 0.3, 0.3, true);
  CHECK_THAT(m, WithinRel(0.0016 / 0.09, 1e-14));
  const double k = kappa_bound(0.4, m);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", k);
  CHECK(std::string(buf) == "0.01811");
}

TEST_CASE("mu variable-coefficient branch", "[contour]") {
  // (r + 2 |sigma_z|^2)^2 / sigma_floor^2
  CHECK_THAT(mu(0.05, 0.2, 0.1, false), WithinRel(0.07 * 0.07 / 0.04, 1e-14));
  CHECK_THROWS_AS(mu(0.05, 0.0, 0.3, true), std::domain_error);
  CHECK_THROWS_AS(kappa_bound(-1.0, 0.1), std::domain_error);
}

TEST_CASE("omega(y) is odd and blows up only at the ends", "[contour]") {
  CHECK(omega_of_y(0.0, 0.05) == 0.0);
  for (double y : {0.1, 0.5, 0.9, 0.999}) {
    CHECK(omega_of_y(-y, 0.07) == -omega_of_y(y, 0.07));
    CHECK_THAT(omega_of_y(y, 0.07), WithinRel(2.0 * std::atanh(y) / 0.07, 1e-13));
  }
  CHECK_THROWS_AS(omega_of_y(1.0, 0.1), std::domain_error);
}

TEST_CASE("centre node sits on the real axis with a real weight", "[contour]") {
  const ContourParams p{67.38, 62.09, 0.4213, 0.04556, 15};
  const auto nd = detail::make_node(p, 0);
  CHECK_THAT(nd.z.real(), WithinAbs(67.38 - 62.09, 1e-12));
  CHECK(nd.z.imag() == 0.0);
  CHECK_THAT(nd.weight.real(), WithinRel(p.s / (std::numbers::pi * p.tau * p.n), 1e-14));
  CHECK_THAT(nd.weight.imag(), WithinAbs(0.0, 1e-16));
}

TEST_CASE("node sets", "[contour]") {
  for (const auto& p : put_contour_rows()) {
    const auto all = quadrature_nodes(p);
    const auto half = conjugate_half_nodes(p);
    REQUIRE(all.size() == static_cast<std::size_t>(2 * p.n - 1));
    REQUIRE(half.size() == static_cast<std::size_t>(p.n));
    for (std::size_t k = 0; k < all.size(); ++k) {
      const auto& a = all[k];
      const auto& b = all[all.size() - 1 - k];
      CHECK(std::abs(a.z - std::conj(b.z)) <= 1e-12);
      CHECK(std::abs(a.weight - std::conj(b.weight)) <= 1e-12);
    }
    for (int j = 0; j < p.n; ++j) CHECK(half[j].z == all[p.n - 1 + j].z);
    // leftward opening: Re z decreases along the upper half
    for (int j = 1; j < p.n; ++j) CHECK(half[j].z.real() < half[j - 1].z.real());
  }
}

TEST_CASE("validate", "[contour]") {
  const double k = kappa_bound(0.4, mu(0.05, 0.3, 0.3, true));
  for (const auto& p : put_contour_rows()) CHECK(validate(p, k).ok());
  CHECK(validate(basket_contour(), k).ok());

  const ContourParams bad{10.0, 9.99, 0.4, 0.1, 5};
  const auto rep = validate(bad, k);
  REQUIRE_FALSE(rep.ok());
  CHECK(rep.violations.front().find("real-axis crossing") != std::string::npos);
  CHECK_FALSE(validate(ContourParams{10.0, 5.0, 0.4, -0.1, 0}, 0.0).ok());
  CHECK(validate(ContourParams{10.0, 5.0, 0.4, -0.1, 0}, 0.0).violations.size() == 2);
}
