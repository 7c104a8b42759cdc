#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <vector>

#include "lapbs/analytic.hpp"

using namespace lapbs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("erf against a 50-digit evaluation", "[analytic]") {
  using big = boost::multiprecision::cpp_bin_float_50;
  for (double x : {-3.5, -1.0, -0.2, 1e-8, 0.1, 0.5, 0.9, 1.3, 2.0, 4.0, 5.9}) {
    const double ref = static_cast<double>(boost::math::erf(big(x)));
    CHECK_THAT(lapbs::erf(x), WithinRel(ref, 1e-15));
  }
  CHECK(lapbs::erf(0.0) == 0.0);
  CHECK_THAT(normal_cdf(0.0), WithinAbs(0.5, 1e-16));
  // deep lower tail keeps relative accuracy
  const double ref = static_cast<double>(0.5 * boost::math::erfc(big(10.0) / boost::multiprecision::sqrt(big(2))));
  CHECK_THAT(normal_cdf(-10.0), WithinRel(ref, 1e-13));
}

namespace {
// e^{-rt} E[(K - x e^{(r - sigma^2/2) t + sigma sqrt(t) Z})^+]
double put_by_quadrature(double x, double t, double K, double r, double sigma) {
  const double vol = sigma * std::sqrt(t), drift = (r - 0.5 * sigma * sigma) * t;
  const double z_star = (std::log(K / x) - drift) / vol;
  auto f = [&](double z) {
    return (K - x * std::exp(drift + vol * z)) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -40.0, z_star, 15, 1e-14);
  return std::exp(-r * t) * I;
}
}  // namespace

TEST_CASE("closed-form put against the risk-neutral integral", "[analytic]") {
  for (double x : {10.0, 40.0, 50.0, 60.0, 120.0})
    for (double t : {0.1, 1.0, 2.0}) {
      const double ref = put_by_quadrature(x, t, 50.0, 0.05, 0.3);
      CHECK_THAT(bs_put(x, t, 50.0, 0.05, 0.3), WithinAbs(ref, 1e-10 * std::max(1.0, ref)));
    }
}

TEST_CASE("closed-form put edge cases", "[analytic]") {
  CHECK(bs_put(0.0, 1.0, 50.0, 0.05, 0.3) == 50.0 * std::exp(-0.05));
  CHECK(bs_put(-1.0, 1.0, 50.0, 0.05, 0.3) == 50.0 * std::exp(-0.05));
  CHECK(bs_put(1e4, 1.0, 50.0, 0.05, 0.3) > 0.0);
  CHECK(bs_put(1e4, 1.0, 50.0, 0.05, 0.3) < 1e-60);
  CHECK_THROWS_AS(bs_put(50.0, 0.0, 50.0, 0.05, 0.3), std::domain_error);
  CHECK_THROWS_AS(bs_put(50.0, 1.0, 50.0, 0.05, 0.0), std::domain_error);
  // put-call parity with a call from the same d1, d2
  const double x = 55.0, t = 0.7, K = 50.0, r = 0.05, s = 0.3;
  const double d1 = (std::log(x / K) + (r + 0.5 * s * s) * t) / (s * std::sqrt(t)), d2 = d1 - s * std::sqrt(t);
  const double call = x * normal_cdf(d1) - K * std::exp(-r * t) * normal_cdf(d2);
  CHECK_THAT(call - bs_put(x, t, K, r, s), WithinAbs(x - K * std::exp(-r * t), 1e-12));
}

TEST_CASE("reduction rate", "[analytic]") {
  CHECK(*reduction_rate(4.0, 1.0) == 2.0);
  CHECK_THAT(*reduction_rate(2.924, 0.7524), WithinAbs(1.958, 1e-3));
  CHECK_FALSE(reduction_rate(0.0, 1.0));
  CHECK_FALSE(reduction_rate(1.0, -1.0));
  std::vector<ErrorRow> rows{{20, 10, 8.0, {}}, {10, 20, 2.0, {}}, {5, 40, 0.0, {}}};
  fill_rates(rows);
  CHECK_FALSE(rows[0].rate);
  CHECK(*rows[1].rate == 2.0);
  CHECK_FALSE(rows[2].rate);
}

TEST_CASE("L2 error of the P1 interpolant", "[analytic]") {
  const std::vector<double> lin{1.0, 3.0, 5.0};
  CHECK(l2_error(lin, 0.0, 2.0, [](double x) { return 1.0 + 2.0 * x; }) < 1e-15);
  // x vs x^2 on one cell: int_0^1 (x - x^2)^2 = 1/30
  const std::vector<double> two{0.0, 1.0};
  CHECK_THAT(l2_error(two, 0.0, 1.0, [](double x) { return x * x; }), WithinRel(std::sqrt(1.0 / 30.0), 1e-14));
  CHECK_THROWS(l2_error(std::vector<double>{1.0}, 0.0, 1.0, [](double) { return 0.0; }));
}
