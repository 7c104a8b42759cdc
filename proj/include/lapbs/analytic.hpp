#pragma once

// Closed-form European put, error function and error/rate metrics.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lapbs {

// glibc's erf is correctly rounded to within 1 ulp, which is the 16-digit
// accuracy the pricing error tables need.
inline double erf(double x) { return std::erf(x); }

/// Standard normal CDF. Uses erfc so that deep tails keep relative accuracy.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double bs_put(double x, double t, double strike, double r, double sigma) {
  if (!(t > 0.0)) throw std::domain_error("bs_put: time to maturity must be positive");
  if (!(sigma > 0.0) || !(strike > 0.0)) throw std::domain_error("bs_put: sigma and strike must be positive");
  const double disc = strike * std::exp(-r * t);
  if (x <= 0.0) return disc;
  const double vol = sigma * std::sqrt(t);
  const double d1 = (std::log(x / strike) + (r + 0.5 * sigma * sigma) * t) / vol;
  const double d2 = d1 - vol;
  return disc * normal_cdf(-d2) - x * normal_cdf(-d1);
}

struct ErrorRow {
  double h{0.0};
  int cells{0};
  double error{0.0};
  std::optional<double> rate;  // absent on the first row
};

/// log2(e_coarse / e_fine); nullopt when either error is not positive.
inline std::optional<double> reduction_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) return std::nullopt;
  return std::log2(e_coarse / e_fine);
}

/// Fill the rate column of successive refinement rows.
inline void fill_rates(std::vector<ErrorRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i].rate = i == 0 ? std::nullopt : reduction_rate(rows[i - 1].error, rows[i].error);
}

namespace detail {
// 5-point Gauss-Legendre on [-1, 1]
inline constexpr std::array<double, 5> gauss5_x{-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
                                                0.5384693101056830910363144, 0.9061798459386639927976269};
inline constexpr std::array<double, 5> gauss5_w{0.2369268850561890875142640, 0.4786286704993664680412915,
                                                0.5688888888888888888888889, 0.4786286704993664680412915,
                                                0.2369268850561890875142640};
}  // namespace detail

/// L2(a, b) distance between the P1 interpolant of `nodal` on a uniform mesh
/// and `exact`, sampled at 5 Gauss points per element.
template <class Exact>
double l2_error(std::span<const double> nodal, double a, double b, Exact&& exact) {
  if (nodal.size() < 2) throw std::invalid_argument("l2_error: need at least two nodes");
  const std::size_t cells = nodal.size() - 1;
  const double h = (b - a) / static_cast<double>(cells);
  double sum = 0.0;
  for (std::size_t e = 0; e < cells; ++e) {
    const double xl = a + h * static_cast<double>(e);
    double cell = 0.0;
    for (std::size_t q = 0; q < 5; ++q) {
      const double s = 0.5 * (detail::gauss5_x[q] + 1.0);
      const double uh = nodal[e] + s * (nodal[e + 1] - nodal[e]);
      const double d = uh - exact(xl + s * h);
      cell += detail::gauss5_w[q] * d * d;
    }
    sum += 0.5 * h * cell;
  }
  return std::sqrt(sum);
}

}  // namespace lapbs
