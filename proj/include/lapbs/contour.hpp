#pragma once

// Hyperbolic inversion contour z(w) = gamma - sqrt(w^2 + nu^2) + i*s*w,
// its tanh reparameterisation onto (-1, 1) and the resulting quadrature.

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapbs {

using cplx = std::complex<double>;

struct ContourParams {
  double gamma{0.0};  // real shift
  double nu{1.0};     // hyperbola offset, crossing at gamma - nu
  double s{0.0};      // asymptotic slope
  double tau{1.0};    // tanh scale
  int n{1};           // half-count N; nodes j = -N+1 ... N-1

  double real_crossing() const { return gamma - nu; }
};

struct QuadNode {
  int j{0};
  cplx z{};
  // (1 / (2 pi i N)) * dz/dw(w_j) * dw/dy(y_j); inversion is sum_j weight * u(z_j) * exp(z_j t)
  cplx weight{};
};

// Lower bound for the contour's real-axis crossing, from the coercivity
// constant of the transformed operator.
inline double mu(double r_sup, double sigma_floor, double sigma_z_norm, bool constant_sigma) {
  if (!(sigma_floor > 0.0)) throw std::domain_error("mu: sigma_floor must be positive");
  const double s2 = sigma_floor * sigma_floor;
  if (constant_sigma) {
    const double d = r_sup - s2;
    return d * d / s2;
  }
  const double d = r_sup + 2.0 * sigma_z_norm * sigma_z_norm;
  return d * d / s2;
}

inline double kappa_bound(double s, double mu_value) {
  if (s < 0.0 || mu_value < 0.0) throw std::domain_error("kappa_bound: s and mu must be non-negative");
  const double t = std::tan(0.5 * std::atan(s));
  return (1.0 + 0.5 * t * t) * mu_value;
}

inline double omega_of_y(double y, double tau) {
  if (!(std::abs(y) < 1.0)) throw std::domain_error("omega_of_y: |y| must be < 1");
  // 2 atanh(y) / tau, written through log1p to stay odd and accurate near 0
  return (std::log1p(y) - std::log1p(-y)) / tau;
}

namespace detail {
inline QuadNode make_node(const ContourParams& p, int j) {
  const double y = static_cast<double>(j) / p.n;
  const double w = omega_of_y(y, p.tau);
  const double root = std::hypot(w, p.nu);
  const cplx z{p.gamma - root, p.s * w};
  const cplx dz_dw{-w / root, p.s};
  const double dw_dy = 2.0 / (p.tau * (1.0 - y * y));
  const cplx two_pi_i_n{0.0, 2.0 * std::numbers::pi * p.n};
  return QuadNode{j, z, dz_dw * dw_dy / two_pi_i_n};
}
}  // namespace detail

/// All 2N-1 nodes in ascending j. The endpoints y = +-1 are never touched.
inline std::vector<QuadNode> quadrature_nodes(const ContourParams& p) {
  if (p.n < 1 || !(p.tau > 0.0)) throw std::invalid_argument("quadrature_nodes: need n >= 1 and tau > 0");
  std::vector<QuadNode> out;
  out.reserve(2 * p.n - 1);
  for (int j = -p.n + 1; j < p.n; ++j) out.push_back(detail::make_node(p, j));
  return out;
}

/// Nodes j = 0 ... N-1. For real problem data the solution at z_{-j} is the
/// conjugate of the one at z_j, so these are the only solves required.
inline std::vector<QuadNode> conjugate_half_nodes(const ContourParams& p) {
  if (p.n < 1 || !(p.tau > 0.0)) throw std::invalid_argument("conjugate_half_nodes: need n >= 1 and tau > 0");
  std::vector<QuadNode> out;
  out.reserve(p.n);
  for (int j = 0; j < p.n; ++j) out.push_back(detail::make_node(p, j));
  return out;
}

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
};

inline ValidationReport validate(const ContourParams& p, double kappa) {
  ValidationReport rep;
  auto fail = [&](auto&&... parts) {
    std::ostringstream os;
    (os << ... << parts);
    rep.violations.push_back(os.str());
  };
  if (!(p.tau > 0.0)) fail("tau ", p.tau, " must be positive");
  if (!(p.nu > 0.0)) fail("nu ", p.nu, " must be positive");
  if (!(p.s > 0.0)) fail("slope s ", p.s, " must be positive");
  if (p.n < 1) fail("node count n ", p.n, " must be at least 1");
  if (!(p.real_crossing() > kappa)) fail("real-axis crossing ", p.real_crossing(), " <= kappa ", kappa);
  return rep;
}

}  // namespace lapbs
