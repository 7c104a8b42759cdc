#pragma once

// Time-domain reconstruction from transformed solutions on the hyperbolic
// contour, plus the vertical-line trapezoid rule as a slow baseline.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lapbs/contour.hpp"

namespace lapbs {

/// Transformed solutions at the conjugate-half nodes j = 0 ... N-1.
struct TransformEnsemble {
  ContourParams contour;
  std::vector<QuadNode> nodes;
  std::vector<std::vector<cplx>> values;  // values[j][i]: u_hat(x_i, z_j)

  std::size_t field_size() const { return values.empty() ? 0 : values.front().size(); }

  void check() const {
    if (nodes.size() != static_cast<std::size_t>(contour.n) || values.size() != nodes.size())
      throw std::invalid_argument("TransformEnsemble: expected one field per conjugate-half node");
    for (const auto& v : values)
      if (v.size() != field_size()) throw std::invalid_argument("TransformEnsemble: fields differ in size");
  }
};

/// Build an ensemble from a transform evaluated node by node.
template <class Transform>
TransformEnsemble make_ensemble(const ContourParams& p, Transform&& u_hat) {
  TransformEnsemble e{p, conjugate_half_nodes(p), {}};
  e.values.reserve(e.nodes.size());
  for (const auto& nd : e.nodes) e.values.push_back(u_hat(nd.z));
  return e;
}

struct Inversion {
  std::vector<double> values;
  double imag_residual{0.0};  // max_i |Im| of the full 2N-1 term sum
};

namespace detail {
// Neumaier compensated accumulator
struct CompensatedSum {
  double sum{0.0}, comp{0.0};
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};
}  // namespace detail

/// U(t) = w_0 u_0 e^{z_0 t} + 2 Re sum_{j>=1} w_j u_j e^{z_j t}, summed in
/// ascending j. The imaginary residual re-evaluates the full sum with the
/// j < 0 nodes taken from the contour and u(conj z) = conj u(z).
inline Inversion invert_at(const TransformEnsemble& ens, double t) {
  if (!(t > 0.0)) throw std::domain_error("invert_at: t must be positive");
  ens.check();
  const std::size_t n_nodes = ens.nodes.size(), n = ens.field_size();
  std::vector<cplx> factor(n_nodes), mirror(n_nodes);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    factor[j] = ens.nodes[j].weight * std::exp(ens.nodes[j].z * t);
    if (j > 0) {
      const QuadNode neg = detail::make_node(ens.contour, -static_cast<int>(j));
      mirror[j] = neg.weight * std::exp(neg.z * t);
    }
  }
  Inversion out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    detail::CompensatedSum re, im;
    re.add((factor[0] * ens.values[0][i]).real());
    im.add((factor[0] * ens.values[0][i]).imag());
    for (std::size_t j = 1; j < n_nodes; ++j) {
      const cplx a = factor[j] * ens.values[j][i];
      re.add(2.0 * a.real());
      im.add(a.imag());
      im.add((mirror[j] * std::conj(ens.values[j][i])).imag());
    }
    out.values[i] = re.value();
    out.imag_residual = std::max(out.imag_residual, std::abs(im.value()));
  }
  return out;
}

/// One inversion per time, reusing the same transformed solutions.
inline std::vector<Inversion> invert_many(const TransformEnsemble& ens, const std::vector<double>& times) {
  std::vector<Inversion> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(invert_at(ens, t));
  return out;
}

/// Trapezoid rule on the vertical line Re z = alpha with spacing pi/T:
/// (e^{alpha t}/T) sum'_{k=0}^{N-1} [Re F(alpha + i k pi/T) cos(k pi t/T) - Im F(...) sin(k pi t/T)]
/// where the first and last terms carry weight 1/2.
template <class Transform>
double direct_trapezoid(double alpha, double T, int n_terms, Transform&& F, double t) {
  if (!(T > 0.0) || n_terms < 2) throw std::invalid_argument("direct_trapezoid: need T > 0 and at least 2 terms");
  if (!(t > 0.0 && t < T)) throw std::domain_error("direct_trapezoid: t must lie in (0, T)");
  detail::CompensatedSum acc;
  for (int k = 0; k < n_terms; ++k) {
    const double w = k * std::numbers::pi / T;
    const cplx f = F(cplx{alpha, w});
    double term = f.real() * std::cos(w * t) - f.imag() * std::sin(w * t);
    if (k == 0 || k == n_terms - 1) term *= 0.5;
    acc.add(term);
  }
  return std::exp(alpha * t) / T * acc.value();
}

}  // namespace lapbs
