#pragma once

// Exact weighted norms of P1 fields, used to check the weighted Poincare
// inequality and the coercivity bound of the transformed operator on
// discrete functions.

#include <complex>
#include <vector>

#include "lapbs/fem1d.hpp"

namespace lapbs {

/// ||v||_{L2(0, L)}^2 for a P1 field.
inline double l2_norm_sq(const Mesh1D& mesh, const std::vector<cplx>& v) {
  const double h = mesh.h();
  double s = 0.0;
  for (int e = 0; e < mesh.cells; ++e) {
    const cplx a = v[e], b = v[e + 1];
    s += h / 3.0 * (std::norm(a) + std::norm(b) + (a * std::conj(b)).real());
  }
  return s;
}

/// |v|_V^2 = int (x v')^2 dx for a P1 field.
inline double weighted_seminorm_sq(const Mesh1D& mesh, const std::vector<cplx>& v) {
  const double h = mesh.h();
  double s = 0.0;
  for (int e = 0; e < mesh.cells; ++e) {
    const double a = mesh.x(e);
    s += std::norm((v[e + 1] - v[e]) / h) * h * (a * a + a * h + h * h / 3.0);
  }
  return s;
}

/// B(v, v) = sum_ij B(phi_j, phi_i) v_j conj(v_i).
inline cplx bilinear_form(const Tridiag<double>& B, const std::vector<cplx>& v) {
  cplx s{};
  const std::size_t n = B.size();
  for (std::size_t i = 0; i < n; ++i) {
    cplx row = B.diag[i] * v[i];
    if (i > 0) row += B.lower[i] * v[i - 1];
    if (i + 1 < n) row += B.upper[i] * v[i + 1];
    s += row * std::conj(v[i]);
  }
  return s;
}

}  // namespace lapbs
