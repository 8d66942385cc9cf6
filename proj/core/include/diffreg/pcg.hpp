#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "diffreg/field.hpp"

namespace diffreg {

enum class PcgStatus { converged, zero_rhs, max_iterations, negative_curvature, breakdown };

inline std::string to_string(PcgStatus s) {
  switch (s) {
    case PcgStatus::converged:
      return "converged";
    case PcgStatus::zero_rhs:
      return "zero-rhs";
    case PcgStatus::max_iterations:
      return "max-iterations";
    case PcgStatus::negative_curvature:
      return "negative-curvature";
    case PcgStatus::breakdown:
      return "breakdown";
  }
  return "unknown";
}

template <class V>
struct PcgResult {
  V x;
  int iterations = 0;
  PcgStatus status = PcgStatus::converged;
  double initial_residual = 0.0;  // ||b||_2
  double final_residual = 0.0;    // ||b - A x||_2 (recurrence)
  double final_residual_inf = 0.0;
};

/// Preconditioned CG for A x = b from x = 0, stopping once
/// ||r||_2 <= rel_tol ||b||_2. Uses the Polak-Ribiere form of beta so an
/// inexact (slightly varying) preconditioner does not stall the iteration;
/// for a fixed linear preconditioner it coincides with standard PCG.
/// On non-positive curvature the previous iterate is returned (or the
/// preconditioned residual if there is none).
template <class V, class ApplyA, class ApplyM>
PcgResult<V> pcg(const V& b, ApplyA&& apply_a, ApplyM&& apply_m, double rel_tol, int max_iterations) {
  PcgResult<V> res{V(b.grid()), 0, PcgStatus::converged, 0.0, 0.0, 0.0};
  const double bnorm = l2_norm(b);
  res.initial_residual = bnorm;
  res.final_residual = bnorm;
  res.final_residual_inf = max_norm(b);
  if (bnorm == 0.0) {
    res.status = PcgStatus::zero_rhs;
    return res;
  }
  if (!std::isfinite(bnorm)) {
    res.status = PcgStatus::breakdown;
    return res;
  }
  const double target = rel_tol * bnorm;
  V r = b;
  V z = apply_m(r);
  V p = z;
  double rz = l2_inner(r, z);
  using Real = typename V::value_type;
  for (int k = 0; k < max_iterations; ++k) {
    const V ap = apply_a(p);
    const double curv = l2_inner(p, ap);
    if (!std::isfinite(curv) || !std::isfinite(rz)) {
      res.status = PcgStatus::breakdown;
      return res;
    }
    if (curv <= 0.0) {
      if (k == 0) res.x = z;
      res.status = PcgStatus::negative_curvature;
      return res;
    }
    const double step = rz / curv;
    res.x.axpy(static_cast<Real>(step), p);
    V r_old = r;
    r.axpy(static_cast<Real>(-step), ap);
    res.iterations = k + 1;
    res.final_residual = l2_norm(r);
    res.final_residual_inf = max_norm(r);
    if (res.final_residual <= target) return res;
    z = apply_m(r);
    const double rz_new = l2_inner(r, z);
    r_old -= r;  // r_old now holds r_k - r_{k+1}
    const double beta = -l2_inner(z, r_old) / rz;
    rz = rz_new;
    if (!(rz > 0.0)) {
      res.status = PcgStatus::breakdown;
      return res;
    }
    p *= static_cast<Real>(beta);
    p += z;
  }
  res.status = PcgStatus::max_iterations;
  return res;
}

}  // namespace diffreg
