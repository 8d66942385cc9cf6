#pragma once

#include <concepts>
#include <vector>

#include "diffreg/diffops.hpp"
#include "diffreg/field.hpp"
#include "diffreg/interpolation.hpp"

namespace diffreg {

/// RK2 feet of the characteristics arriving at the mesh nodes after one step
/// of size ht: ytilde = x - ht v(x), y = x - ht/2 (v(x) + v(ytilde)).
/// The result holds coordinates (not wrapped).
template <std::floating_point Real>
VectorField<Real> departure_points(const VectorField<Real>& v, double ht, InterpMethod method);

/// One-step departure points together with the interpolation plan at them.
template <std::floating_point Real>
struct Trajectory {
  VectorField<Real> points;
  InterpolationPlan<Real> plan;

  Trajectory(const VectorField<Real>& v, double ht, InterpMethod method);
};

/// Characteristics for a stationary velocity: `forward` is used by the state
/// and tensor equations, `backward` (velocity negated) by the solves that run
/// from t = 1 to t = 0.
template <std::floating_point Real>
struct TransportPlan {
  Trajectory<Real> forward;
  Trajectory<Real> backward;
  ScalarField<Real> div_v;  // evaluated on the regular mesh
  InterpMethod method;
  DiffScheme scheme;

  TransportPlan(const VectorField<Real>& v, InterpMethod method, DiffScheme scheme);
  const Grid& grid() const { return div_v.grid(); }
};

template <std::floating_point Real>
TimeSeriesField<Real> solve_state(const ScalarField<Real>& m0, const TransportPlan<Real>& plan);

/// Backward continuity equation -d/dt lambda - div(lambda v) = 0 with
/// lambda(1) = final. Also used for the Gauss-Newton incremental adjoint.
template <std::floating_point Real>
TimeSeriesField<Real> solve_adjoint(const ScalarField<Real>& final_condition, const TransportPlan<Real>& plan);

/// dm~/dt + v . grad m~ = -grad m . v~, m~(0) = 0. `grad_m` holds grad m(t_j)
/// on the regular mesh for every time point.
template <std::floating_point Real>
TimeSeriesField<Real> solve_inc_state(const std::vector<VectorField<Real>>& grad_m, const VectorField<Real>& vtilde,
                                      const TransportPlan<Real>& plan);

template <std::floating_point Real>
TimeSeriesField<Real> solve_inc_adjoint_gn(const ScalarField<Real>& final_condition, const TransportPlan<Real>& plan) {
  return solve_adjoint(final_condition, plan);
}

/// df/dt + (v . grad) f = (grad v) f, f(0) = I; returns f(1).
template <std::floating_point Real>
TensorField<Real> solve_deformation_tensor(const VectorField<Real>& v, const TransportPlan<Real>& plan);

/// Departure map over the whole unit time interval: m(1, x) = m0(y(x)).
template <std::floating_point Real>
VectorField<Real> compose_trajectory(const TransportPlan<Real>& plan);

/// Spatial gradients of every time slice.
template <std::floating_point Real>
std::vector<VectorField<Real>> slice_gradients(const TimeSeriesField<Real>& series, DiffScheme scheme);

}  // namespace diffreg
