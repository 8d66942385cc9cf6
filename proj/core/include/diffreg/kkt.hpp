#pragma once

#include <concepts>
#include <memory>
#include <optional>
#include <vector>

#include "diffreg/diffops.hpp"
#include "diffreg/distance.hpp"
#include "diffreg/field.hpp"
#include "diffreg/interpolation.hpp"
#include "diffreg/transport.hpp"

namespace diffreg {

struct RegConfig {
  double alpha = 1e-2;
  RegOperatorSpec op{};
  IncompressibilityMode incomp = IncompressibilityMode::near_incompressible(1e-4);

  void validate() const;
};

struct KktOptions {
  DistanceKind distance = DistanceKind::ssd;
  InterpMethod interp = InterpMethod::cubic;
  /// scheme for grad m and div v; inverse operators are always spectral
  DiffScheme scheme = DiffScheme::fd8;
};

struct Counters {
  long matvecs = 0;
  long pde_solves = 0;
  long state_solves = 0;
  long adjoint_solves = 0;
};

struct ObjectiveParts {
  double distance = 0.0;
  double regularization = 0.0;  // alpha/2 <Lv, v>
  double divergence = 0.0;      // beta/2 <((-lap)^-1 + id) div v, div v>, near-incompressible only
  double total() const { return distance + regularization + divergence; }
};

/// Reduced-space problem for one pair of images. Holds the current control
/// and the state trajectory belonging to it.
template <std::floating_point Real>
class KktProblem {
 public:
  KktProblem(ScalarField<Real> m0, ScalarField<Real> m1, RegConfig reg, KktOptions opts);

  const Grid& grid() const { return m0_.grid(); }
  const ScalarField<Real>& template_image() const { return m0_; }
  const ScalarField<Real>& reference_image() const { return m1_; }
  const RegConfig& reg() const { return reg_; }
  void set_alpha(double alpha);
  const KktOptions& options() const { return opts_; }

  /// Makes v the current control and solves the state equation (1 PDE solve).
  void set_velocity(const VectorField<Real>& v);
  const VectorField<Real>& velocity() const { return v_; }
  const TimeSeriesField<Real>& state() const;
  const ScalarField<Real>& deformed() const { return state().final(); }
  const std::vector<VectorField<Real>>& state_gradients() const { return grad_m_; }
  const TransportPlan<Real>& transport_plan() const;

  ObjectiveParts objective() const;

  /// Solves the adjoint equation (1 PDE solve) and returns the projected
  /// reduced gradient alpha L v + P[int lambda grad m dt].
  VectorField<Real> gradient();

  /// Gradient of objective().total(). Only valid after gradient().
  VectorField<Real> merit_gradient() const;

  /// Gauss-Newton matvec (1 matvec, 2 PDE solves).
  VectorField<Real> hessian_matvec(const VectorField<Real>& vt);

  /// Objective for a trial velocity without changing the current state
  /// (1 PDE solve).
  ObjectiveParts trial_objective(const VectorField<Real>& v);

  Counters& counters() { return counters_; }
  const Counters& counters() const { return counters_; }

 private:
  ObjectiveParts parts(const VectorField<Real>& v, const ScalarField<Real>& m_final) const;

  ScalarField<Real> m0_, m1_;
  RegConfig reg_;
  KktOptions opts_;
  VectorField<Real> v_;
  std::unique_ptr<TransportPlan<Real>> plan_;
  std::optional<TimeSeriesField<Real>> m_;
  std::vector<VectorField<Real>> grad_m_;
  std::optional<VectorField<Real>> body_force_;
  Counters counters_;
};

/// dist(m(1), m1) + alpha/2 <Lv, v> (+ divergence energy in the
/// near-incompressible mode).
template <std::floating_point Real>
ObjectiveParts evaluate_objective(const VectorField<Real>& v, const ScalarField<Real>& m0,
                                  const ScalarField<Real>& m1, const RegConfig& reg, const KktOptions& opts = {});

/// Data term of the Hessian at zero velocity around image m:
/// P[(grad m . s) grad m].
template <std::floating_point Real>
VectorField<Real> zero_velocity_data_term(const VectorField<Real>& grad_m, const VectorField<Real>& s,
                                          const IncompressibilityMode& mode, double alpha);

}  // namespace diffreg
