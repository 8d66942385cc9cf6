#pragma once

#include <concepts>
#include <string>

#include "diffreg/field.hpp"

namespace diffreg {

enum class DiffScheme { spectral, fd8 };

/// Sobolev regularization operator L. The seminorm of order s has symbol
/// |k|^(2s) (order 1 is -Laplacian); the full norm has symbol (1 + |k|^2)^s.
struct RegOperatorSpec {
  int order = 1;
  bool seminorm = true;

  double symbol(double k2) const;
  void validate() const;
};

struct IncompressibilityMode {
  enum class Kind { none, incompressible, near_incompressible };
  Kind kind = Kind::none;
  double beta = 0.0;  // only used by near_incompressible

  static IncompressibilityMode none() { return {}; }
  static IncompressibilityMode incompressible() { return {Kind::incompressible, 0.0}; }
  static IncompressibilityMode near_incompressible(double beta) { return {Kind::near_incompressible, beta}; }

  void validate() const;
  std::string name() const;
};

// First-order derivatives.
template <std::floating_point Real>
VectorField<Real> spectral_gradient(const ScalarField<Real>& u);
template <std::floating_point Real>
ScalarField<Real> fd8_derivative(const ScalarField<Real>& u, int axis);
template <std::floating_point Real>
VectorField<Real> fd8_gradient(const ScalarField<Real>& u);
template <std::floating_point Real>
VectorField<Real> gradient(const ScalarField<Real>& u, DiffScheme scheme);
template <std::floating_point Real>
ScalarField<Real> divergence(const VectorField<Real>& v, DiffScheme scheme);
template <std::floating_point Real>
ScalarField<Real> spectral_laplacian(const ScalarField<Real>& u);

// Regularization operator and its inverses (spectral). Zero-symbol modes of
// a seminorm use a divisor of alpha * 1.
template <std::floating_point Real>
VectorField<Real> apply_reg_operator(const VectorField<Real>& v, const RegOperatorSpec& spec, double alpha);
template <std::floating_point Real>
VectorField<Real> apply_inv_reg_operator(const VectorField<Real>& b, const RegOperatorSpec& spec, double alpha);
template <std::floating_point Real>
VectorField<Real> apply_inv_sqrt_reg_operator(const VectorField<Real>& b, const RegOperatorSpec& spec,
                                              double alpha);

/// Per-mode scale of the longitudinal part removed by the near-incompressible
/// projection, (alpha (beta (1/|k|^2 + 1))^-1 + 1)^-1, composed left to right.
double near_incompressible_multiplier(double k2, double alpha, double beta);

/// b - grad (...) lap^-1 div b. Incompressible mode removes the full
/// longitudinal part (Leray); near-incompressible removes a fraction of it
/// given by near_incompressible_multiplier. Mode none returns b.
template <std::floating_point Real>
VectorField<Real> project_body_force(const VectorField<Real>& b, const IncompressibilityMode& mode, double alpha);

/// beta/2 <((-lap)^-1 + id) div v, div v>
template <std::floating_point Real>
double divergence_energy(const VectorField<Real>& v, double beta);
/// Gradient of divergence_energy with respect to v.
template <std::floating_point Real>
VectorField<Real> divergence_penalty_gradient(const VectorField<Real>& v, double beta);

// Spectral grid transfer and cut-off filters. The low band keeps modes with
// |q_i| < n_i / 4 on every axis, which is exactly the set of modes the
// half-resolution grid represents without its Nyquist.
template <std::floating_point Real>
ScalarField<Real> restrict_field(const ScalarField<Real>& u);
template <std::floating_point Real>
ScalarField<Real> prolong_field(const ScalarField<Real>& coarse, const Grid& fine);
template <std::floating_point Real>
VectorField<Real> restrict_field(const VectorField<Real>& u);
template <std::floating_point Real>
VectorField<Real> prolong_field(const VectorField<Real>& coarse, const Grid& fine);

template <std::floating_point Real>
ScalarField<Real> low_pass(const ScalarField<Real>& u);
template <std::floating_point Real>
ScalarField<Real> high_pass(const ScalarField<Real>& u);
template <std::floating_point Real>
VectorField<Real> low_pass(const VectorField<Real>& u);
template <std::floating_point Real>
VectorField<Real> high_pass(const VectorField<Real>& u);

std::string to_string(DiffScheme s);
DiffScheme diff_scheme_from_string(const std::string& s);

}  // namespace diffreg
