#pragma once

#include <concepts>
#include <string>

#include "diffreg/kkt.hpp"

namespace diffreg {

enum class PrecondKind { reg, h0, two_level };

std::string to_string(PrecondKind k);
PrecondKind precond_from_string(const std::string& s);

struct PrecondOptions {
  PrecondKind kind = PrecondKind::h0;
  double inner_factor = 0.1;  // inner tolerance = inner_factor * outer tolerance
  int inner_max_iterations = 50;
  /// If positive, replaces inner_factor * outer tolerance.
  double inner_tolerance = 0.0;
};

struct PrecondStats {
  long applications = 0;
  long inner_iterations = 0;
  long fallbacks = 0;  // inner solver broke down, regularization inverse used
};

/// Preconditioner for the Gauss-Newton system at the problem's current
/// state. The zero-velocity variants use the current deformed image m(1).
template <std::floating_point Real>
class Preconditioner {
 public:
  Preconditioner(const KktProblem<Real>& problem, PrecondOptions options);

  /// `outer_tolerance` is the relative tolerance of the surrounding PCG.
  VectorField<Real> apply(const VectorField<Real>& r, double outer_tolerance);

  /// alpha L s + P[(grad m(1) . s) grad m(1)] on the fine grid; the constant mode of a seminorm L gets symbol 1.
  VectorField<Real> apply_h0(const VectorField<Real>& s) const;

  const PrecondStats& stats() const { return stats_; }
  const PrecondOptions& options() const { return options_; }

 private:
  VectorField<Real> apply_reg(const VectorField<Real>& r) const;
  VectorField<Real> apply_h0_inverse(const VectorField<Real>& r, double tol);
  VectorField<Real> apply_two_level(const VectorField<Real>& r, double tol);

  const KktProblem<Real>& problem_;
  PrecondOptions options_;
  PrecondStats stats_;
  VectorField<Real> grad_final_;         // grad m(1), fine grid
  std::optional<VectorField<Real>> grad_coarse_;  // grad of restricted m(1)
};

}  // namespace diffreg
