#pragma once

#include <concepts>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffreg/kkt.hpp"
#include "diffreg/pcg.hpp"
#include "diffreg/preconditioner.hpp"

namespace diffreg {

enum class Forcing { superlinear, quadratic };

std::string to_string(Forcing f);
Forcing forcing_from_string(const std::string& s);

/// min(1/2, sqrt(|g|_inf)) or min(1/2, |g|_inf).
double forcing_tolerance(double gnorm_inf, Forcing mode);

struct ArmijoConfig {
  double c1 = 1e-4;
  double factor = 0.5;
  int max_backtracks = 20;
};

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  double value = 0.0;  // phi(step) of the last evaluation
  int evaluations = 0;
};

/// Backtracking on phi(gamma) for gamma = 1, factor, factor^2, ... until
/// phi(gamma) <= phi0 + c1 gamma slope. `slope` is the directional
/// derivative at gamma = 0 and must be negative.
template <class Phi>
LineSearchResult armijo_line_search(Phi&& phi, double phi0, double slope, const ArmijoConfig& cfg = {}) {
  if (!(slope < 0.0)) throw std::invalid_argument("armijo_line_search: direction is not a descent direction");
  LineSearchResult res;
  double gamma = 1.0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    const double value = phi(gamma);
    ++res.evaluations;
    res.value = value;
    if (value <= phi0 + cfg.c1 * gamma * slope) {
      res.accepted = true;
      res.step = gamma;
      return res;
    }
    gamma *= cfg.factor;
  }
  return res;
}

struct OptimizerConfig {
  double eps_opt = 5e-2;
  double abs_tol = 1e-6;
  int max_iterations = 50;
  Forcing forcing = Forcing::superlinear;
  ArmijoConfig armijo{};
  int pcg_max_iterations = 500;
  PrecondOptions precond{};
  /// If positive, every Newton step is solved to this relative tolerance
  /// instead of the forcing sequence.
  double fixed_pcg_tolerance = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double distance = 0.0;
  double regularization = 0.0;
  double divergence = 0.0;
  double mismatch = 0.0;
  double gnorm_inf = 0.0;
  double gnorm_rel = 0.0;
  double step = 0.0;       // step that produced this iterate (0 for the start)
  int pcg_iterations = 0;  // Newton step that produced this iterate
  double pcg_tolerance = 0.0;
  double pcg_residual_rel = 0.0;      // ||r||_2 / ||g||_2
  double pcg_residual_inf_rel = 0.0;  // ||r||_inf / ||g||_inf
  std::string pcg_status;
  int line_search_evaluations = 0;
};

struct SolveReport {
  std::string status;  // converged-relative, converged-absolute, initial-gradient-small, max-iterations,
                       // line-search-failed, non-finite
  bool converged = false;
  int iterations = 0;
  long matvecs = 0;
  long pde_solves = 0;
  long line_search_evaluations = 0;
  long pcg_iterations = 0;
  long precond_inner_iterations = 0;
  long precond_fallbacks = 0;
  int pcg_max_iterations_hit = 0;
  int negative_curvature_hits = 0;
  int descent_fallbacks = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double mismatch = 0.0;  // dist(m(1), m1) / dist(m0, m1)
  bool mismatch_degenerate = false;
  double gradient = 0.0;  // ||g||_inf / ||g0||_inf
  double gnorm0_inf = 0.0;
  double gnorm_inf = 0.0;
  double objective_initial = 0.0;
  double objective_final = 0.0;
  double distance_initial = 0.0;
  double distance_final = 0.0;
  double det_min = 1.0;
  double det_mean = 1.0;
  double det_max = 1.0;
  double runtime_seconds = 0.0;
  std::vector<IterationRecord> trace;

  /// Adds counters of `other` (used by continuation); the remaining fields
  /// are taken from `other`.
  void accumulate(const SolveReport& other);
};

template <std::floating_point Real>
struct RegistrationResult {
  VectorField<Real> v;
  SolveReport report;
};

/// Newton step: PCG on H vt = -g starting from vt = 0.
template <std::floating_point Real>
PcgResult<VectorField<Real>> pcg_newton_step(KktProblem<Real>& problem, const VectorField<Real>& g,
                                             Preconditioner<Real>& precond, double eta, int max_iterations);

/// Inexact Gauss-Newton-Krylov solve on an existing problem, starting from
/// `initial` (zero if null).
template <std::floating_point Real>
RegistrationResult<Real> optimize(KktProblem<Real>& problem, const OptimizerConfig& cfg,
                                  const VectorField<Real>* initial = nullptr);

template <std::floating_point Real>
RegistrationResult<Real> register_images(const ScalarField<Real>& m0, const ScalarField<Real>& m1,
                                         const RegConfig& reg, const KktOptions& opts, const OptimizerConfig& cfg,
                                         const VectorField<Real>* initial = nullptr);

}  // namespace diffreg
