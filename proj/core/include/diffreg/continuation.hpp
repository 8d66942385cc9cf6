#pragma once

#include <concepts>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffreg/metrics.hpp"
#include "diffreg/optimizer.hpp"

namespace diffreg {

struct SearchConfig {
  double eps_det = 0.1;
  double alpha_start = 1.0;
  double decade_factor = 10.0;
  double alpha_floor = 1e-6;
  int bisection_depth = 6;

  void validate() const;
};

struct DetBoundsResult {
  bool ok = true;
  DetStats stats;
};

/// eps < det f(1) < 1/eps at every voxel.
template <std::floating_point Real>
DetBoundsResult det_bounds_ok(const VectorField<Real>& v, double eps_det, InterpMethod interp, DiffScheme scheme);

DetBoundsResult det_bounds_from_stats(const DetStats& stats, double eps_det);

struct TrialRecord {
  int index = 0;
  std::string phase;  // "decade" or "bisection"
  double alpha = 0.0;
  bool pass = false;
  double det_min = 0.0;
  double det_max = 0.0;
  double det_mean = 0.0;
  double mismatch = 0.0;
  int iterations = 0;
  std::string solver_status;
  double objective_zero = 0.0;   // J(0) at this alpha
  double objective_start = 0.0;  // objective of the initial guess actually used
  bool warm_started = false;
  bool warm_start_rejected = false;  // J(warm) > J(0), restarted from zero
};

struct SearchResult {
  std::string status;  // "ok", "violated-at-start", "floor-reached"
  double alpha = 0.0;
  bool found = false;
  std::vector<TrialRecord> trials;
  bool monotone = true;        // pass/fail labels ordered in alpha
  std::vector<std::string> anomalies;
  SolveReport report;  // accumulated counters, fields of the returned solve
};

template <std::floating_point Real>
struct SearchOutcome {
  SearchResult result;
  std::optional<VectorField<Real>> v;  // velocity of the returned alpha
};

/// Outcome of a single trial at a fixed alpha.
template <std::floating_point Real>
struct TrialOutcome {
  VectorField<Real> v;
  SolveReport report;
  DetStats det;
  double objective_zero = 0.0;
  double objective_start = 0.0;
  bool warm_started = false;
  bool warm_start_rejected = false;
};

/// Runs one registration at `alpha`, warm-started from `warm` if given.
template <std::floating_point Real>
using TrialRunner = std::function<TrialOutcome<Real>(double alpha, const VectorField<Real>* warm)>;

/// Trial runner solving the actual registration problem.
template <std::floating_point Real>
TrialRunner<Real> make_trial_runner(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const RegConfig& reg,
                                    const KktOptions& opts, const OptimizerConfig& cfg);

/// Decade sweep alpha = 1, 0.1, ... until the determinant bounds fail, then
/// fixed-depth linear bisection between the last passing and the first
/// failing alpha. Each trial warm-starts from the previous trial.
template <std::floating_point Real>
SearchOutcome<Real> search_alpha(const TrialRunner<Real>& run, const SearchConfig& cfg);

template <std::floating_point Real>
SearchOutcome<Real> search_alpha(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const RegConfig& reg,
                                 const KktOptions& opts, const OptimizerConfig& cfg, const SearchConfig& search);

/// alpha = 1, 0.1, ... down to the decade of alpha_target, then alpha_target.
std::vector<double> continuation_schedule(double alpha_target);

template <std::floating_point Real>
RegistrationResult<Real> continuation_solve(const ScalarField<Real>& m0, const ScalarField<Real>& m1,
                                            double alpha_target, const RegConfig& reg, const KktOptions& opts,
                                            const OptimizerConfig& cfg);

}  // namespace diffreg
