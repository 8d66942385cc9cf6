#include "diffreg/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diffreg {

namespace {

void copy_counters(SolveReport& dst, const SolveReport& src) {
  dst.iterations = src.iterations;
  dst.matvecs = src.matvecs;
  dst.pde_solves = src.pde_solves;
  dst.line_search_evaluations = src.line_search_evaluations;
  dst.pcg_iterations = src.pcg_iterations;
  dst.precond_inner_iterations = src.precond_inner_iterations;
  dst.precond_fallbacks = src.precond_fallbacks;
  dst.pcg_max_iterations_hit = src.pcg_max_iterations_hit;
  dst.negative_curvature_hits = src.negative_curvature_hits;
  dst.descent_fallbacks = src.descent_fallbacks;
  dst.runtime_seconds = src.runtime_seconds;
}

}  // namespace

void SearchConfig::validate() const {
  if (!(eps_det > 0.0 && eps_det < 1.0)) throw std::invalid_argument("determinant bound must lie in (0, 1)");
  if (!(alpha_start > 0.0) || !(decade_factor > 1.0) || !(alpha_floor > 0.0) || bisection_depth < 0) {
    throw std::invalid_argument("invalid search configuration");
  }
}

DetBoundsResult det_bounds_from_stats(const DetStats& stats, double eps_det) {
  const bool ok = std::isfinite(stats.min) && std::isfinite(stats.max) && stats.min > eps_det &&
                  stats.max < 1.0 / eps_det;
  return {ok, stats};
}

template <std::floating_point Real>
DetBoundsResult det_bounds_ok(const VectorField<Real>& v, double eps_det, InterpMethod interp, DiffScheme scheme) {
  return det_bounds_from_stats(detgrad_stats(v, interp, scheme), eps_det);
}

template <std::floating_point Real>
TrialRunner<Real> make_trial_runner(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const RegConfig& reg,
                                    const KktOptions& opts, const OptimizerConfig& cfg) {
  return [=](double alpha, const VectorField<Real>* warm) {
    RegConfig r = reg;
    r.alpha = alpha;
    KktProblem<Real> problem(m0, m1, r, opts);
    const VectorField<Real> zero(m0.grid());
    TrialOutcome<Real> out{zero, {}, {}, 0.0, 0.0, false, false};
    out.objective_zero = problem.trial_objective(zero).total();
    out.objective_start = out.objective_zero;
    const VectorField<Real>* init = nullptr;
    if (warm) {
      const double jw = problem.trial_objective(*warm).total();
      if (jw <= out.objective_zero) {
        init = warm;
        out.warm_started = true;
        out.objective_start = jw;
      } else {
        out.warm_start_rejected = true;
      }
    }
    auto res = optimize(problem, cfg, init);
    out.v = std::move(res.v);
    out.report = std::move(res.report);
    out.det = {out.report.det_min, out.report.det_mean, out.report.det_max};
    return out;
  };
}

template <std::floating_point Real>
SearchOutcome<Real> search_alpha(const TrialRunner<Real>& run, const SearchConfig& cfg) {
  cfg.validate();
  SearchOutcome<Real> out;
  auto& res = out.result;
  std::optional<VectorField<Real>> previous;
  SolveReport totals;
  std::optional<SolveReport> returned;

  auto trial = [&](double alpha, const char* phase) {
    auto t = run(alpha, previous ? &*previous : nullptr);
    const bool finite = t.v.all_finite() && t.report.status != "non-finite";
    const bool pass = finite && det_bounds_from_stats(t.det, cfg.eps_det).ok;
    TrialRecord rec;
    rec.index = static_cast<int>(res.trials.size());
    rec.phase = phase;
    rec.alpha = alpha;
    rec.pass = pass;
    rec.det_min = t.det.min;
    rec.det_max = t.det.max;
    rec.det_mean = t.det.mean;
    rec.mismatch = t.report.mismatch;
    rec.iterations = t.report.iterations;
    rec.solver_status = t.report.status;
    rec.objective_zero = t.objective_zero;
    rec.objective_start = t.objective_start;
    rec.warm_started = t.warm_started;
    rec.warm_start_rejected = t.warm_start_rejected;
    res.trials.push_back(rec);
    SolveReport counters = t.report;
    counters.trace.clear();
    totals.accumulate(counters);
    if (pass || !returned) returned = counters;
    if (finite) previous = t.v;
    if (pass) out.v = std::move(t.v);
    return pass;
  };

  double alpha = cfg.alpha_start;
  double last_pass = 0.0, first_fail = 0.0;
  bool any_pass = false, any_fail = false, trivial = false;
  while (true) {
    if (trial(alpha, "decade")) {
      any_pass = true;
      last_pass = alpha;
      // zero data gradient at v = 0 stays zero for every alpha
      if (res.trials.size() == 1 && res.trials.back().solver_status == "initial-gradient-small") {
        trivial = true;
        break;
      }
      const double next = alpha / cfg.decade_factor;
      if (next < cfg.alpha_floor * (1.0 - 1e-12)) break;
      alpha = next;
    } else {
      any_fail = true;
      first_fail = alpha;
      break;
    }
  }

  if (!any_pass) {
    res.status = "violated-at-start";
    res.found = false;
  } else if (trivial) {
    res.status = "ok";
    res.found = true;
    res.alpha = last_pass;
  } else if (!any_fail) {
    res.status = "floor-reached";
    res.found = true;
    res.alpha = last_pass;
  } else {
    double lo = first_fail, hi = last_pass;
    for (int i = 0; i < cfg.bisection_depth; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (trial(mid, "bisection")) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    res.status = "ok";
    res.found = true;
    res.alpha = hi;
  }

  // fields describe the returned trial, counters cover the whole search
  res.report = returned ? *returned : SolveReport{};
  copy_counters(res.report, totals);

  // monotone labelling: no passing alpha below a failing one
  auto sorted = res.trials;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  bool seen_pass = false;
  for (const auto& t : sorted) {
    if (t.pass) {
      seen_pass = true;
    } else if (seen_pass) {
      res.monotone = false;
      res.anomalies.push_back("failing trial at alpha " + std::to_string(t.alpha) + " above a passing one");
    }
  }
  return out;
}

template <std::floating_point Real>
SearchOutcome<Real> search_alpha(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const RegConfig& reg,
                                 const KktOptions& opts, const OptimizerConfig& cfg, const SearchConfig& search) {
  return search_alpha<Real>(make_trial_runner(m0, m1, reg, opts, cfg), search);
}

std::vector<double> continuation_schedule(double alpha_target) {
  if (!(alpha_target > 0.0 && alpha_target <= 1.0)) throw std::invalid_argument("alpha target must lie in (0, 1]");
  const int last = static_cast<int>(std::floor(std::log10(alpha_target) + 1e-12));
  std::vector<double> s;
  for (int k = 0; k >= last; --k) s.push_back(std::pow(10.0, k));
  if (std::abs(s.back() - alpha_target) > 1e-12 * alpha_target) s.push_back(alpha_target);
  return s;
}

template <std::floating_point Real>
RegistrationResult<Real> continuation_solve(const ScalarField<Real>& m0, const ScalarField<Real>& m1,
                                            double alpha_target, const RegConfig& reg, const KktOptions& opts,
                                            const OptimizerConfig& cfg) {
  std::optional<RegistrationResult<Real>> acc;
  for (double alpha : continuation_schedule(alpha_target)) {
    RegConfig r = reg;
    r.alpha = alpha;
    auto res = register_images(m0, m1, r, opts, cfg, acc ? &acc->v : nullptr);
    if (!acc) {
      acc = std::move(res);
    } else {
      acc->report.accumulate(res.report);
      acc->v = std::move(res.v);
    }
  }
  return std::move(*acc);
}

#define DIFFREG_INSTANTIATE(Real)                                                                                 \
  template DetBoundsResult det_bounds_ok(const VectorField<Real>&, double, InterpMethod, DiffScheme);             \
  template TrialRunner<Real> make_trial_runner(const ScalarField<Real>&, const ScalarField<Real>&,               \
                                               const RegConfig&, const KktOptions&, const OptimizerConfig&);     \
  template SearchOutcome<Real> search_alpha(const TrialRunner<Real>&, const SearchConfig&);                      \
  template SearchOutcome<Real> search_alpha(const ScalarField<Real>&, const ScalarField<Real>&, const RegConfig&, \
                                            const KktOptions&, const OptimizerConfig&, const SearchConfig&);     \
  template RegistrationResult<Real> continuation_solve(const ScalarField<Real>&, const ScalarField<Real>&, double, \
                                                       const RegConfig&, const KktOptions&, const OptimizerConfig&);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
