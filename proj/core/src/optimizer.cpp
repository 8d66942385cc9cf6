#include "diffreg/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "diffreg/metrics.hpp"

namespace diffreg {

std::string to_string(Forcing f) { return f == Forcing::superlinear ? "superlinear" : "quadratic"; }

Forcing forcing_from_string(const std::string& s) {
  if (s == "superlinear") return Forcing::superlinear;
  if (s == "quadratic") return Forcing::quadratic;
  throw std::invalid_argument("unknown forcing sequence: " + s);
}

double forcing_tolerance(double gnorm_inf, Forcing mode) {
  if (gnorm_inf < 0.0) throw std::invalid_argument("forcing_tolerance: negative norm");
  return std::min(0.5, mode == Forcing::superlinear ? std::sqrt(gnorm_inf) : gnorm_inf);
}

void SolveReport::accumulate(const SolveReport& o) {
  const int it = iterations;
  const long mv = matvecs, pde = pde_solves, ls = line_search_evaluations, pcg = pcg_iterations;
  const long inner = precond_inner_iterations, fb = precond_fallbacks;
  const int pmax = pcg_max_iterations_hit, neg = negative_curvature_hits, desc = descent_fallbacks;
  const double rt = runtime_seconds;
  auto tr = std::move(trace);
  *this = o;
  iterations += it;
  matvecs += mv;
  pde_solves += pde;
  line_search_evaluations += ls;
  pcg_iterations += pcg;
  precond_inner_iterations += inner;
  precond_fallbacks += fb;
  pcg_max_iterations_hit += pmax;
  negative_curvature_hits += neg;
  descent_fallbacks += desc;
  runtime_seconds += rt;
  tr.insert(tr.end(), o.trace.begin(), o.trace.end());
  trace = std::move(tr);
}

template <std::floating_point Real>
PcgResult<VectorField<Real>> pcg_newton_step(KktProblem<Real>& problem, const VectorField<Real>& g,
                                             Preconditioner<Real>& precond, double eta, int max_iterations) {
  return pcg(
      Real(-1) * g, [&](const VectorField<Real>& s) { return problem.hessian_matvec(s); },
      [&](const VectorField<Real>& r) { return precond.apply(r, eta); }, eta, max_iterations);
}

template <std::floating_point Real>
RegistrationResult<Real> optimize(KktProblem<Real>& problem, const OptimizerConfig& cfg,
                                  const VectorField<Real>* initial) {
  const auto t0 = std::chrono::steady_clock::now();
  const Counters start = problem.counters();
  SolveReport rep;
  rep.alpha = problem.reg().alpha;
  rep.beta = problem.reg().incomp.kind == IncompressibilityMode::Kind::near_incompressible ? problem.reg().incomp.beta
                                                                                             : 0.0;
  const auto& opts = problem.options();
  const double dist0 = dist_value(problem.template_image(), problem.reference_image(), opts.distance);

  problem.set_velocity(initial ? *initial : VectorField<Real>(problem.grid()));
  auto g = problem.gradient();
  auto obj = problem.objective();
  const double g0 = max_norm(g);
  double ginf = g0;
  rep.gnorm0_inf = g0;
  rep.objective_initial = obj.total();
  rep.distance_initial = obj.distance;

  auto record = [&](IterationRecord r) {
    r.iteration = rep.iterations;
    r.objective = obj.total();
    r.distance = obj.distance;
    r.regularization = obj.regularization;
    r.divergence = obj.divergence;
    r.mismatch = mismatch_ratio(obj.distance, dist0).value;
    r.gnorm_inf = ginf;
    r.gnorm_rel = g0 > 0.0 ? ginf / g0 : 0.0;
    rep.trace.push_back(std::move(r));
  };
  record({});

  if (!g.all_finite() || !std::isfinite(obj.total())) {
    rep.status = "non-finite";
  } else if (g0 < cfg.abs_tol) {
    rep.status = "initial-gradient-small";
    rep.converged = true;
  }

  while (rep.status.empty()) {
    if (ginf <= cfg.eps_opt * g0) {
      rep.status = "converged-relative";
      rep.converged = true;
      break;
    }
    if (ginf <= cfg.abs_tol) {
      rep.status = "converged-absolute";
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cfg.max_iterations) {
      rep.status = "max-iterations";
      break;
    }

    const double g_step_inf = ginf;
    const double eta = cfg.fixed_pcg_tolerance > 0.0 ? cfg.fixed_pcg_tolerance : forcing_tolerance(ginf, cfg.forcing);
    Preconditioner<Real> precond(problem, cfg.precond);
    auto step = pcg_newton_step(problem, g, precond, eta, cfg.pcg_max_iterations);
    rep.pcg_iterations += step.iterations;
    rep.precond_inner_iterations += precond.stats().inner_iterations;
    rep.precond_fallbacks += precond.stats().fallbacks;
    if (step.status == PcgStatus::max_iterations) ++rep.pcg_max_iterations_hit;
    if (step.status == PcgStatus::negative_curvature) ++rep.negative_curvature_hits;

    VectorField<Real> dir = std::move(step.x);
    const auto gm = problem.merit_gradient();
    double slope = l2_inner(gm, dir);
    if (!(slope < 0.0) || !dir.all_finite()) {
      // regularization-preconditioned steepest descent
      dir = Real(-1) * apply_inv_reg_operator(g, problem.reg().op, problem.reg().alpha);
      slope = l2_inner(gm, dir);
      ++rep.descent_fallbacks;
      if (!(slope < 0.0)) {
        rep.status = "line-search-failed";
        break;
      }
    }

    const auto v_cur = problem.velocity();
    auto phi = [&](double gamma) {
      VectorField<Real> trial = v_cur;
      trial.axpy(static_cast<Real>(gamma), dir);
      const double val = problem.trial_objective(trial).total();
      return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
    };
    const auto ls = armijo_line_search(phi, obj.total(), slope, cfg.armijo);
    rep.line_search_evaluations += ls.evaluations;
    if (!ls.accepted) {
      rep.status = "line-search-failed";
      break;
    }

    VectorField<Real> v_next = v_cur;
    v_next.axpy(static_cast<Real>(ls.step), dir);
    problem.set_velocity(v_next);
    g = problem.gradient();
    obj = problem.objective();
    ginf = max_norm(g);
    ++rep.iterations;

    IterationRecord r;
    r.step = ls.step;
    r.pcg_iterations = step.iterations;
    r.pcg_tolerance = eta;
    r.pcg_residual_rel = step.initial_residual > 0.0 ? step.final_residual / step.initial_residual : 0.0;
    r.pcg_residual_inf_rel = step.final_residual_inf / g_step_inf;
    r.pcg_status = to_string(step.status);
    r.line_search_evaluations = ls.evaluations;
    record(std::move(r));
    if (!g.all_finite()) {
      rep.status = "non-finite";
      break;
    }
  }

  rep.gnorm_inf = ginf;
  rep.gradient = g0 > 0.0 ? ginf / g0 : 0.0;
  rep.objective_final = obj.total();
  rep.distance_final = obj.distance;
  const auto mm = mismatch_ratio(obj.distance, dist0);
  rep.mismatch = mm.value;
  rep.mismatch_degenerate = mm.degenerate;
  const auto det = field_stats(solve_deformation_tensor(problem.velocity(), problem.transport_plan()).determinant());
  rep.det_min = det.min;
  rep.det_mean = det.mean;
  rep.det_max = det.max;
  rep.matvecs = problem.counters().matvecs - start.matvecs;
  rep.pde_solves = problem.counters().pde_solves - start.pde_solves;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {problem.velocity(), std::move(rep)};
}

template <std::floating_point Real>
RegistrationResult<Real> register_images(const ScalarField<Real>& m0, const ScalarField<Real>& m1,
                                         const RegConfig& reg, const KktOptions& opts, const OptimizerConfig& cfg,
                                         const VectorField<Real>* initial) {
  KktProblem<Real> problem(m0, m1, reg, opts);
  return optimize(problem, cfg, initial);
}

#define DIFFREG_INSTANTIATE(Real)                                                                                \
  template PcgResult<VectorField<Real>> pcg_newton_step(KktProblem<Real>&, const VectorField<Real>&,             \
                                                        Preconditioner<Real>&, double, int);                     \
  template RegistrationResult<Real> optimize(KktProblem<Real>&, const OptimizerConfig&, const VectorField<Real>*); \
  template RegistrationResult<Real> register_images(const ScalarField<Real>&, const ScalarField<Real>&,          \
                                                    const RegConfig&, const KktOptions&, const OptimizerConfig&, \
                                                    const VectorField<Real>*);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
