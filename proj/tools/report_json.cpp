#include <sstream>

#include "cli.hpp"

namespace diffreg::cli {

using nlohmann::json;

json to_json(const JobConfig& j) {
  return {{"command", j.command},   {"template", j.template_path}, {"reference", j.reference_path},
          {"alpha", j.alpha},       {"beta", j.beta},              {"eps_opt", j.eps_opt},
          {"eps_det", j.eps_det},   {"nt", j.nt},                  {"maxit", j.maxit},
          {"distance", j.distance}, {"precond", j.precond},        {"interp", j.interp},
          {"forcing", j.forcing},   {"out_dir", j.out_dir},        {"seed", j.seed},
          {"threads", j.threads},   {"precision", j.precision}};
}

json to_json(const IterationRecord& r) {
  return {{"iteration", r.iteration},
          {"objective", r.objective},
          {"distance", r.distance},
          {"regularization", r.regularization},
          {"divergence", r.divergence},
          {"mismatch", r.mismatch},
          {"gnorm_inf", r.gnorm_inf},
          {"gnorm_rel", r.gnorm_rel},
          {"step", r.step},
          {"pcg_iterations", r.pcg_iterations},
          {"pcg_tolerance", r.pcg_tolerance},
          {"pcg_residual_rel", r.pcg_residual_rel},
          {"pcg_residual_inf_rel", r.pcg_residual_inf_rel},
          {"pcg_status", r.pcg_status},
          {"line_search_evaluations", r.line_search_evaluations}};
}

json to_json(const SolveReport& r) {
  json trace = json::array();
  for (const auto& t : r.trace) trace.push_back(to_json(t));
  return {{"status", r.status},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"matvecs", r.matvecs},
          {"pde_solves", r.pde_solves},
          {"line_search_evaluations", r.line_search_evaluations},
          {"pcg_iterations", r.pcg_iterations},
          {"precond_inner_iterations", r.precond_inner_iterations},
          {"precond_fallbacks", r.precond_fallbacks},
          {"pcg_max_iterations_hit", r.pcg_max_iterations_hit},
          {"negative_curvature_hits", r.negative_curvature_hits},
          {"descent_fallbacks", r.descent_fallbacks},
          {"alpha", r.alpha},
          {"beta", r.beta},
          {"mismatch", r.mismatch},
          {"mismatch_degenerate", r.mismatch_degenerate},
          {"gradient", r.gradient},
          {"gnorm0_inf", r.gnorm0_inf},
          {"gnorm_inf", r.gnorm_inf},
          {"objective_initial", r.objective_initial},
          {"objective_final", r.objective_final},
          {"distance_initial", r.distance_initial},
          {"distance_final", r.distance_final},
          {"det_min", r.det_min},
          {"det_mean", r.det_mean},
          {"det_max", r.det_max},
          {"runtime_seconds", r.runtime_seconds},
          {"trace", trace}};
}

json to_json(const SearchResult& r) {
  json trials = json::array();
  for (const auto& t : r.trials) {
    trials.push_back({{"index", t.index},
                      {"phase", t.phase},
                      {"alpha", t.alpha},
                      {"pass", t.pass},
                      {"det_min", t.det_min},
                      {"det_mean", t.det_mean},
                      {"det_max", t.det_max},
                      {"mismatch", t.mismatch},
                      {"iterations", t.iterations},
                      {"solver_status", t.solver_status},
                      {"objective_zero", t.objective_zero},
                      {"objective_start", t.objective_start},
                      {"warm_started", t.warm_started},
                      {"warm_start_rejected", t.warm_start_rejected}});
  }
  return {{"status", r.status},   {"alpha", r.alpha},         {"found", r.found},
          {"monotone", r.monotone}, {"anomalies", r.anomalies}, {"trials", trials}};
}

std::string trials_csv(const SearchResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "index,phase,alpha,pass,det_min,det_mean,det_max,mismatch,iterations,solver_status,objective_zero,"
        "objective_start,warm_started,warm_start_rejected\n";
  for (const auto& t : r.trials) {
    os << t.index << ',' << t.phase << ',' << t.alpha << ',' << (t.pass ? 1 : 0) << ',' << t.det_min << ','
       << t.det_mean << ',' << t.det_max << ',' << t.mismatch << ',' << t.iterations << ',' << t.solver_status << ','
       << t.objective_zero << ',' << t.objective_start << ',' << (t.warm_started ? 1 : 0) << ','
       << (t.warm_start_rejected ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace diffreg::cli
