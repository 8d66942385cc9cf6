#include "diffreg/kkt.hpp"

#include <stdexcept>

namespace diffreg {

namespace {

// int_0^1 lambda grad m dt by the trapezoidal rule
template <class Real>
VectorField<Real> body_force(const TimeSeriesField<Real>& lam, const std::vector<VectorField<Real>>& grad_m) {
  const Grid& g = lam.grid();
  const int nt = lam.time_steps();
  const double ht = 1.0 / nt;
  VectorField<Real> b(g);
  for (int j = 0; j <= nt; ++j) {
    const auto w = static_cast<Real>((j == 0 || j == nt) ? 0.5 * ht : ht);
    const auto& l = lam[j];
    const auto& gm = grad_m[static_cast<std::size_t>(j)];
    for (int c = 0; c < g.dim(); ++c) {
      auto& bc = b[c];
      const auto& gc = gm[c];
      for (std::size_t i = 0; i < g.size(); ++i) bc[i] += w * l[i] * gc[i];
    }
  }
  return b;
}

}  // namespace

void RegConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  op.validate();
  incomp.validate();
}

template <std::floating_point Real>
KktProblem<Real>::KktProblem(ScalarField<Real> m0, ScalarField<Real> m1, RegConfig reg, KktOptions opts)
    : m0_(std::move(m0)), m1_(std::move(m1)), reg_(reg), opts_(opts), v_(m0_.grid()) {
  if (!m0_.grid().same_space(m1_.grid())) throw std::invalid_argument("template and reference grids differ");
  if (!m0_.all_finite() || !m1_.all_finite()) throw std::invalid_argument("images contain non-finite values");
  reg_.validate();
}

template <std::floating_point Real>
void KktProblem<Real>::set_alpha(double alpha) {
  reg_.alpha = alpha;
  reg_.validate();
  body_force_.reset();
}

template <std::floating_point Real>
void KktProblem<Real>::set_velocity(const VectorField<Real>& v) {
  if (!v.grid().same_space(grid())) throw std::invalid_argument("set_velocity: grid mismatch");
  v_ = v;
  plan_ = std::make_unique<TransportPlan<Real>>(v_, opts_.interp, opts_.scheme);
  m_ = solve_state(m0_, *plan_);
  grad_m_ = slice_gradients(*m_, opts_.scheme);
  body_force_.reset();
  ++counters_.pde_solves;
  ++counters_.state_solves;
}

template <std::floating_point Real>
const TimeSeriesField<Real>& KktProblem<Real>::state() const {
  if (!m_) throw std::logic_error("KktProblem: no velocity set");
  return *m_;
}

template <std::floating_point Real>
const TransportPlan<Real>& KktProblem<Real>::transport_plan() const {
  if (!plan_) throw std::logic_error("KktProblem: no velocity set");
  return *plan_;
}

template <std::floating_point Real>
ObjectiveParts KktProblem<Real>::parts(const VectorField<Real>& v, const ScalarField<Real>& m_final) const {
  ObjectiveParts p;
  p.distance = dist_value(m_final, m1_, opts_.distance);
  p.regularization = 0.5 * l2_inner(apply_reg_operator(v, reg_.op, reg_.alpha), v);
  if (reg_.incomp.kind == IncompressibilityMode::Kind::near_incompressible) {
    p.divergence = divergence_energy(v, reg_.incomp.beta);
  }
  return p;
}

template <std::floating_point Real>
ObjectiveParts KktProblem<Real>::objective() const {
  return parts(v_, state().final());
}

template <std::floating_point Real>
VectorField<Real> KktProblem<Real>::gradient() {
  const auto& m = state();
  const auto lam = solve_adjoint(adjoint_final(m.final(), m1_, opts_.distance), *plan_);
  ++counters_.pde_solves;
  ++counters_.adjoint_solves;
  body_force_ = body_force(lam, grad_m_);
  auto g = apply_reg_operator(v_, reg_.op, reg_.alpha);
  g += project_body_force(*body_force_, reg_.incomp, reg_.alpha);
  return g;
}

template <std::floating_point Real>
VectorField<Real> KktProblem<Real>::merit_gradient() const {
  if (!body_force_) throw std::logic_error("merit_gradient: call gradient() first");
  auto g = apply_reg_operator(v_, reg_.op, reg_.alpha);
  g += *body_force_;
  switch (reg_.incomp.kind) {
    case IncompressibilityMode::Kind::none:
      break;
    case IncompressibilityMode::Kind::near_incompressible:
      g += divergence_penalty_gradient(v_, reg_.incomp.beta);
      break;
    case IncompressibilityMode::Kind::incompressible:
      // the constraint removes the longitudinal part
      g = project_body_force(g, reg_.incomp, reg_.alpha);
      break;
  }
  return g;
}

template <std::floating_point Real>
VectorField<Real> KktProblem<Real>::hessian_matvec(const VectorField<Real>& vt) {
  const auto& m = state();
  const auto mt = solve_inc_state(grad_m_, vt, *plan_);
  const auto lt = solve_inc_adjoint_gn(incremental_final_gn(mt.final(), m.final(), m1_, opts_.distance), *plan_);
  ++counters_.matvecs;
  counters_.pde_solves += 2;
  auto h = apply_reg_operator(vt, reg_.op, reg_.alpha);
  h += project_body_force(body_force(lt, grad_m_), reg_.incomp, reg_.alpha);
  return h;
}

template <std::floating_point Real>
ObjectiveParts KktProblem<Real>::trial_objective(const VectorField<Real>& v) {
  const TransportPlan<Real> plan(v, opts_.interp, opts_.scheme);
  const auto m = solve_state(m0_, plan);
  ++counters_.pde_solves;
  ++counters_.state_solves;
  return parts(v, m.final());
}

template <std::floating_point Real>
ObjectiveParts evaluate_objective(const VectorField<Real>& v, const ScalarField<Real>& m0,
                                  const ScalarField<Real>& m1, const RegConfig& reg, const KktOptions& opts) {
  KktProblem<Real> p(m0, m1, reg, opts);
  return p.trial_objective(v);
}

template <std::floating_point Real>
VectorField<Real> zero_velocity_data_term(const VectorField<Real>& grad_m, const VectorField<Real>& s,
                                          const IncompressibilityMode& mode, double alpha) {
  const Grid& g = s.grid();
  ScalarField<Real> dot(g);
  for (int c = 0; c < g.dim(); ++c)
    for (std::size_t i = 0; i < g.size(); ++i) dot[i] += grad_m[c][i] * s[c][i];
  VectorField<Real> out(g);
  for (int c = 0; c < g.dim(); ++c)
    for (std::size_t i = 0; i < g.size(); ++i) out[c][i] = dot[i] * grad_m[c][i];
  return project_body_force(out, mode, alpha);
}

template class KktProblem<float>;
template class KktProblem<double>;
template ObjectiveParts evaluate_objective(const VectorField<float>&, const ScalarField<float>&,
                                           const ScalarField<float>&, const RegConfig&, const KktOptions&);
template ObjectiveParts evaluate_objective(const VectorField<double>&, const ScalarField<double>&,
                                           const ScalarField<double>&, const RegConfig&, const KktOptions&);
template VectorField<float> zero_velocity_data_term(const VectorField<float>&, const VectorField<float>&,
                                                    const IncompressibilityMode&, double);
template VectorField<double> zero_velocity_data_term(const VectorField<double>&, const VectorField<double>&,
                                                     const IncompressibilityMode&, double);

}  // namespace diffreg
