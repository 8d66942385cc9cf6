#include "diffreg/preconditioner.hpp"

#include <stdexcept>

#include "diffreg/pcg.hpp"

namespace diffreg {

std::string to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::reg:
      return "reg";
    case PrecondKind::h0:
      return "h0";
    case PrecondKind::two_level:
      return "2level";
  }
  return "unknown";
}

PrecondKind precond_from_string(const std::string& s) {
  if (s == "reg") return PrecondKind::reg;
  if (s == "h0") return PrecondKind::h0;
  if (s == "2level") return PrecondKind::two_level;
  throw std::invalid_argument("unknown preconditioner: " + s);
}

template <std::floating_point Real>
Preconditioner<Real>::Preconditioner(const KktProblem<Real>& problem, PrecondOptions options)
    : problem_(problem), options_(options), grad_final_(problem.state_gradients().back()) {
  if (options_.kind == PrecondKind::two_level) {
    if (problem.grid().extent(0) % 4 != 0 || problem.grid().extent(1) % 4 != 0 ||
        (problem.grid().dim() == 3 && problem.grid().extent(2) % 4 != 0)) {
      throw std::invalid_argument("two-level preconditioner needs extents divisible by 4");
    }
    // restricted fields are band-limited, so the coarse gradient is spectral
    grad_coarse_ = spectral_gradient(restrict_field(problem.deformed()));
  }
}

template <std::floating_point Real>
VectorField<Real> Preconditioner<Real>::apply(const VectorField<Real>& r, double outer_tolerance) {
  ++stats_.applications;
  const double tol = options_.inner_tolerance > 0.0 ? options_.inner_tolerance : options_.inner_factor * outer_tolerance;
  switch (options_.kind) {
    case PrecondKind::reg:
      return apply_reg(r);
    case PrecondKind::h0:
      return apply_h0_inverse(r, tol);
    case PrecondKind::two_level:
      return apply_two_level(r, tol);
  }
  return apply_reg(r);
}

template <std::floating_point Real>
VectorField<Real> Preconditioner<Real>::apply_reg(const VectorField<Real>& r) const {
  const auto& reg = problem_.reg();
  return apply_inv_reg_operator(r, reg.op, reg.alpha);
}

template <std::floating_point Real>
VectorField<Real> Preconditioner<Real>::apply_h0(const VectorField<Real>& s) const {
  const auto& reg = problem_.reg();
  auto out = apply_reg_operator(s, reg.op, reg.alpha);
  if (reg.op.symbol(0.0) == 0.0) {
    // the constant mode gets the same unit symbol as the inverse, so H0 stays definite for flat images
    for (int c = 0; c < s.grid().dim(); ++c) {
      double mean = 0.0;
      for (auto x : s[c].values()) mean += static_cast<double>(x);
      const auto shift = static_cast<Real>(reg.alpha * mean / static_cast<double>(s.grid().size()));
      for (auto& x : out[c].values()) x += shift;
    }
  }
  out += zero_velocity_data_term(grad_final_, s, reg.incomp, reg.alpha);
  return out;
}

template <std::floating_point Real>
VectorField<Real> Preconditioner<Real>::apply_h0_inverse(const VectorField<Real>& r, double tol) {
  auto res = pcg(
      r, [&](const VectorField<Real>& s) { return apply_h0(s); },
      [&](const VectorField<Real>& s) { return apply_reg(s); }, tol, options_.inner_max_iterations);
  stats_.inner_iterations += res.iterations;
  if (res.status == PcgStatus::breakdown || res.status == PcgStatus::negative_curvature || !res.x.all_finite()) {
    ++stats_.fallbacks;
    return apply_reg(r);
  }
  return std::move(res.x);
}

template <std::floating_point Real>
VectorField<Real> Preconditioner<Real>::apply_two_level(const VectorField<Real>& r, double tol) {
  const auto& reg = problem_.reg();
  const Grid& fine = problem_.grid();
  // smoothed system: Hreg^-1/2 H Hreg^-1/2 = I + Hreg^-1/2 D0 Hreg^-1/2
  const auto rs = apply_inv_sqrt_reg_operator(r, reg.op, reg.alpha);
  const auto rc = restrict_field(rs);
  const auto& gc = *grad_coarse_;
  auto coarse_op = [&](const VectorField<Real>& w) {
    const auto s = apply_inv_sqrt_reg_operator(w, reg.op, reg.alpha);
    auto out = apply_inv_sqrt_reg_operator(zero_velocity_data_term(gc, s, reg.incomp, reg.alpha), reg.op, reg.alpha);
    out += w;
    return out;
  };
  auto res = pcg(
      rc, coarse_op, [](const VectorField<Real>& w) { return w; }, tol, options_.inner_max_iterations);
  stats_.inner_iterations += res.iterations;
  if (res.status == PcgStatus::breakdown || res.status == PcgStatus::negative_curvature || !res.x.all_finite()) {
    ++stats_.fallbacks;
    return apply_reg(r);
  }
  // restriction and prolongation act on the low band only
  auto s = prolong_field(res.x, fine);
  s += high_pass(rs);
  return apply_inv_sqrt_reg_operator(s, reg.op, reg.alpha);
}

template class Preconditioner<float>;
template class Preconditioner<double>;

}  // namespace diffreg
