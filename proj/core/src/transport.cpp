#include "diffreg/transport.hpp"

#include <stdexcept>

namespace diffreg {

namespace {

template <class Real>
VectorField<Real> mesh_points(const Grid& g) {
  return sample_vector<Real>(g, [](const std::array<double, 3>& x) { return x; });
}

// Heun update along characteristics:
// u_new(x) = u(y) + ht/2 (f0 + f1)
template <class Real>
void heun_combine(ScalarField<Real>& out, const ScalarField<Real>& u_y, const ScalarField<Real>& f0,
                  const ScalarField<Real>& f1, double ht) {
  const Real half = static_cast<Real>(0.5 * ht);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u_y[i] + half * (f0[i] + f1[i]);
}

}  // namespace

template <std::floating_point Real>
VectorField<Real> departure_points(const VectorField<Real>& v, double ht, InterpMethod method) {
  const Grid& g = v.grid();
  const auto x = mesh_points<Real>(g);
  VectorField<Real> ytilde = x;
  ytilde.axpy(static_cast<Real>(-ht), v);
  const auto v_at = InterpolationPlan<Real>(g, ytilde, method).apply(v);
  VectorField<Real> y = x;
  for (int c = 0; c < g.dim(); ++c) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      y[c][i] = x[c][i] - static_cast<Real>(0.5 * ht) * (v[c][i] + v_at[c][i]);
    }
  }
  return y;
}

template <std::floating_point Real>
Trajectory<Real>::Trajectory(const VectorField<Real>& v, double ht, InterpMethod method)
    : points(departure_points(v, ht, method)), plan(v.grid(), points, method) {}

template <std::floating_point Real>
TransportPlan<Real>::TransportPlan(const VectorField<Real>& v, InterpMethod m, DiffScheme s)
    : forward(v, v.grid().time_step(), m),
      backward(Real(-1) * v, v.grid().time_step(), m),
      div_v(divergence(v, s)),
      method(m),
      scheme(s) {}

template <std::floating_point Real>
TimeSeriesField<Real> solve_state(const ScalarField<Real>& m0, const TransportPlan<Real>& plan) {
  if (!m0.grid().same_space(plan.grid())) throw std::invalid_argument("solve_state: grid mismatch");
  const Grid g = plan.grid();
  TimeSeriesField<Real> m(g);
  m[0] = ScalarField<Real>(g, std::vector<Real>(m0.values().begin(), m0.values().end()));
  for (int j = 0; j < g.time_steps(); ++j) m[j + 1] = plan.forward.plan.apply(m[j]);
  return m;
}

template <std::floating_point Real>
TimeSeriesField<Real> solve_adjoint(const ScalarField<Real>& final_condition, const TransportPlan<Real>& plan) {
  if (!final_condition.grid().same_space(plan.grid())) throw std::invalid_argument("solve_adjoint: grid mismatch");
  const Grid g = plan.grid();
  const int nt = g.time_steps();
  const double ht = g.time_step();
  const auto& P = plan.backward.plan;
  const auto div_y = P.apply(plan.div_v);
  TimeSeriesField<Real> lam(g);
  lam[nt] = ScalarField<Real>(g, std::vector<Real>(final_condition.values().begin(), final_condition.values().end()));
  ScalarField<Real> f0(g), f1(g);
  for (int j = nt; j > 0; --j) {
    const auto l_y = P.apply(lam[j]);
    for (std::size_t i = 0; i < g.size(); ++i) {
      f0[i] = l_y[i] * div_y[i];
      const Real pred = l_y[i] + static_cast<Real>(ht) * f0[i];
      f1[i] = pred * plan.div_v[i];
    }
    heun_combine(lam[j - 1], l_y, f0, f1, ht);
  }
  return lam;
}

template <std::floating_point Real>
TimeSeriesField<Real> solve_inc_state(const std::vector<VectorField<Real>>& grad_m, const VectorField<Real>& vtilde,
                                      const TransportPlan<Real>& plan) {
  const Grid g = plan.grid();
  const int nt = g.time_steps();
  if (static_cast<int>(grad_m.size()) != nt + 1) throw std::invalid_argument("solve_inc_state: time slice mismatch");
  if (!vtilde.grid().same_space(g)) throw std::invalid_argument("solve_inc_state: grid mismatch");
  const double ht = g.time_step();
  const auto& P = plan.forward.plan;

  auto source = [&](int j) {
    ScalarField<Real> s(g);
    for (int c = 0; c < g.dim(); ++c) {
      const auto& gm = grad_m[static_cast<std::size_t>(j)][c];
      for (std::size_t i = 0; i < g.size(); ++i) s[i] -= gm[i] * vtilde[c][i];
    }
    return s;
  };

  TimeSeriesField<Real> mt(g);
  auto s_j = source(0);
  for (int j = 0; j < nt; ++j) {
    auto s_next = source(j + 1);
    const auto u_y = P.apply(mt[j]);
    const auto f0 = P.apply(s_j);
    heun_combine(mt[j + 1], u_y, f0, s_next, ht);
    s_j = std::move(s_next);
  }
  return mt;
}

template <std::floating_point Real>
TensorField<Real> solve_deformation_tensor(const VectorField<Real>& v, const TransportPlan<Real>& plan) {
  const Grid g = plan.grid();
  const int d = g.dim();
  const double ht = g.time_step();
  const auto& P = plan.forward.plan;
  // grad_v(i, k) = d v_i / d x_k, at the mesh and at the departure points
  TensorField<Real> gv(g), gv_y(g);
  for (int i = 0; i < d; ++i) {
    auto gi = gradient(v[i], plan.scheme);
    for (int k = 0; k < d; ++k) {
      gv_y(i, k) = P.apply(gi[k]);
      gv(i, k) = std::move(gi[k]);
    }
  }

  auto f = TensorField<Real>::identity(g);
  for (int step = 0; step < g.time_steps(); ++step) {
    TensorField<Real> fy(g);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) fy(i, j) = P.apply(f(i, j));
    TensorField<Real> next(g);
    const auto h = static_cast<Real>(ht);
    for (std::size_t p = 0; p < g.size(); ++p) {
      Real f0[3][3] = {}, pred[3][3] = {};
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Real acc = 0;
          for (int k = 0; k < d; ++k) acc += gv_y(i, k)[p] * fy(k, j)[p];
          f0[i][j] = acc;
          pred[i][j] = fy(i, j)[p] + h * acc;
        }
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Real f1 = 0;
          for (int k = 0; k < d; ++k) f1 += gv(i, k)[p] * pred[k][j];
          next(i, j)[p] = fy(i, j)[p] + Real(0.5) * h * (f0[i][j] + f1);
        }
    }
    f = std::move(next);
  }
  return f;
}

template <std::floating_point Real>
VectorField<Real> compose_trajectory(const TransportPlan<Real>& plan) {
  const Grid g = plan.grid();
  const auto x = mesh_points<Real>(g);
  const VectorField<Real> disp = plan.forward.points - x;
  VectorField<Real> y = x;
  for (int step = 0; step < g.time_steps(); ++step) {
    y += InterpolationPlan<Real>(g, y, plan.method).apply(disp);
  }
  return y;
}

template <std::floating_point Real>
std::vector<VectorField<Real>> slice_gradients(const TimeSeriesField<Real>& series, DiffScheme scheme) {
  std::vector<VectorField<Real>> out;
  out.reserve(series.slice_count());
  for (const auto& s : series.slices()) out.push_back(gradient(s, scheme));
  return out;
}

#define DIFFREG_INSTANTIATE(Real)                                                                             \
  template VectorField<Real> departure_points(const VectorField<Real>&, double, InterpMethod);                \
  template struct Trajectory<Real>;                                                                           \
  template struct TransportPlan<Real>;                                                                        \
  template TimeSeriesField<Real> solve_state(const ScalarField<Real>&, const TransportPlan<Real>&);           \
  template TimeSeriesField<Real> solve_adjoint(const ScalarField<Real>&, const TransportPlan<Real>&);         \
  template TimeSeriesField<Real> solve_inc_state(const std::vector<VectorField<Real>>&,                        \
                                                 const VectorField<Real>&, const TransportPlan<Real>&);       \
  template TensorField<Real> solve_deformation_tensor(const VectorField<Real>&, const TransportPlan<Real>&);  \
  template VectorField<Real> compose_trajectory(const TransportPlan<Real>&);                                  \
  template std::vector<VectorField<Real>> slice_gradients(const TimeSeriesField<Real>&, DiffScheme);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
