#include "diffreg/diffops.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "diffreg/fft.hpp"

namespace diffreg {

namespace {

template <class Real>
using Spectrum = std::vector<std::complex<Real>>;

bool is_nyquist(const Grid& g, int axis, int q) { return axis < g.dim() && 2 * std::abs(q) == g.extent(axis); }

double full_k2(const std::array<int, 3>& q) {
  return static_cast<double>(q[0]) * q[0] + static_cast<double>(q[1]) * q[1] + static_cast<double>(q[2]) * q[2];
}

// Wavenumber seen by first-order operators: the Nyquist component has no
// real-valued derivative and is dropped.
std::array<double, 3> odd_wavenumber(const Grid& g, const std::array<int, 3>& q) {
  std::array<double, 3> k{};
  for (int a = 0; a < 3; ++a) {
    const auto i = static_cast<std::size_t>(a);
    k[i] = is_nyquist(g, a, q[i]) ? 0.0 : -static_cast<double>(q[i]);
  }
  return k;
}

bool in_low_band(const Grid& g, const std::array<int, 3>& q) {
  for (int a = 0; a < g.dim(); ++a) {
    if (4 * std::abs(q[static_cast<std::size_t>(a)]) >= g.extent(a)) return false;
  }
  return true;
}

template <class Real, class F>
ScalarField<Real> apply_scalar_multiplier(const ScalarField<Real>& u, F&& mult) {
  const auto& ft = fourier_transform<Real>(u.grid());
  auto s = ft.forward(u.values());
  ft.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) { s[i] *= mult(q); });
  return ScalarField<Real>(u.grid(), ft.inverse(s));
}

template <class Real, class F>
VectorField<Real> apply_vector_multiplier(const VectorField<Real>& v, F&& mult) {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : v) out.push_back(apply_scalar_multiplier(c, mult));
  return VectorField<Real>(std::move(out));
}

template <class Real>
std::vector<Spectrum<Real>> forward_all(const VectorField<Real>& v) {
  const auto& ft = fourier_transform<Real>(v.grid());
  std::vector<Spectrum<Real>> s;
  for (const auto& c : v) s.push_back(ft.forward(c.values()));
  return s;
}

template <class Real>
VectorField<Real> inverse_all(const Grid& g, const std::vector<Spectrum<Real>>& s) {
  const auto& ft = fourier_transform<Real>(g);
  std::vector<ScalarField<Real>> out;
  for (const auto& c : s) out.push_back(ScalarField<Real>(g, ft.inverse(c)));
  return VectorField<Real>(std::move(out));
}

double inverse_divisor(const RegOperatorSpec& spec, double alpha, double k2) {
  const double sym = spec.symbol(k2);
  return alpha * (sym == 0.0 ? 1.0 : sym);
}

}  // namespace

double RegOperatorSpec::symbol(double k2) const {
  return seminorm ? std::pow(k2, order) : std::pow(1.0 + k2, order);
}

void RegOperatorSpec::validate() const {
  if (order < 1 || order > 3) throw std::invalid_argument("regularization order must be 1, 2 or 3");
}

void IncompressibilityMode::validate() const {
  if (kind == Kind::near_incompressible && !(beta > 0.0)) {
    throw std::invalid_argument("near-incompressible mode needs beta > 0");
  }
}

std::string IncompressibilityMode::name() const {
  switch (kind) {
    case Kind::none:
      return "none";
    case Kind::incompressible:
      return "incompressible";
    case Kind::near_incompressible:
      return "near-incompressible";
  }
  return "unknown";
}

template <std::floating_point Real>
VectorField<Real> spectral_gradient(const ScalarField<Real>& u) {
  const Grid& g = u.grid();
  const auto& ft = fourier_transform<Real>(g);
  const auto s = ft.forward(u.values());
  std::vector<ScalarField<Real>> out;
  for (int a = 0; a < g.dim(); ++a) {
    Spectrum<Real> d(s.size());
    ft.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
      const double k = odd_wavenumber(g, q)[static_cast<std::size_t>(a)];
      d[i] = s[i] * std::complex<Real>(0, static_cast<Real>(k));
    });
    out.push_back(ScalarField<Real>(g, ft.inverse(d)));
  }
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
ScalarField<Real> fd8_derivative(const ScalarField<Real>& u, int axis) {
  const Grid& g = u.grid();
  if (axis < 0 || axis >= g.dim()) throw std::out_of_range("fd8_derivative: bad axis");
  const int n = g.extent(axis);
  if (n < 9) throw std::invalid_argument("fd8_derivative: need at least 9 points per axis");
  const double h = g.spacing(axis);
  const auto stride = static_cast<std::ptrdiff_t>(g.stride(axis));
  // neighbor s steps towards +x sits at index i - s
  static constexpr double w[4] = {672.0, -168.0, 32.0, -3.0};
  ScalarField<Real> out(g);
  const auto total = static_cast<std::ptrdiff_t>(g.size());
#pragma omp parallel for
  for (std::ptrdiff_t lin = 0; lin < total; ++lin) {
    const int i = static_cast<int>((lin / stride) % n);
    const std::ptrdiff_t base = lin - static_cast<std::ptrdiff_t>(i) * stride;
    double acc = 0.0;
    for (int s = 1; s <= 4; ++s) {
      const int plus = ((i - s) % n + n) % n;
      const int minus = (i + s) % n;
      acc += w[s - 1] * (static_cast<double>(u[static_cast<std::size_t>(base + plus * stride)]) -
                         static_cast<double>(u[static_cast<std::size_t>(base + minus * stride)]));
    }
    out[static_cast<std::size_t>(lin)] = static_cast<Real>(acc / (840.0 * h));
  }
  return out;
}

template <std::floating_point Real>
VectorField<Real> fd8_gradient(const ScalarField<Real>& u) {
  std::vector<ScalarField<Real>> out;
  for (int a = 0; a < u.grid().dim(); ++a) out.push_back(fd8_derivative(u, a));
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
VectorField<Real> gradient(const ScalarField<Real>& u, DiffScheme scheme) {
  return scheme == DiffScheme::spectral ? spectral_gradient(u) : fd8_gradient(u);
}

template <std::floating_point Real>
ScalarField<Real> divergence(const VectorField<Real>& v, DiffScheme scheme) {
  const Grid& g = v.grid();
  if (scheme == DiffScheme::fd8) {
    ScalarField<Real> out(g);
    for (int a = 0; a < g.dim(); ++a) out += fd8_derivative(v[a], a);
    return out;
  }
  const auto& ft = fourier_transform<Real>(g);
  const auto s = forward_all(v);
  Spectrum<Real> d(ft.spectrum_size());
  ft.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
    const auto k = odd_wavenumber(g, q);
    std::complex<Real> acc = 0;
    for (int a = 0; a < g.dim(); ++a) acc += static_cast<Real>(k[static_cast<std::size_t>(a)]) * s[a][i];
    d[i] = acc * std::complex<Real>(0, 1);
  });
  return ScalarField<Real>(g, ft.inverse(d));
}

template <std::floating_point Real>
ScalarField<Real> spectral_laplacian(const ScalarField<Real>& u) {
  return apply_scalar_multiplier(u, [](const std::array<int, 3>& q) { return static_cast<Real>(-full_k2(q)); });
}

template <std::floating_point Real>
VectorField<Real> apply_reg_operator(const VectorField<Real>& v, const RegOperatorSpec& spec, double alpha) {
  spec.validate();
  return apply_vector_multiplier(
      v, [&](const std::array<int, 3>& q) { return static_cast<Real>(alpha * spec.symbol(full_k2(q))); });
}

template <std::floating_point Real>
VectorField<Real> apply_inv_reg_operator(const VectorField<Real>& b, const RegOperatorSpec& spec, double alpha) {
  spec.validate();
  return apply_vector_multiplier(
      b, [&](const std::array<int, 3>& q) { return static_cast<Real>(1.0 / inverse_divisor(spec, alpha, full_k2(q))); });
}

template <std::floating_point Real>
VectorField<Real> apply_inv_sqrt_reg_operator(const VectorField<Real>& b, const RegOperatorSpec& spec,
                                              double alpha) {
  spec.validate();
  return apply_vector_multiplier(b, [&](const std::array<int, 3>& q) {
    return static_cast<Real>(1.0 / std::sqrt(inverse_divisor(spec, alpha, full_k2(q))));
  });
}

double near_incompressible_multiplier(double k2, double alpha, double beta) {
  if (k2 <= 0.0) return 0.0;
  return 1.0 / (alpha / (beta * (1.0 / k2 + 1.0)) + 1.0);
}

template <std::floating_point Real>
VectorField<Real> project_body_force(const VectorField<Real>& b, const IncompressibilityMode& mode, double alpha) {
  mode.validate();
  if (mode.kind == IncompressibilityMode::Kind::none) return b;
  const Grid& g = b.grid();
  const auto& ft = fourier_transform<Real>(g);
  auto s = forward_all(b);
  const int d = g.dim();
  ft.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
    const auto k = odd_wavenumber(g, q);
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) return;
    const double c = mode.kind == IncompressibilityMode::Kind::incompressible
                         ? 1.0
                         : near_incompressible_multiplier(k2, alpha, mode.beta);
    std::complex<double> kb = 0;
    for (int a = 0; a < d; ++a) kb += k[static_cast<std::size_t>(a)] * std::complex<double>(s[a][i]);
    const std::complex<double> f = c * kb / k2;
    for (int a = 0; a < d; ++a) {
      s[a][i] -= std::complex<Real>(f * k[static_cast<std::size_t>(a)]);
    }
  });
  return inverse_all(g, s);
}

template <std::floating_point Real>
VectorField<Real> divergence_penalty_gradient(const VectorField<Real>& v, double beta) {
  // -beta grad(((-lap)^-1 + id) div v); per mode beta (1/|k|^2 + 1) k (k . v)
  const Grid& g = v.grid();
  const auto& ft = fourier_transform<Real>(g);
  auto s = forward_all(v);
  const int d = g.dim();
  ft.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
    const auto k = odd_wavenumber(g, q);
    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) {
      for (int a = 0; a < d; ++a) s[a][i] = 0;
      return;
    }
    std::complex<double> kv = 0;
    for (int a = 0; a < d; ++a) kv += k[static_cast<std::size_t>(a)] * std::complex<double>(s[a][i]);
    const std::complex<double> f = beta * (1.0 / k2 + 1.0) * kv;
    for (int a = 0; a < d; ++a) s[a][i] = std::complex<Real>(f * k[static_cast<std::size_t>(a)]);
  });
  return inverse_all(g, s);
}

template <std::floating_point Real>
double divergence_energy(const VectorField<Real>& v, double beta) {
  return 0.5 * l2_inner(divergence_penalty_gradient(v, beta), v);
}

namespace {

// exp(sign * 2 pi i sum_a q_a / n_a): shift by one fine cell along every axis
template <std::floating_point Real>
std::complex<Real> half_cell_shift(const Grid& fine, const std::array<int, 3>& q, double sign) {
  double phase = 0.0;
  for (int a = 0; a < fine.dim(); ++a) phase += kTwoPi * q[static_cast<std::size_t>(a)] / fine.extent(a);
  return {static_cast<Real>(std::cos(sign * phase)), static_cast<Real>(std::sin(sign * phase))};
}

}  // namespace

template <std::floating_point Real>
ScalarField<Real> restrict_field(const ScalarField<Real>& u) {
  const Grid& fine = u.grid();
  const Grid coarse = fine.coarsened();
  const auto& ff = fourier_transform<Real>(fine);
  const auto& fc = fourier_transform<Real>(coarse);
  const auto sf = ff.forward(u.values());
  const auto& cf = ff.spectrum_extents();
  const int d = fine.dim();
  const Real scale = static_cast<Real>(static_cast<double>(coarse.size()) / static_cast<double>(fine.size()));
  Spectrum<Real> sc(fc.spectrum_size());
  fc.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
    if (!in_low_band(fine, q)) return;
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      const int qa = q[static_cast<std::size_t>(a)];
      idx[static_cast<std::size_t>(a)] = static_cast<std::size_t>(qa >= 0 ? qa : qa + fine.extent(a));
    }
    const std::size_t j = (idx[0] * static_cast<std::size_t>(cf[1]) + idx[1]) * static_cast<std::size_t>(cf[2]) + idx[2];
    // coarse node i sits at fine node 2i + 1, not 2i
    sc[i] = sf[j] * scale * half_cell_shift<Real>(fine, q, +1.0);
  });
  return ScalarField<Real>(coarse, fc.inverse(sc));
}

template <std::floating_point Real>
ScalarField<Real> prolong_field(const ScalarField<Real>& coarse_field, const Grid& fine) {
  const Grid& coarse = coarse_field.grid();
  if (!fine.coarsened().same_space(coarse)) throw std::invalid_argument("prolong_field: grids are not nested");
  const auto& ff = fourier_transform<Real>(fine);
  const auto& fc = fourier_transform<Real>(coarse);
  const auto sc = fc.forward(coarse_field.values());
  const auto& cc = fc.spectrum_extents();
  const int d = fine.dim();
  const Real scale = static_cast<Real>(static_cast<double>(fine.size()) / static_cast<double>(coarse.size()));
  Spectrum<Real> sf(ff.spectrum_size());
  ff.for_each_mode([&](std::size_t i, const std::array<int, 3>& q) {
    if (!in_low_band(fine, q)) return;
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      const int qa = q[static_cast<std::size_t>(a)];
      idx[static_cast<std::size_t>(a)] = static_cast<std::size_t>(qa >= 0 ? qa : qa + coarse.extent(a));
    }
    const std::size_t j = (idx[0] * static_cast<std::size_t>(cc[1]) + idx[1]) * static_cast<std::size_t>(cc[2]) + idx[2];
    sf[i] = sc[j] * scale * half_cell_shift<Real>(fine, q, -1.0);
  });
  return ScalarField<Real>(fine.with_time_steps(coarse.time_steps()), ff.inverse(sf));
}

template <std::floating_point Real>
VectorField<Real> restrict_field(const VectorField<Real>& u) {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : u) out.push_back(restrict_field(c));
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
VectorField<Real> prolong_field(const VectorField<Real>& coarse, const Grid& fine) {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : coarse) out.push_back(prolong_field(c, fine));
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
ScalarField<Real> low_pass(const ScalarField<Real>& u) {
  const Grid& g = u.grid();
  return apply_scalar_multiplier(u, [&](const std::array<int, 3>& q) { return in_low_band(g, q) ? Real(1) : Real(0); });
}

template <std::floating_point Real>
ScalarField<Real> high_pass(const ScalarField<Real>& u) {
  const Grid& g = u.grid();
  return apply_scalar_multiplier(u, [&](const std::array<int, 3>& q) { return in_low_band(g, q) ? Real(0) : Real(1); });
}

template <std::floating_point Real>
VectorField<Real> low_pass(const VectorField<Real>& u) {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : u) out.push_back(low_pass(c));
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
VectorField<Real> high_pass(const VectorField<Real>& u) {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : u) out.push_back(high_pass(c));
  return VectorField<Real>(std::move(out));
}

std::string to_string(DiffScheme s) { return s == DiffScheme::spectral ? "spectral" : "fd8"; }

DiffScheme diff_scheme_from_string(const std::string& s) {
  if (s == "spectral") return DiffScheme::spectral;
  if (s == "fd8") return DiffScheme::fd8;
  throw std::invalid_argument("unknown differentiation scheme: " + s);
}

#define DIFFREG_INSTANTIATE(Real)                                                                                \
  template VectorField<Real> spectral_gradient(const ScalarField<Real>&);                                        \
  template ScalarField<Real> fd8_derivative(const ScalarField<Real>&, int);                                      \
  template VectorField<Real> fd8_gradient(const ScalarField<Real>&);                                             \
  template VectorField<Real> gradient(const ScalarField<Real>&, DiffScheme);                                     \
  template ScalarField<Real> divergence(const VectorField<Real>&, DiffScheme);                                   \
  template ScalarField<Real> spectral_laplacian(const ScalarField<Real>&);                                       \
  template VectorField<Real> apply_reg_operator(const VectorField<Real>&, const RegOperatorSpec&, double);       \
  template VectorField<Real> apply_inv_reg_operator(const VectorField<Real>&, const RegOperatorSpec&, double);   \
  template VectorField<Real> apply_inv_sqrt_reg_operator(const VectorField<Real>&, const RegOperatorSpec&,       \
                                                         double);                                                \
  template VectorField<Real> project_body_force(const VectorField<Real>&, const IncompressibilityMode&, double); \
  template double divergence_energy(const VectorField<Real>&, double);                                           \
  template VectorField<Real> divergence_penalty_gradient(const VectorField<Real>&, double);                      \
  template ScalarField<Real> restrict_field(const ScalarField<Real>&);                                           \
  template ScalarField<Real> prolong_field(const ScalarField<Real>&, const Grid&);                               \
  template VectorField<Real> restrict_field(const VectorField<Real>&);                                           \
  template VectorField<Real> prolong_field(const VectorField<Real>&, const Grid&);                               \
  template ScalarField<Real> low_pass(const ScalarField<Real>&);                                                 \
  template ScalarField<Real> high_pass(const ScalarField<Real>&);                                                \
  template VectorField<Real> low_pass(const VectorField<Real>&);                                                 \
  template VectorField<Real> high_pass(const VectorField<Real>&);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
