#include "diffreg/interpolation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace diffreg {

std::string to_string(InterpMethod m) {
  switch (m) {
    case InterpMethod::nearest:
      return "nearest";
    case InterpMethod::linear:
      return "linear";
    case InterpMethod::cubic:
      return "cubic";
  }
  return "unknown";
}

InterpMethod interp_method_from_string(const std::string& s) {
  if (s == "nearest") return InterpMethod::nearest;
  if (s == "linear") return InterpMethod::linear;
  if (s == "cubic") return InterpMethod::cubic;
  throw std::invalid_argument("unknown interpolation method: " + s);
}

int interp_taps(InterpMethod m) {
  switch (m) {
    case InterpMethod::nearest:
      return 1;
    case InterpMethod::linear:
      return 2;
    case InterpMethod::cubic:
      return 4;
  }
  return 0;
}

std::array<double, 4> cubic_lagrange_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

template <std::floating_point Real>
InterpolationPlan<Real>::InterpolationPlan(const Grid& grid, const VectorField<Real>& points, InterpMethod method)
    : grid_(grid), method_(method), taps_(interp_taps(method)), count_(points.grid().size()) {
  const int d = grid.dim();
  if (points.dim() != d || !points.grid().same_space(grid)) {
    throw std::invalid_argument("InterpolationPlan: points must live on the interpolation grid");
  }
  if (grid.size() > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("InterpolationPlan: grid too large");
  offset_.assign(static_cast<std::size_t>(d), std::vector<std::uint32_t>(count_ * static_cast<std::size_t>(taps_)));
  weight_.assign(static_cast<std::size_t>(d), std::vector<Real>(count_ * static_cast<std::size_t>(taps_)));
  // points computed from node coordinates carry a few ulps of noise; snap them
  const double snap = 16.0 * std::numeric_limits<Real>::epsilon();

  for (int a = 0; a < d; ++a) {
    const auto ai = static_cast<std::size_t>(a);
    const int n = grid.extent(a);
    const auto stride = static_cast<std::uint32_t>(grid.stride(a));
    auto& off = offset_[ai];
    auto& w = weight_[ai];
    const auto& pts = points[a];
    const auto total = static_cast<std::ptrdiff_t>(count_);
#pragma omp parallel for
    for (std::ptrdiff_t pi = 0; pi < total; ++pi) {
      const auto p = static_cast<std::size_t>(pi);
      double s = grid.fractional_index(a, static_cast<double>(pts[p]));
      const double r = std::round(s);
      if (std::abs(s - r) < snap * n) s = r;
      const std::size_t k = p * static_cast<std::size_t>(taps_);
      auto node = [&](long long i) { return static_cast<std::uint32_t>(((i % n) + n) % n) * stride; };
      if (method_ == InterpMethod::nearest) {
        off[k] = node(static_cast<long long>(std::floor(s + 0.5)));
        w[k] = Real(1);
        continue;
      }
      const double base = std::floor(s);
      const double t = s - base;
      const auto b = static_cast<long long>(base);
      if (method_ == InterpMethod::linear) {
        off[k] = node(b);
        off[k + 1] = node(b + 1);
        w[k] = static_cast<Real>(1.0 - t);
        w[k + 1] = static_cast<Real>(t);
      } else {
        const auto cw = cubic_lagrange_weights(t);
        for (int j = 0; j < 4; ++j) {
          off[k + static_cast<std::size_t>(j)] = node(b - 1 + j);
          w[k + static_cast<std::size_t>(j)] = static_cast<Real>(cw[static_cast<std::size_t>(j)]);
        }
      }
    }
  }
}

template <std::floating_point Real>
ScalarField<Real> InterpolationPlan<Real>::apply(const ScalarField<Real>& u) const {
  if (!u.grid().same_space(grid_)) throw std::invalid_argument("InterpolationPlan::apply: grid mismatch");
  ScalarField<Real> out(grid_);
  const Real* src = u.data();
  const auto T = static_cast<std::size_t>(taps_);
  const auto total = static_cast<std::ptrdiff_t>(count_);
  if (grid_.dim() == 2) {
    const auto& o0 = offset_[0];
    const auto& o1 = offset_[1];
    const auto& w0 = weight_[0];
    const auto& w1 = weight_[1];
#pragma omp parallel for
    for (std::ptrdiff_t pi = 0; pi < total; ++pi) {
      const std::size_t k = static_cast<std::size_t>(pi) * T;
      Real acc = 0;
      for (std::size_t a = 0; a < T; ++a) {
        Real row = 0;
        for (std::size_t b = 0; b < T; ++b) row += w1[k + b] * src[o0[k + a] + o1[k + b]];
        acc += w0[k + a] * row;
      }
      out[static_cast<std::size_t>(pi)] = acc;
    }
  } else {
    const auto& o0 = offset_[0];
    const auto& o1 = offset_[1];
    const auto& o2 = offset_[2];
    const auto& w0 = weight_[0];
    const auto& w1 = weight_[1];
    const auto& w2 = weight_[2];
#pragma omp parallel for
    for (std::ptrdiff_t pi = 0; pi < total; ++pi) {
      const std::size_t k = static_cast<std::size_t>(pi) * T;
      Real acc = 0;
      for (std::size_t a = 0; a < T; ++a) {
        Real plane = 0;
        for (std::size_t b = 0; b < T; ++b) {
          const std::uint32_t ab = o0[k + a] + o1[k + b];
          Real row = 0;
          for (std::size_t c = 0; c < T; ++c) row += w2[k + c] * src[ab + o2[k + c]];
          plane += w1[k + b] * row;
        }
        acc += w0[k + a] * plane;
      }
      out[static_cast<std::size_t>(pi)] = acc;
    }
  }
  return out;
}

template <std::floating_point Real>
VectorField<Real> InterpolationPlan<Real>::apply(const VectorField<Real>& u) const {
  std::vector<ScalarField<Real>> out;
  for (const auto& c : u) out.push_back(apply(c));
  return VectorField<Real>(std::move(out));
}

template <std::floating_point Real>
ScalarField<Real> interpolate(const ScalarField<Real>& u, const VectorField<Real>& points, InterpMethod method) {
  return InterpolationPlan<Real>(u.grid(), points, method).apply(u);
}

template class InterpolationPlan<float>;
template class InterpolationPlan<double>;
template ScalarField<float> interpolate(const ScalarField<float>&, const VectorField<float>&, InterpMethod);
template ScalarField<double> interpolate(const ScalarField<double>&, const VectorField<double>&, InterpMethod);

}  // namespace diffreg
