#include "diffreg/field.hpp"

#include <algorithm>
#include <cmath>

namespace diffreg {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_space(b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

template <std::floating_point Real>
bool ScalarField<Real>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](Real x) { return std::isfinite(x); });
}

template <std::floating_point Real>
Real ScalarField<Real>::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

template <std::floating_point Real>
Real ScalarField<Real>::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

template <std::floating_point Real>
ScalarField<Real>& ScalarField<Real>::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

template <std::floating_point Real>
ScalarField<Real>& ScalarField<Real>::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_, "ScalarField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

template <std::floating_point Real>
ScalarField<Real>& ScalarField<Real>::operator*=(Real s) {
  for (auto& x : values_) x *= s;
  return *this;
}

template <std::floating_point Real>
ScalarField<Real>& ScalarField<Real>::axpy(Real a, const ScalarField& x) {
  require_same_grid(grid_, x.grid_, "ScalarField::axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

template <std::floating_point Real>
VectorField<Real>::VectorField(const Grid& grid, Real fill)
    : components_(static_cast<std::size_t>(grid.dim()), ScalarField<Real>(grid, fill)) {}

template <std::floating_point Real>
VectorField<Real>::VectorField(std::vector<ScalarField<Real>> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("VectorField: no components");
  if (static_cast<int>(components_.size()) != components_.front().grid().dim()) {
    throw std::invalid_argument("VectorField: component count must equal grid dimension");
  }
  for (const auto& c : components_) require_same_grid(c.grid(), components_.front().grid(), "VectorField");
}

template <std::floating_point Real>
bool VectorField<Real>::all_finite() const {
  return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.all_finite(); });
}

template <std::floating_point Real>
VectorField<Real>& VectorField<Real>::operator+=(const VectorField& o) {
  for (std::size_t c = 0; c < components_.size(); ++c) components_[c] += o.components_[c];
  return *this;
}

template <std::floating_point Real>
VectorField<Real>& VectorField<Real>::operator-=(const VectorField& o) {
  for (std::size_t c = 0; c < components_.size(); ++c) components_[c] -= o.components_[c];
  return *this;
}

template <std::floating_point Real>
VectorField<Real>& VectorField<Real>::operator*=(Real s) {
  for (auto& c : components_) c *= s;
  return *this;
}

template <std::floating_point Real>
VectorField<Real>& VectorField<Real>::axpy(Real a, const VectorField& x) {
  for (std::size_t c = 0; c < components_.size(); ++c) components_[c].axpy(a, x.components_[c]);
  return *this;
}

template <std::floating_point Real>
TensorField<Real> TensorField<Real>::identity(const Grid& grid) {
  TensorField t(grid);
  for (int i = 0; i < t.dim(); ++i) {
    for (auto& x : t(i, i).values()) x = Real(1);
  }
  return t;
}

template <std::floating_point Real>
ScalarField<Real> TensorField<Real>::determinant() const {
  const Grid& g = grid();
  ScalarField<Real> det(g);
  const auto& f = *this;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dim_ == 2) {
      det[i] = f(0, 0)[i] * f(1, 1)[i] - f(0, 1)[i] * f(1, 0)[i];
    } else {
      det[i] = f(0, 0)[i] * (f(1, 1)[i] * f(2, 2)[i] - f(1, 2)[i] * f(2, 1)[i]) -
               f(0, 1)[i] * (f(1, 0)[i] * f(2, 2)[i] - f(1, 2)[i] * f(2, 0)[i]) +
               f(0, 2)[i] * (f(1, 0)[i] * f(2, 1)[i] - f(1, 1)[i] * f(2, 0)[i]);
    }
  }
  return det;
}

template <std::floating_point Real>
double l2_inner(const ScalarField<Real>& a, const ScalarField<Real>& b) {
  require_same_grid(a.grid(), b.grid(), "l2_inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum * a.grid().cell_volume();
}

template <std::floating_point Real>
double l2_inner(const VectorField<Real>& a, const VectorField<Real>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("l2_inner: component count mismatch");
  double sum = 0.0;
  for (int c = 0; c < a.dim(); ++c) sum += l2_inner(a[c], b[c]);
  return sum;
}

template <std::floating_point Real>
double l2_norm(const ScalarField<Real>& a) {
  return std::sqrt(l2_inner(a, a));
}

template <std::floating_point Real>
double l2_norm(const VectorField<Real>& a) {
  return std::sqrt(l2_inner(a, a));
}

template <std::floating_point Real>
double max_norm(const ScalarField<Real>& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(static_cast<double>(a[i])));
  return m;
}

template <std::floating_point Real>
double max_norm(const VectorField<Real>& a) {
  double m = 0.0;
  for (const auto& c : a) m = std::max(m, max_norm(c));
  return m;
}

template <std::floating_point Real>
ScalarField<Real> time_integral(std::span<const ScalarField<Real>> slices) {
  if (slices.size() < 2) throw std::invalid_argument("time_integral: need at least two time slices");
  const double ht = 1.0 / static_cast<double>(slices.size() - 1);
  ScalarField<Real> out(slices.front().grid());
  for (std::size_t j = 0; j < slices.size(); ++j) {
    const double w = (j == 0 || j + 1 == slices.size()) ? 0.5 * ht : ht;
    out.axpy(static_cast<Real>(w), slices[j]);
  }
  return out;
}

template <std::floating_point Real>
VectorField<Real> time_integral(std::span<const VectorField<Real>> slices) {
  if (slices.size() < 2) throw std::invalid_argument("time_integral: need at least two time slices");
  const double ht = 1.0 / static_cast<double>(slices.size() - 1);
  VectorField<Real> out(slices.front().grid());
  for (std::size_t j = 0; j < slices.size(); ++j) {
    const double w = (j == 0 || j + 1 == slices.size()) ? 0.5 * ht : ht;
    out.axpy(static_cast<Real>(w), slices[j]);
  }
  return out;
}

#define DIFFREG_INSTANTIATE(Real)                                                           \
  template class ScalarField<Real>;                                                         \
  template class VectorField<Real>;                                                         \
  template class TensorField<Real>;                                                         \
  template double l2_inner(const ScalarField<Real>&, const ScalarField<Real>&);            \
  template double l2_inner(const VectorField<Real>&, const VectorField<Real>&);            \
  template double l2_norm(const ScalarField<Real>&);                                        \
  template double l2_norm(const VectorField<Real>&);                                        \
  template double max_norm(const ScalarField<Real>&);                                       \
  template double max_norm(const VectorField<Real>&);                                       \
  template ScalarField<Real> time_integral(std::span<const ScalarField<Real>>);             \
  template VectorField<Real> time_integral(std::span<const VectorField<Real>>);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
