#pragma once

#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "diffreg/grid.hpp"

namespace diffreg {

template <std::floating_point Real>
class ScalarField {
 public:
  using value_type = Real;

  explicit ScalarField(Grid grid, Real fill = Real(0)) : grid_(std::move(grid)), values_(grid_.size(), fill) {}
  ScalarField(Grid grid, std::vector<Real> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("ScalarField: value count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }
  Real* data() { return values_.data(); }
  const Real* data() const { return values_.data(); }
  Real& operator[](std::size_t i) { return values_[i]; }
  Real operator[](std::size_t i) const { return values_[i]; }

  bool all_finite() const;
  Real min() const;
  Real max() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(Real s);
  /// this += a * x
  ScalarField& axpy(Real a, const ScalarField& x);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(Real s, ScalarField a) { return a *= s; }

  bool operator==(const ScalarField& o) const = default;

 private:
  Grid grid_;
  std::vector<Real> values_;
};

/// d components sharing one grid.
template <std::floating_point Real>
class VectorField {
 public:
  using value_type = Real;

  explicit VectorField(const Grid& grid, Real fill = Real(0));
  explicit VectorField(std::vector<ScalarField<Real>> components);

  const Grid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  ScalarField<Real>& operator[](int i) { return components_[static_cast<std::size_t>(i)]; }
  const ScalarField<Real>& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
  auto begin() { return components_.begin(); }
  auto end() { return components_.end(); }
  auto begin() const { return components_.begin(); }
  auto end() const { return components_.end(); }

  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(Real s);
  VectorField& axpy(Real a, const VectorField& x);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(Real s, VectorField a) { return a *= s; }

  bool operator==(const VectorField& o) const = default;

 private:
  std::vector<ScalarField<Real>> components_;
};

/// Scalar field stored at the n_t + 1 time points t_j = j h_t.
template <std::floating_point Real>
class TimeSeriesField {
 public:
  explicit TimeSeriesField(const Grid& grid, Real fill = Real(0))
      : slices_(static_cast<std::size_t>(grid.time_steps()) + 1, ScalarField<Real>(grid, fill)) {}

  const Grid& grid() const { return slices_.front().grid(); }
  int time_steps() const { return static_cast<int>(slices_.size()) - 1; }
  std::size_t slice_count() const { return slices_.size(); }
  ScalarField<Real>& operator[](int j) { return slices_[static_cast<std::size_t>(j)]; }
  const ScalarField<Real>& operator[](int j) const { return slices_[static_cast<std::size_t>(j)]; }
  const ScalarField<Real>& final() const { return slices_.back(); }
  std::span<const ScalarField<Real>> slices() const { return slices_; }

 private:
  std::vector<ScalarField<Real>> slices_;
};

/// d x d entries, row-major (entry(i, j) at i * d + j).
template <std::floating_point Real>
class TensorField {
 public:
  explicit TensorField(const Grid& grid, Real fill = Real(0))
      : dim_(grid.dim()), entries_(static_cast<std::size_t>(dim_ * dim_), ScalarField<Real>(grid, fill)) {}

  static TensorField identity(const Grid& grid);

  const Grid& grid() const { return entries_.front().grid(); }
  int dim() const { return dim_; }
  ScalarField<Real>& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i * dim_ + j)]; }
  const ScalarField<Real>& operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(i * dim_ + j)];
  }

  /// Pointwise determinant.
  ScalarField<Real> determinant() const;

 private:
  int dim_;
  std::vector<ScalarField<Real>> entries_;
};

// Discrete L2 inner products use midpoint quadrature with the uniform cell
// volume. Sums are accumulated sequentially in double so results do not
// depend on the thread count.
template <std::floating_point Real>
double l2_inner(const ScalarField<Real>& a, const ScalarField<Real>& b);
template <std::floating_point Real>
double l2_inner(const VectorField<Real>& a, const VectorField<Real>& b);
template <std::floating_point Real>
double l2_norm(const ScalarField<Real>& a);
template <std::floating_point Real>
double l2_norm(const VectorField<Real>& a);
template <std::floating_point Real>
double max_norm(const ScalarField<Real>& a);
template <std::floating_point Real>
double max_norm(const VectorField<Real>& a);

/// Trapezoidal rule over n_t + 1 equispaced slices of [0, 1].
template <std::floating_point Real>
ScalarField<Real> time_integral(std::span<const ScalarField<Real>> slices);
template <std::floating_point Real>
VectorField<Real> time_integral(std::span<const VectorField<Real>> slices);

/// Samples f(x) at every mesh point; f takes std::array<double, 3>.
template <std::floating_point Real, class F>
ScalarField<Real> sample(const Grid& grid, F&& f) {
  ScalarField<Real> out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = static_cast<Real>(f(grid.point(i)));
  return out;
}

/// Samples a vector-valued f(x) returning std::array<double, 3>.
template <std::floating_point Real, class F>
VectorField<Real> sample_vector(const Grid& grid, F&& f) {
  VectorField<Real> out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto value = f(grid.point(i));
    for (int c = 0; c < grid.dim(); ++c) out[c][i] = static_cast<Real>(value[static_cast<std::size_t>(c)]);
  }
  return out;
}

/// Converts between working precisions.
template <std::floating_point To, std::floating_point From>
ScalarField<To> convert(const ScalarField<From>& f) {
  std::vector<To> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = static_cast<To>(f[i]);
  return ScalarField<To>(f.grid(), std::move(v));
}

template <std::floating_point To, std::floating_point From>
VectorField<To> convert(const VectorField<From>& f) {
  std::vector<ScalarField<To>> comps;
  for (const auto& c : f) comps.push_back(convert<To>(c));
  return VectorField<To>(std::move(comps));
}

}  // namespace diffreg
