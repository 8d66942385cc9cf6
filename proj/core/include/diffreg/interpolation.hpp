#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "diffreg/field.hpp"

namespace diffreg {

enum class InterpMethod { nearest, linear, cubic };

std::string to_string(InterpMethod m);
InterpMethod interp_method_from_string(const std::string& s);
int interp_taps(InterpMethod m);

/// Per-axis stencil offsets and weights for a fixed set of query points.
/// Query points are mesh coordinates; any real value is accepted and wrapped
/// periodically. Building the plan once lets every field transported along
/// the same characteristics reuse it.
template <std::floating_point Real>
class InterpolationPlan {
 public:
  InterpolationPlan(const Grid& grid, const VectorField<Real>& points, InterpMethod method);

  const Grid& grid() const { return grid_; }
  InterpMethod method() const { return method_; }
  std::size_t point_count() const { return count_; }

  ScalarField<Real> apply(const ScalarField<Real>& u) const;
  VectorField<Real> apply(const VectorField<Real>& u) const;

 private:
  Grid grid_;
  InterpMethod method_;
  int taps_;
  std::size_t count_;
  // offset_[axis][p * taps + j] is the node index times the axis stride
  std::vector<std::vector<std::uint32_t>> offset_;
  std::vector<std::vector<Real>> weight_;
};

template <std::floating_point Real>
ScalarField<Real> interpolate(const ScalarField<Real>& u, const VectorField<Real>& points, InterpMethod method);

/// Cubic Lagrange weights on nodes -1, 0, 1, 2 for local offset t in [0, 1).
std::array<double, 4> cubic_lagrange_weights(double t);

}  // namespace diffreg
