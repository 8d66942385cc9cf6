#pragma once

#include <concepts>
#include <stdexcept>
#include <string>

#include "diffreg/field.hpp"

namespace diffreg {

enum class DistanceKind { ssd, ncc };

std::string to_string(DistanceKind k);
DistanceKind distance_from_string(const std::string& s);

class DistanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// SSD: 1/2 ||m - mref||^2. NCC: 1 - <m, mref>^2 / (||mref||^2 ||m||^2),
/// without mean removal.
template <std::floating_point Real>
double dist_value(const ScalarField<Real>& m, const ScalarField<Real>& mref, DistanceKind kind);

/// Final condition lambda(1) of the adjoint equation (minus the L2 gradient
/// of dist_value with respect to m).
template <std::floating_point Real>
ScalarField<Real> adjoint_final(const ScalarField<Real>& m, const ScalarField<Real>& mref, DistanceKind kind);

/// Final condition of the Gauss-Newton incremental adjoint for the
/// incremental state mt = m~(1): minus the second derivative of dist_value
/// applied to mt.
template <std::floating_point Real>
ScalarField<Real> incremental_final_gn(const ScalarField<Real>& mt, const ScalarField<Real>& m,
                                       const ScalarField<Real>& mref, DistanceKind kind);

}  // namespace diffreg
