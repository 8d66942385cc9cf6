#include "diffreg/distance.hpp"

namespace diffreg {

namespace {

template <class Real>
void require_nonzero(double norm2, const char* which) {
  if (!(norm2 > 0.0)) throw DistanceError(std::string("NCC undefined for zero-norm ") + which + " image");
}

}  // namespace

std::string to_string(DistanceKind k) { return k == DistanceKind::ssd ? "ssd" : "ncc"; }

DistanceKind distance_from_string(const std::string& s) {
  if (s == "ssd") return DistanceKind::ssd;
  if (s == "ncc") return DistanceKind::ncc;
  throw std::invalid_argument("unknown distance measure: " + s);
}

template <std::floating_point Real>
double dist_value(const ScalarField<Real>& m, const ScalarField<Real>& mref, DistanceKind kind) {
  if (kind == DistanceKind::ssd) {
    const auto r = m - mref;
    return 0.5 * l2_inner(r, r);
  }
  const double a = l2_inner(m, mref);
  const double b = l2_inner(m, m);
  const double c = l2_inner(mref, mref);
  require_nonzero<Real>(b, "deformed");
  require_nonzero<Real>(c, "reference");
  return 1.0 - a * a / (c * b);
}

template <std::floating_point Real>
ScalarField<Real> adjoint_final(const ScalarField<Real>& m, const ScalarField<Real>& mref, DistanceKind kind) {
  if (kind == DistanceKind::ssd) return mref - m;
  const double a = l2_inner(m, mref);
  const double b = l2_inner(m, m);
  const double c = l2_inner(mref, mref);
  require_nonzero<Real>(b, "deformed");
  require_nonzero<Real>(c, "reference");
  // -2a/(b c) * ((a/b) m - mref)
  const double s = -2.0 * a / (b * c);
  const double t = a / b;
  ScalarField<Real> out(m.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Real>(s * (t * static_cast<double>(m[i]) - static_cast<double>(mref[i])));
  }
  return out;
}

template <std::floating_point Real>
ScalarField<Real> incremental_final_gn(const ScalarField<Real>& mt, const ScalarField<Real>& m,
                                       const ScalarField<Real>& mref, DistanceKind kind) {
  if (kind == DistanceKind::ssd) return Real(-1) * mt;
  const double a = l2_inner(m, mref);
  const double b = l2_inner(m, m);
  const double c = l2_inner(mref, mref);
  require_nonzero<Real>(b, "deformed");
  require_nonzero<Real>(c, "reference");
  const double m_mt = l2_inner(m, mt);
  const double r_mt = l2_inner(mref, mt);
  const double q1 = 2.0 * a * m_mt / (b * b) - r_mt / b;
  const double q2 = 4.0 * a * a * m_mt / (b * b * b) - 2.0 * a * r_mt / (b * b);
  const double q3 = a * a / (b * b);
  ScalarField<Real> out(m.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Real>(2.0 / c *
                               (-q1 * static_cast<double>(mref[i]) + q2 * static_cast<double>(m[i]) -
                                q3 * static_cast<double>(mt[i])));
  }
  return out;
}

#define DIFFREG_INSTANTIATE(Real)                                                                          \
  template double dist_value(const ScalarField<Real>&, const ScalarField<Real>&, DistanceKind);            \
  template ScalarField<Real> adjoint_final(const ScalarField<Real>&, const ScalarField<Real>&, DistanceKind); \
  template ScalarField<Real> incremental_final_gn(const ScalarField<Real>&, const ScalarField<Real>&,       \
                                                  const ScalarField<Real>&, DistanceKind);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
