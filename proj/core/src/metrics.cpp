#include "diffreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "diffreg/transport.hpp"

namespace diffreg {

LabelVolume::LabelVolume(Grid grid, std::int32_t fill) : grid_(std::move(grid)), labels_(grid_.size(), fill) {
  if (fill < 0) throw std::invalid_argument("LabelVolume: labels must be non-negative");
}

LabelVolume::LabelVolume(Grid grid, std::vector<std::int32_t> labels)
    : grid_(std::move(grid)), labels_(std::move(labels)) {
  if (labels_.size() != grid_.size()) throw std::invalid_argument("LabelVolume: label count does not match grid");
  if (std::any_of(labels_.begin(), labels_.end(), [](std::int32_t l) { return l < 0; })) {
    throw std::invalid_argument("LabelVolume: labels must be non-negative");
  }
}

std::vector<std::int32_t> LabelVolume::ids() const {
  std::set<std::int32_t> s;
  for (auto l : labels_)
    if (l != 0) s.insert(l);
  return {s.begin(), s.end()};
}

DiceResult dice(const LabelVolume& a, const LabelVolume& b, const std::vector<std::int32_t>& ids) {
  if (!a.grid().same_space(b.grid())) throw std::invalid_argument("dice: grid mismatch");
  std::vector<std::int32_t> use = ids;
  if (use.empty()) {
    std::set<std::int32_t> s;
    for (auto id : a.ids()) s.insert(id);
    for (auto id : b.ids()) s.insert(id);
    use.assign(s.begin(), s.end());
  }
  auto score = [](long inter, long na, long nb, bool& empty) {
    empty = na + nb == 0;
    return empty ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
  };
  DiceResult res;
  for (auto id : use) {
    long inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool ia = a[i] == id, ib = b[i] == id;
      na += ia;
      nb += ib;
      inter += ia && ib;
    }
    DiceScore d;
    d.id = id;
    d.score = score(inter, na, nb, d.empty);
    res.per_label.push_back(d);
  }
  long inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool ia = a[i] != 0, ib = b[i] != 0;
    na += ia;
    nb += ib;
    inter += ia && ib;
  }
  res.union_score = score(inter, na, nb, res.union_empty);
  return res;
}

template <std::floating_point Real>
LabelVolume transport_labels(const LabelVolume& labels, const VectorField<Real>& v, InterpMethod trajectory_interp,
                             DiffScheme scheme) {
  const Grid g = v.grid();
  if (!labels.grid().same_space(g)) throw std::invalid_argument("transport_labels: grid mismatch");
  const TransportPlan<Real> plan(v, trajectory_interp, scheme);
  const auto y = compose_trajectory(plan);
  const InterpolationPlan<Real> nearest(g, y, InterpMethod::nearest);
  ScalarField<Real> as_real(g);
  for (std::size_t i = 0; i < g.size(); ++i) as_real[i] = static_cast<Real>(labels[i]);
  const auto moved = nearest.apply(as_real);
  std::vector<std::int32_t> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<std::int32_t>(std::lround(moved[i]));
  return LabelVolume(labels.grid(), std::move(out));
}

template <std::floating_point Real>
DetStats field_stats(const ScalarField<Real>& f) {
  DetStats s;
  s.min = static_cast<double>(f.min());
  s.max = static_cast<double>(f.max());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += static_cast<double>(f[i]);
  s.mean = sum / static_cast<double>(f.size());
  // rounding in the mean must not break min <= mean <= max
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

template <std::floating_point Real>
ScalarField<Real> detgrad(const VectorField<Real>& v, InterpMethod interp, DiffScheme scheme) {
  const TransportPlan<Real> plan(v, interp, scheme);
  return solve_deformation_tensor(v, plan).determinant();
}

template <std::floating_point Real>
DetStats detgrad_stats(const VectorField<Real>& v, InterpMethod interp, DiffScheme scheme) {
  return field_stats(detgrad(v, interp, scheme));
}

MismatchResult mismatch_ratio(double dist_after, double dist_before) {
  if (dist_before == 0.0) return {0.0, true};
  return {dist_after / dist_before, false};
}

template <std::floating_point Real>
MismatchResult relative_mismatch(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const VectorField<Real>& v,
                                 DistanceKind distance, InterpMethod interp, DiffScheme scheme) {
  const TransportPlan<Real> plan(v, interp, scheme);
  const auto m = solve_state(m0, plan);
  return mismatch_ratio(dist_value(m.final(), m1, distance), dist_value(m0, m1, distance));
}

template <std::floating_point Real>
ScalarField<Real> residual_image(const ScalarField<Real>& m, const ScalarField<Real>& mref) {
  auto r = m - mref;
  for (auto& x : r.values()) x = std::abs(x);
  return r;
}

#define DIFFREG_INSTANTIATE(Real)                                                                                  \
  template LabelVolume transport_labels(const LabelVolume&, const VectorField<Real>&, InterpMethod, DiffScheme);   \
  template DetStats field_stats(const ScalarField<Real>&);                                                         \
  template ScalarField<Real> detgrad(const VectorField<Real>&, InterpMethod, DiffScheme);                          \
  template DetStats detgrad_stats(const VectorField<Real>&, InterpMethod, DiffScheme);                             \
  template MismatchResult relative_mismatch(const ScalarField<Real>&, const ScalarField<Real>&,                    \
                                            const VectorField<Real>&, DistanceKind, InterpMethod, DiffScheme);     \
  template ScalarField<Real> residual_image(const ScalarField<Real>&, const ScalarField<Real>&);

DIFFREG_INSTANTIATE(float)
DIFFREG_INSTANTIATE(double)

}  // namespace diffreg
