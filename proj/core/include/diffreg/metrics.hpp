#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include "diffreg/diffops.hpp"
#include "diffreg/distance.hpp"
#include "diffreg/field.hpp"
#include "diffreg/interpolation.hpp"

namespace diffreg {

/// Integer label per voxel; 0 is background.
class LabelVolume {
 public:
  explicit LabelVolume(Grid grid, std::int32_t fill = 0);
  LabelVolume(Grid grid, std::vector<std::int32_t> labels);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return labels_.size(); }
  std::int32_t& operator[](std::size_t i) { return labels_[i]; }
  std::int32_t operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::int32_t>& labels() const { return labels_; }

  /// Sorted non-background ids present in the volume.
  std::vector<std::int32_t> ids() const;

  /// Same spatial grid and labels; the time discretization is irrelevant.
  bool operator==(const LabelVolume& o) const { return grid_.same_space(o.grid_) && labels_ == o.labels_; }

 private:
  Grid grid_;
  std::vector<std::int32_t> labels_;
};

struct DiceScore {
  std::int32_t id = 0;
  double score = 0.0;
  bool empty = false;  // id absent from both volumes; score is 1 by convention
};

struct DiceResult {
  std::vector<DiceScore> per_label;
  double union_score = 0.0;  // all foreground merged
  bool union_empty = false;
};

/// Dice 2|A n B| / (|A| + |B|) for each id (all ids of either volume if
/// `ids` is empty) and for the merged foreground.
DiceResult dice(const LabelVolume& a, const LabelVolume& b, const std::vector<std::int32_t>& ids = {});

/// Nearest-neighbour resampling of labels at the composed departure map.
template <std::floating_point Real>
LabelVolume transport_labels(const LabelVolume& labels, const VectorField<Real>& v, InterpMethod trajectory_interp,
                             DiffScheme scheme);

struct DetStats {
  double min = 1.0;
  double mean = 1.0;
  double max = 1.0;
};

template <std::floating_point Real>
DetStats field_stats(const ScalarField<Real>& f);

/// det f(1) per voxel from the deformation tensor equation.
template <std::floating_point Real>
ScalarField<Real> detgrad(const VectorField<Real>& v, InterpMethod interp, DiffScheme scheme);

template <std::floating_point Real>
DetStats detgrad_stats(const VectorField<Real>& v, InterpMethod interp, DiffScheme scheme);

struct MismatchResult {
  double value = 0.0;
  bool degenerate = false;  // dist(m0, m1) == 0
};

/// dist(m(1), m1) / dist(m0, m1).
template <std::floating_point Real>
MismatchResult relative_mismatch(const ScalarField<Real>& m0, const ScalarField<Real>& m1, const VectorField<Real>& v,
                                 DistanceKind distance, InterpMethod interp, DiffScheme scheme);

MismatchResult mismatch_ratio(double dist_after, double dist_before);

/// |m - mref| per voxel.
template <std::floating_point Real>
ScalarField<Real> residual_image(const ScalarField<Real>& m, const ScalarField<Real>& mref);

}  // namespace diffreg
