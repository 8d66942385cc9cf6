#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace diffreg {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Periodic rectangular mesh on [-pi, pi)^d together with the pseudo-time
/// discretization of [0, 1].
///
/// Storage is C-order (last axis fastest). A 2D grid is stored with a
/// trailing extent of 1 so that loops over three axes cover both cases.
class Grid {
 public:
  Grid(std::span<const int> dims, int time_steps = 4);
  Grid(std::initializer_list<int> dims, int time_steps = 4);

  int dim() const { return dim_; }
  int extent(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
  const std::array<int, 3>& extents() const { return n_; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  int time_steps() const { return nt_; }
  double time_step() const { return 1.0 / nt_; }

  std::size_t size() const { return size_; }
  double cell_volume() const;
  std::size_t stride(int axis) const { return stride_[static_cast<std::size_t>(axis)]; }

  std::size_t linear_index(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * static_cast<std::size_t>(n_[1]) + static_cast<std::size_t>(i1)) *
               static_cast<std::size_t>(n_[2]) +
           static_cast<std::size_t>(i2);
  }
  std::array<int, 3> multi_index(std::size_t linear) const;

  /// Coordinate of the zero-based node index along one axis.
  double coordinate(int axis, int index) const;
  /// Coordinates of a voxel given by its linear index (unused axes are 0).
  std::array<double, 3> point(std::size_t linear) const;

  /// Fractional zero-based index of a coordinate, wrapped into [0, n).
  double fractional_index(int axis, double x) const;

  Grid with_time_steps(int nt) const;
  /// Half resolution per spatial axis, same time steps.
  Grid coarsened() const;
  Grid refined() const;

  bool same_space(const Grid& other) const { return dim_ == other.dim_ && n_ == other.n_; }
  bool operator==(const Grid& other) const = default;

  std::string describe() const;

 private:
  void init(std::span<const int> dims, int time_steps);

  int dim_ = 0;
  std::array<int, 3> n_{1, 1, 1};
  std::array<double, 3> h_{0.0, 0.0, 0.0};
  std::array<std::size_t, 3> stride_{0, 0, 0};
  std::size_t size_ = 0;
  int nt_ = 1;
};

/// Mesh point for the one-based multi-index l (1 <= l_i <= n_i):
/// x_l = (n/2 - l) * h, componentwise. Unused trailing components are 0.
std::array<double, 3> mesh_coordinates(const Grid& grid, std::span<const int> l);

}  // namespace diffreg
