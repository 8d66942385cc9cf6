#include "diffreg/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace diffreg {

Grid::Grid(std::span<const int> dims, int time_steps) { init(dims, time_steps); }

Grid::Grid(std::initializer_list<int> dims, int time_steps) {
  const std::vector<int> tmp(dims);
  init(tmp, time_steps);
}

void Grid::init(std::span<const int> dims, int time_steps) {
  if (dims.size() != 2 && dims.size() != 3) {
    throw std::invalid_argument("Grid: dimensionality must be 2 or 3");
  }
  if (time_steps < 1) {
    throw std::invalid_argument("Grid: number of time steps must be >= 1");
  }
  dim_ = static_cast<int>(dims.size());
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (dims[a] < 8 || dims[a] % 2 != 0) {
      throw std::invalid_argument("Grid: every extent must be even and >= 8, got " + std::to_string(dims[a]));
    }
    n_[a] = dims[a];
    h_[a] = kTwoPi / dims[a];
  }
  stride_[2] = 1;
  stride_[1] = static_cast<std::size_t>(n_[2]);
  stride_[0] = static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(n_[2]);
  size_ = static_cast<std::size_t>(n_[0]) * stride_[0];
  nt_ = time_steps;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

std::array<int, 3> Grid::multi_index(std::size_t linear) const {
  std::array<int, 3> idx{};
  idx[2] = static_cast<int>(linear % static_cast<std::size_t>(n_[2]));
  linear /= static_cast<std::size_t>(n_[2]);
  idx[1] = static_cast<int>(linear % static_cast<std::size_t>(n_[1]));
  idx[0] = static_cast<int>(linear / static_cast<std::size_t>(n_[1]));
  return idx;
}

double Grid::coordinate(int axis, int index) const {
  // One-based l = index + 1 in x_l = (n/2 - l) h.
  return (n_[static_cast<std::size_t>(axis)] / 2 - (index + 1)) * h_[static_cast<std::size_t>(axis)];
}

std::array<double, 3> Grid::point(std::size_t linear) const {
  const auto idx = multi_index(linear);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = coordinate(a, idx[static_cast<std::size_t>(a)]);
  return x;
}

double Grid::fractional_index(int axis, double x) const {
  const auto a = static_cast<std::size_t>(axis);
  const double n = n_[a];
  double s = (n / 2 - 1) - x / h_[a];
  s = std::fmod(s, n);
  if (s < 0) s += n;
  // fmod can round up to exactly n for tiny negative inputs
  if (s >= n) s -= n;
  return s;
}

Grid Grid::with_time_steps(int nt) const {
  std::vector<int> dims(n_.begin(), n_.begin() + dim_);
  return Grid(dims, nt);
}

Grid Grid::coarsened() const {
  std::vector<int> dims;
  for (int a = 0; a < dim_; ++a) {
    if (n_[static_cast<std::size_t>(a)] % 4 != 0) {
      throw std::invalid_argument("Grid::coarsened: extents must be divisible by 4");
    }
    dims.push_back(n_[static_cast<std::size_t>(a)] / 2);
  }
  return Grid(dims, nt_);
}

Grid Grid::refined() const {
  std::vector<int> dims;
  for (int a = 0; a < dim_; ++a) dims.push_back(2 * n_[static_cast<std::size_t>(a)]);
  return Grid(dims, nt_);
}

std::string Grid::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << n_[static_cast<std::size_t>(a)];
  os << " nt=" << nt_;
  return os.str();
}

std::array<double, 3> mesh_coordinates(const Grid& grid, std::span<const int> l) {
  if (static_cast<int>(l.size()) != grid.dim()) {
    throw std::invalid_argument("mesh_coordinates: index rank does not match grid");
  }
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < grid.dim(); ++a) {
    const int li = l[static_cast<std::size_t>(a)];
    if (li < 1 || li > grid.extent(a)) {
      throw std::out_of_range("mesh_coordinates: index out of range");
    }
    x[static_cast<std::size_t>(a)] = grid.coordinate(a, li - 1);
  }
  return x;
}

}  // namespace diffreg
