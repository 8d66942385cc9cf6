#pragma once

#include <array>
#include <complex>
#include <concepts>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "diffreg/grid.hpp"

namespace diffreg {

/// Real-to-complex FFT on a grid. The forward transform is unscaled, the
/// inverse is scaled by 1 / prod(n_i), so spectral masks and multipliers do
/// not depend on the normalization.
///
/// The spectrum uses the half-complex layout along the last active axis.
/// `frequency` returns the signed DFT frequency q with respect to the array
/// index; since mesh coordinates decrease with the index, the physical
/// wavenumber is k = -q.
template <std::floating_point Real>
class FourierTransform {
 public:
  using Complex = std::complex<Real>;

  explicit FourierTransform(const Grid& grid);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t spectrum_size() const { return spectrum_size_; }
  const std::array<int, 3>& spectrum_extents() const { return cext_; }

  std::vector<Complex> forward(std::span<const Real> values) const;
  std::vector<Real> inverse(std::span<const Complex> spectrum) const;

  /// Signed frequencies (q_0, q_1, q_2) of spectrum entry `index`; unused
  /// axes are 0. Nyquist frequencies are reported as +n/2.
  std::array<int, 3> frequency(std::size_t index) const;

  /// Calls f(index, q) for every spectrum entry.
  template <class F>
  void for_each_mode(F&& f) const {
    std::size_t idx = 0;
    for (int a = 0; a < cext_[0]; ++a) {
      const int q0 = signed_frequency(0, a);
      for (int b = 0; b < cext_[1]; ++b) {
        const int q1 = signed_frequency(1, b);
        for (int c = 0; c < cext_[2]; ++c, ++idx) {
          f(idx, std::array<int, 3>{q0, q1, signed_frequency(2, c)});
        }
      }
    }
  }

 private:
  int signed_frequency(int axis, int j) const {
    if (axis >= grid_.dim()) return 0;
    if (axis == grid_.dim() - 1) return j;
    return j <= grid_.extent(axis) / 2 ? j : j - grid_.extent(axis);
  }

  struct Plans;
  Grid grid_;
  std::array<int, 3> cext_{1, 1, 1};
  std::size_t spectrum_size_ = 0;
  std::unique_ptr<Plans> plans_;
};

/// Per-thread cached transform for the grid's spatial extents.
template <std::floating_point Real>
const FourierTransform<Real>& fourier_transform(const Grid& grid);

}  // namespace diffreg
