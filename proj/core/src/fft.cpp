#include "diffreg/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace diffreg {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class Real>
struct FftwApi;

template <>
struct FftwApi<double> {
  using Plan = fftw_plan;
  using Cpx = fftw_complex;
  static void* alloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void release(void* p) { fftw_free(p); }
  static Plan r2c(int rank, const int* n, double* in, Cpx* out) {
    return fftw_plan_dft_r2c(rank, n, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int rank, const int* n, Cpx* in, double* out) {
    return fftw_plan_dft_c2r(rank, n, in, out, FFTW_ESTIMATE);
  }
  static void execute(Plan p) { fftw_execute(p); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
};

template <>
struct FftwApi<float> {
  using Plan = fftwf_plan;
  using Cpx = fftwf_complex;
  static void* alloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void release(void* p) { fftwf_free(p); }
  static Plan r2c(int rank, const int* n, float* in, Cpx* out) {
    return fftwf_plan_dft_r2c(rank, n, in, out, FFTW_ESTIMATE);
  }
  static Plan c2r(int rank, const int* n, Cpx* in, float* out) {
    return fftwf_plan_dft_c2r(rank, n, in, out, FFTW_ESTIMATE);
  }
  static void execute(Plan p) { fftwf_execute(p); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
};

}  // namespace

template <std::floating_point Real>
struct FourierTransform<Real>::Plans {
  using Api = FftwApi<Real>;
  Real* real = nullptr;
  typename Api::Cpx* cpx = nullptr;
  typename Api::Plan forward{};
  typename Api::Plan backward{};

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) Api::destroy(forward);
    if (backward) Api::destroy(backward);
    Api::release(real);
    Api::release(cpx);
  }
};

template <std::floating_point Real>
FourierTransform<Real>::FourierTransform(const Grid& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  using Api = FftwApi<Real>;
  const int d = grid.dim();
  for (int a = 0; a < d; ++a) cext_[static_cast<std::size_t>(a)] = grid.extent(a);
  cext_[static_cast<std::size_t>(d - 1)] = grid.extent(d - 1) / 2 + 1;
  spectrum_size_ = static_cast<std::size_t>(cext_[0]) * static_cast<std::size_t>(cext_[1]) *
                   static_cast<std::size_t>(cext_[2]);

  plans_->real = static_cast<Real*>(Api::alloc(sizeof(Real) * grid.size()));
  plans_->cpx = static_cast<typename Api::Cpx*>(Api::alloc(sizeof(typename Api::Cpx) * spectrum_size_));
  if (!plans_->real || !plans_->cpx) throw std::bad_alloc();

  std::array<int, 3> n{};
  for (int a = 0; a < d; ++a) n[static_cast<std::size_t>(a)] = grid.extent(a);
  std::lock_guard lock(planner_mutex());
  plans_->forward = Api::r2c(d, n.data(), plans_->real, plans_->cpx);
  plans_->backward = Api::c2r(d, n.data(), plans_->cpx, plans_->real);
  if (!plans_->forward || !plans_->backward) throw std::runtime_error("FFTW planning failed");
}

template <std::floating_point Real>
FourierTransform<Real>::~FourierTransform() = default;

template <std::floating_point Real>
auto FourierTransform<Real>::forward(std::span<const Real> values) const -> std::vector<Complex> {
  if (values.size() != grid_.size()) throw std::invalid_argument("FourierTransform::forward: size mismatch");
  std::copy(values.begin(), values.end(), plans_->real);
  FftwApi<Real>::execute(plans_->forward);
  std::vector<Complex> out(spectrum_size_);
  std::memcpy(static_cast<void*>(out.data()), plans_->cpx, sizeof(Complex) * spectrum_size_);
  return out;
}

template <std::floating_point Real>
std::vector<Real> FourierTransform<Real>::inverse(std::span<const Complex> spectrum) const {
  if (spectrum.size() != spectrum_size_) throw std::invalid_argument("FourierTransform::inverse: size mismatch");
  // c2r overwrites its input, so work on the plan-owned buffer
  std::memcpy(static_cast<void*>(plans_->cpx), spectrum.data(), sizeof(Complex) * spectrum_size_);
  FftwApi<Real>::execute(plans_->backward);
  std::vector<Real> out(grid_.size());
  const Real scale = Real(1) / static_cast<Real>(grid_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = plans_->real[i] * scale;
  return out;
}

template <std::floating_point Real>
std::array<int, 3> FourierTransform<Real>::frequency(std::size_t index) const {
  const int c = static_cast<int>(index % static_cast<std::size_t>(cext_[2]));
  index /= static_cast<std::size_t>(cext_[2]);
  const int b = static_cast<int>(index % static_cast<std::size_t>(cext_[1]));
  const int a = static_cast<int>(index / static_cast<std::size_t>(cext_[1]));
  return {signed_frequency(0, a), signed_frequency(1, b), signed_frequency(2, c)};
}

template <std::floating_point Real>
const FourierTransform<Real>& fourier_transform(const Grid& grid) {
  thread_local std::map<std::array<int, 3>, std::unique_ptr<FourierTransform<Real>>> cache;
  auto& slot = cache[grid.extents()];
  if (!slot) slot = std::make_unique<FourierTransform<Real>>(grid.with_time_steps(1));
  return *slot;
}

template class FourierTransform<float>;
template class FourierTransform<double>;
template const FourierTransform<float>& fourier_transform(const Grid&);
template const FourierTransform<double>& fourier_transform(const Grid&);

}  // namespace diffreg
