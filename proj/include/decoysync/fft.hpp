#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <span>

#include <fftw3.h>

namespace decoysync::detail {

// FFTW's planner is not reentrant; execution of distinct plans is.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T> T *fftw_alloc(std::size_t n) {
  void *p = fftw_malloc(sizeof(T) * n);
  if (!p)
    throw std::bad_alloc();
  return static_cast<T *>(p);
}

//! Real <-> half-complex transform pair of fixed length, owning its aligned
//! buffers and plans. forward() maps real() into spectrum(); inverse() maps
//! spectrum() back into real() (unnormalized, as FFTW does).
class RealFft {
public:
  explicit RealFft(std::size_t length)
      : n_(length), real_(fftw_alloc<double>(length)),
        spectrum_(fftw_alloc<fftw_complex>(length / 2 + 1)) {
    std::lock_guard lock(fftw_planner_mutex());
    const int n = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(n, real_, spectrum_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, spectrum_, real_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;

  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spectrum_);
  }

  std::size_t length() const noexcept { return n_; }
  std::size_t spectrum_length() const noexcept { return n_ / 2 + 1; }

  std::span<double> real() noexcept { return {real_, n_}; }
  std::span<std::complex<double>> spectrum() noexcept {
    return {reinterpret_cast<std::complex<double> *>(spectrum_), spectrum_length()};
  }

  void forward() noexcept { fftw_execute(forward_); }
  // c2r destroys its input; callers rebuild the spectrum before each call.
  void inverse() noexcept { fftw_execute(inverse_); }

private:
  std::size_t n_;
  double *real_;
  fftw_complex *spectrum_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n)
    p <<= 1;
  return p;
}

} // namespace decoysync::detail
