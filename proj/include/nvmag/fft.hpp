#pragma once

// Thin RAII wrapper over FFTW's real-to-complex transforms. Plans use
// FFTW_ESTIMATE so the chosen algorithm, and therefore every output bit,
// does not depend on run-time timing measurements.
//
// FFTW's planner is not thread-safe; construct RealFft objects from one
// thread at a time.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <fftw3.h>

namespace nvmag::fft {

class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        spec_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (n < 2) throw std::invalid_argument("RealFft: length must be >= 2");
    if (!real_ || !spec_) throw std::bad_alloc();
    forward_.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.get(), spec_.get(), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_.get(), real_.get(), FFTW_ESTIMATE));
    if (!forward_ || !inverse_) throw std::runtime_error("RealFft: FFTW planning failed");
  }

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  /// Unnormalized DFT X[k] = Σ x[n]·exp(-2πi·kn/N), k = 0..N/2.
  std::vector<std::complex<double>> forward(std::span<const double> x) {
    if (x.size() != n_) throw std::invalid_argument("RealFft::forward: length mismatch");
    std::copy(x.begin(), x.end(), real_.get());
    fftw_execute(forward_.get());
    std::vector<std::complex<double>> out(bins());
    for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
    return out;
  }

  /// Inverse of `forward`, including the 1/N factor.
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum) {
    if (spectrum.size() != bins()) throw std::invalid_argument("RealFft::inverse: length mismatch");
    for (std::size_t k = 0; k < bins(); ++k) {
      spec_.get()[k][0] = spectrum[k].real();
      spec_.get()[k][1] = spectrum[k].imag();
    }
    fftw_execute(inverse_.get());
    std::vector<double> out(real_.get(), real_.get() + n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& v : out) v *= scale;
    return out;
  }

 private:
  struct FreeDeleter {
    void operator()(void* p) const { fftw_free(p); }
  };
  struct PlanDeleter {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
  };

  std::size_t n_;
  std::unique_ptr<double, FreeDeleter> real_;
  std::unique_ptr<fftw_complex, FreeDeleter> spec_;
  std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter> forward_;
  std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter> inverse_;
};

}  // namespace nvmag::fft
