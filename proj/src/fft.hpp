#pragma once

#include <fftw3.h>

#include <cstddef>
#include <span>

#include "schro/grid.hpp"

namespace schro::detail {

// In-place complex FFT on an owned buffer of n^dim points (row-major).
// forward():  X_k = sum_j x_j e^{-2 pi i jk/n}
// backward(): x_j = sum_k X_k e^{+2 pi i jk/n}, unnormalized.
class Fft {
 public:
  Fft(int dim, std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::span<cplx> data() noexcept { return {reinterpret_cast<cplx*>(buf_), size_}; }
  void forward() noexcept { fftw_execute(fwd_); }
  void backward() noexcept { fftw_execute(bwd_); }

 private:
  std::size_t size_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace schro::detail

namespace schro::detail {

// Per-thread plan cache; the returned object stays valid for the thread's lifetime.
Fft& cached_fft(int dim, std::size_t n);

}  // namespace schro::detail
