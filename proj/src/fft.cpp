#include "fft.hpp"

#include <mutex>
#include <new>

namespace schro::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(int dim, std::size_t n) : size_(dim == 1 ? n : n * n) {
  std::lock_guard lock(planner_mutex());
  buf_ = fftw_alloc_complex(size_);
  if (!buf_) throw std::bad_alloc();
  const int ni = static_cast<int>(n);
  if (dim == 1) {
    fwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  } else {
    fwd_ = fftw_plan_dft_2d(ni, ni, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(ni, ni, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (bwd_) fftw_destroy_plan(bwd_);
  fftw_free(buf_);
}

}  // namespace schro::detail

#include <map>
#include <memory>
#include <utility>

namespace schro::detail {

Fft& cached_fft(int dim, std::size_t n) {
  thread_local std::map<std::pair<int, std::size_t>, std::unique_ptr<Fft>> cache;
  auto& slot = cache[{dim, n}];
  if (!slot) slot = std::make_unique<Fft>(dim, n);
  return *slot;
}

}  // namespace schro::detail
