#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace schro {

using cplx = std::complex<double>;

// Spatial point or frequency. The second entry is unused when dim == 1.
using Point = std::array<double, 2>;

inline double dot(const Point& a, const Point& b, int dim) {
  return dim == 1 ? a[0] * b[0] : a[0] * b[0] + a[1] * b[1];
}
inline double norm_sq(const Point& a, int dim) { return dot(a, a, dim); }

// Periodic spatial grid of period L on [-L/2, L/2)^dim together with a uniform
// time grid on [0, R] with nt samples (endpoints included).
struct GridSpec {
  int dim = 1;
  double R = 1.0;
  double L = 4.0;
  std::size_t nx = 8;
  std::size_t nt = 2;

  // Smallest FFT-friendly nx resolving the unit frequency ball with the given
  // oversampling factor, L = 4R, and nt chosen so that dt <= dx.
  static GridSpec make(int dim, double R, double oversample = 1.25);

  // Throws GridTooCoarse or InvalidArgument.
  void validate() const;

  double dx() const noexcept { return L / static_cast<double>(nx); }
  double dt() const noexcept { return nt > 1 ? R / static_cast<double>(nt - 1) : 0.0; }
  double dk() const noexcept;
  double nyquist() const noexcept;
  std::size_t spatial_size() const noexcept { return dim == 1 ? nx : nx * nx; }

  double coord(std::size_t j) const noexcept;
  std::ptrdiff_t wavenumber(std::size_t j) const noexcept;
  // Inverse of wavenumber(); the caller guarantees k is representable.
  std::size_t slot(std::ptrdiff_t k) const noexcept;

  Point point(std::size_t flat) const noexcept;
  Point frequency(std::size_t flat) const noexcept;
  std::vector<double> time_samples() const;

  bool operator==(const GridSpec&) const = default;
};

// Smallest integer >= n whose prime factors are all in {2, 3, 5, 7}.
std::size_t fft_friendly_size(std::size_t n);

// Quadrature weights for samples of [times.front(), times.back()]: each sample
// owns the half-way cells to its neighbours. A single sample gets weight 1.
std::vector<double> time_weights(std::span<const double> times);

}  // namespace schro
