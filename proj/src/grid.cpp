#include "schro/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "schro/error.hpp"

namespace schro {

std::size_t fft_friendly_size(std::size_t n) {
  if (n < 2) return 2;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u, 7u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

GridSpec GridSpec::make(int dim, double R, double oversample) {
  GridSpec g;
  g.dim = dim;
  g.R = R;
  g.L = 4.0 * R;
  const double needed = oversample * g.L / std::numbers::pi;
  g.nx = fft_friendly_size(static_cast<std::size_t>(std::ceil(needed)));
  if (g.nx % 2 == 1) g.nx = fft_friendly_size(g.nx + 1);
  g.nt = static_cast<std::size_t>(std::ceil(R / g.dx() - 1e-12)) + 1;
  g.validate();
  return g;
}

void GridSpec::validate() const {
  require(dim == 1 || dim == 2, ErrorCode::kInvalidArgument, "dim must be 1 or 2");
  require(std::isfinite(R) && R > 0, ErrorCode::kInvalidArgument, "R must be positive");
  require(L >= 4.0 * R * (1 - 1e-12), ErrorCode::kInvalidArgument,
          "period L must be at least 4R");
  require(nx >= 2, ErrorCode::kGridTooCoarse, "nx must be at least 2");
  require(nyquist() >= 1.0 - 1e-12, ErrorCode::kGridTooCoarse,
          "grid does not resolve the unit frequency ball (need nx >= L/pi)");
  require(nt >= 2, ErrorCode::kGridTooCoarse, "nt must be at least 2");
  require(dt() <= dx() * (1 + 1e-12), ErrorCode::kGridTooCoarse,
          "time step " + std::to_string(dt()) + " exceeds spatial step " + std::to_string(dx()));
}

double GridSpec::dk() const noexcept { return 2.0 * std::numbers::pi / L; }

double GridSpec::nyquist() const noexcept {
  return std::numbers::pi * static_cast<double>(nx) / L;
}

double GridSpec::coord(std::size_t j) const noexcept {
  return (static_cast<double>(j) - static_cast<double>(nx / 2)) * dx();
}

std::ptrdiff_t GridSpec::wavenumber(std::size_t j) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(nx);
  const auto k = static_cast<std::ptrdiff_t>(j);
  return k <= (n - 1) / 2 ? k : k - n;
}

std::size_t GridSpec::slot(std::ptrdiff_t k) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(nx);
  return static_cast<std::size_t>(((k % n) + n) % n);
}

Point GridSpec::point(std::size_t flat) const noexcept {
  if (dim == 1) return {coord(flat), 0.0};
  return {coord(flat / nx), coord(flat % nx)};
}

Point GridSpec::frequency(std::size_t flat) const noexcept {
  const double s = dk();
  if (dim == 1) return {s * static_cast<double>(wavenumber(flat)), 0.0};
  return {s * static_cast<double>(wavenumber(flat / nx)),
          s * static_cast<double>(wavenumber(flat % nx))};
}

std::vector<double> GridSpec::time_samples() const {
  std::vector<double> t(nt);
  for (std::size_t m = 0; m < nt; ++m)
    t[m] = nt > 1 ? R * static_cast<double>(m) / static_cast<double>(nt - 1) : 0.0;
  return t;
}

std::vector<double> time_weights(std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  if (times.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t m = 0; m + 1 < times.size(); ++m) {
    const double half = 0.5 * (times[m + 1] - times[m]);
    w[m] += half;
    w[m + 1] += half;
  }
  return w;
}

}  // namespace schro
