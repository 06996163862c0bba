#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "schro/grid.hpp"

namespace schro {

struct SupportBall {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

// Fourier coefficients fhat(xi_k) = integral of f(x) e^{-i x.xi_k} over the
// torus, stored in FFT order (row-major for dim 2).
class SpectralField {
 public:
  explicit SpectralField(GridSpec grid);

  static SpectralField from_samples(const GridSpec& grid, std::span<const cplx> samples);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<cplx> coeffs() noexcept { return coeffs_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }
  cplx& operator[](std::size_t k) { return coeffs_[k]; }
  const cplx& operator[](std::size_t k) const { return coeffs_[k]; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  Point frequency(std::size_t k) const noexcept { return grid_.frequency(k); }

  // f(x_j) on the spatial grid.
  std::vector<cplx> samples() const;

  double l2_norm() const;
  // Largest |xi| carrying a nonzero coefficient (0 for the zero field).
  double spectral_radius() const;
  // Squared L2 mass carried outside the ball.
  double mass_outside(const SupportBall& ball) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(cplx s);

  SupportBall support;

 private:
  GridSpec grid_;
  std::vector<cplx> coeffs_;
};

// Samples of a function on the spatial grid at arbitrary times, stored one
// time slice after another.
class SpaceTimeField {
 public:
  SpaceTimeField(GridSpec grid, std::vector<double> times);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const double> times() const noexcept { return times_; }
  std::size_t num_points() const noexcept { return grid_.spatial_size(); }
  std::size_t num_times() const noexcept { return times_.size(); }

  std::span<cplx> slice(std::size_t m) noexcept {
    return {values_.data() + m * num_points(), num_points()};
  }
  std::span<const cplx> slice(std::size_t m) const noexcept {
    return {values_.data() + m * num_points(), num_points()};
  }
  cplx& at(std::size_t x, std::size_t m) noexcept { return values_[m * num_points() + x]; }
  const cplx& at(std::size_t x, std::size_t m) const noexcept {
    return values_[m * num_points() + x];
  }
  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }

 private:
  GridSpec grid_;
  std::vector<double> times_;
  std::vector<cplx> values_;
};

// Subset of the (spatial point, time sample) lattice of a grid and time list.
class Region {
 public:
  Region(std::size_t num_points, std::size_t num_times, bool fill = false);

  // |x| <= R and 0 <= t <= R.
  static Region full_box(const GridSpec& grid, std::span<const double> times);
  static Region everything(const GridSpec& grid, std::span<const double> times);
  static Region from_predicate(const GridSpec& grid, std::span<const double> times,
                               const std::function<bool(const Point&, double)>& pred);

  std::size_t num_points() const noexcept { return num_points_; }
  std::size_t num_times() const noexcept { return num_times_; }
  bool contains(std::size_t x, std::size_t m) const noexcept {
    return mask_[m * num_points_ + x] != 0;
  }
  void set(std::size_t x, std::size_t m, bool in) noexcept {
    mask_[m * num_points_ + x] = in ? 1 : 0;
  }
  std::size_t count() const noexcept;
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }

  Region& operator&=(const Region& other);
  Region& operator|=(const Region& other);
  Region& subtract(const Region& other);

 private:
  std::size_t num_points_;
  std::size_t num_times_;
  std::vector<std::uint8_t> mask_;
};

// Exponents may be infinite. Without a region the full box is used.
struct MixedNormParams {
  double p = 2.0;
  double q = 2.0;
  std::optional<Region> region;
};

// Evaluates e^{it Laplacian} f one time at a time.
class SlicePropagator {
 public:
  explicit SlicePropagator(const SpectralField& f);
  ~SlicePropagator();
  SlicePropagator(const SlicePropagator&) = delete;
  SlicePropagator& operator=(const SlicePropagator&) = delete;

  // Values on the spatial grid at time t; valid until the next call.
  std::span<const cplx> at(double t);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpaceTimeField propagate(const SpectralField& f, std::span<const double> times);
SpaceTimeField propagate(const SpectralField& f);

// L^p_x L^q_t norm over the region (spatial weight dx^dim, time weights from
// time_weights()). Throws EmptyRegion or NonFinite.
double mixed_norm(const SpaceTimeField& u, const MixedNormParams& params);

// sum of w |u|^p over the region, streamed without storing the field.
double region_power_sum(const SpectralField& f, std::span<const double> times,
                        const Region& region, double p);

// sup over the time samples of |u(x, t)|, per spatial point.
std::vector<double> maximal_function(const SpaceTimeField& u);

// Smooth partition of unity in |xi| with sum_k weight_k^2 = 1: piece 0 lives in
// B(0, 2), piece k in the annulus 2^{k-1} < |xi| < 2^{k+1}, and the last piece
// absorbs everything above 2^{kmax - 1}.
double littlewood_paley_weight(int k, double radius, int kmax) noexcept;
std::vector<SpectralField> littlewood_paley(const SpectralField& f, int kmax);

// (sum_xi (1 + |xi|^2)^s |fhat|^2 / L^dim)^{1/2}.
double sobolev_norm(const SpectralField& f, double s);

// (x, t) -> ((x + 2 t xi0) / M, t / M^2).
struct ParabolicMap {
  int dim = 1;
  Point xi0{0.0, 0.0};
  double M = 1.0;

  Point space(const Point& x, double t) const noexcept;
  double time(double t) const noexcept { return t / (M * M); }
  Point inverse_space(const Point& y, double r) const noexcept;
  double inverse_time(double r) const noexcept { return r * M * M; }
  // Ratio of L^p norms: ||u||_{L^p(D)} = norm_factor(p) ||e^{irLaplacian} g||_{L^p(image of D)}.
  double norm_factor(double p) const noexcept;
};

struct RescaledField {
  SpectralField g;
  ParabolicMap map;
};

// Requires supp fhat in B(xi0, 1/M) with xi0 a lattice frequency. The result
// lives on the grid with period L/M, scale R/M and the same nx, nt.
RescaledField parabolic_rescale(const SpectralField& f, const Point& xi0, double M);

// Independent complex Gaussian coefficients on the lattice frequencies of the
// ball, zero elsewhere.
SpectralField random_band_limited(const GridSpec& grid, std::mt19937_64& rng,
                                  const SupportBall& ball = {});

}  // namespace schro
