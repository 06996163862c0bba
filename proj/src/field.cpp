#include "schro/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "schro/error.hpp"
#include "schro/smooth.hpp"

namespace schro {

namespace {

// e^{2 pi i h k / nx} per slot, where h = nx/2 is the index of x = 0. This
// accounts for the grid starting at -L/2 rather than at 0.
std::vector<cplx> axis_shift(const GridSpec& g) {
  std::vector<cplx> s(g.nx);
  const double h = static_cast<double>(g.nx / 2);
  for (std::size_t j = 0; j < g.nx; ++j) {
    const double k = static_cast<double>(g.wavenumber(j));
    s[j] = std::polar(1.0, 2.0 * std::numbers::pi * h * k / static_cast<double>(g.nx));
  }
  return s;
}

cplx shift_at(const GridSpec& g, const std::vector<cplx>& s, std::size_t flat) {
  return g.dim == 1 ? s[flat] : s[flat / g.nx] * s[flat % g.nx];
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, what);
}

}  // namespace

SpectralField::SpectralField(GridSpec grid) : grid_(grid), coeffs_(grid.spatial_size()) {}

SpectralField SpectralField::from_samples(const GridSpec& grid, std::span<const cplx> samples) {
  require(samples.size() == grid.spatial_size(), ErrorCode::kInvalidArgument,
          "sample count does not match the grid");
  SpectralField f(grid);
  detail::Fft fft(grid.dim, grid.nx);
  std::copy(samples.begin(), samples.end(), fft.data().begin());
  fft.forward();
  const auto shift = axis_shift(grid);
  const double cell = std::pow(grid.dx(), grid.dim);
  auto d = fft.data();
  for (std::size_t k = 0; k < f.size(); ++k) f.coeffs_[k] = d[k] * shift_at(grid, shift, k) * cell;
  return f;
}

std::vector<cplx> SpectralField::samples() const {
  detail::Fft fft(grid_.dim, grid_.nx);
  const auto shift = axis_shift(grid_);
  const double scale = 1.0 / std::pow(grid_.L, grid_.dim);
  auto d = fft.data();
  for (std::size_t k = 0; k < size(); ++k)
    d[k] = coeffs_[k] * std::conj(shift_at(grid_, shift, k)) * scale;
  fft.backward();
  return {d.begin(), d.end()};
}

double SpectralField::l2_norm() const {
  double acc = 0.0;
  for (const auto& c : coeffs_) acc += std::norm(c);
  return std::sqrt(acc / std::pow(grid_.L, grid_.dim));
}

double SpectralField::spectral_radius() const {
  double r = 0.0;
  for (std::size_t k = 0; k < size(); ++k)
    if (coeffs_[k] != cplx{}) r = std::max(r, std::sqrt(norm_sq(frequency(k), grid_.dim)));
  return r;
}

double SpectralField::mass_outside(const SupportBall& ball) const {
  double acc = 0.0;
  const double r2 = ball.radius * ball.radius * (1 + 1e-12);
  for (std::size_t k = 0; k < size(); ++k) {
    const Point xi = frequency(k);
    const Point d{xi[0] - ball.center[0], xi[1] - ball.center[1]};
    if (norm_sq(d, grid_.dim) > r2) acc += std::norm(coeffs_[k]);
  }
  return acc / std::pow(grid_.L, grid_.dim);
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require(grid_ == other.grid_, ErrorCode::kScaleMismatch, "grids differ");
  for (std::size_t k = 0; k < size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require(grid_ == other.grid_, ErrorCode::kScaleMismatch, "grids differ");
  for (std::size_t k = 0; k < size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpaceTimeField::SpaceTimeField(GridSpec grid, std::vector<double> times)
    : grid_(grid), times_(std::move(times)), values_(grid.spatial_size() * times_.size()) {}

Region::Region(std::size_t num_points, std::size_t num_times, bool fill)
    : num_points_(num_points), num_times_(num_times),
      mask_(num_points * num_times, fill ? 1 : 0) {}

Region Region::from_predicate(const GridSpec& grid, std::span<const double> times,
                              const std::function<bool(const Point&, double)>& pred) {
  Region r(grid.spatial_size(), times.size());
  for (std::size_t m = 0; m < times.size(); ++m)
    for (std::size_t x = 0; x < r.num_points_; ++x)
      r.mask_[m * r.num_points_ + x] = pred(grid.point(x), times[m]) ? 1 : 0;
  return r;
}

Region Region::full_box(const GridSpec& grid, std::span<const double> times) {
  const double r2 = grid.R * grid.R * (1 + 1e-12);
  const double R = grid.R;
  const int dim = grid.dim;
  return from_predicate(grid, times, [=](const Point& x, double t) {
    return norm_sq(x, dim) <= r2 && t >= -1e-12 * R && t <= R * (1 + 1e-12);
  });
}

Region Region::everything(const GridSpec& grid, std::span<const double> times) {
  return Region(grid.spatial_size(), times.size(), true);
}

std::size_t Region::count() const noexcept {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

Region& Region::operator&=(const Region& other) {
  require(mask_.size() == other.mask_.size(), ErrorCode::kInvalidArgument, "region shapes differ");
  for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] &= other.mask_[i];
  return *this;
}

Region& Region::operator|=(const Region& other) {
  require(mask_.size() == other.mask_.size(), ErrorCode::kInvalidArgument, "region shapes differ");
  for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] |= other.mask_[i];
  return *this;
}

Region& Region::subtract(const Region& other) {
  require(mask_.size() == other.mask_.size(), ErrorCode::kInvalidArgument, "region shapes differ");
  for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] &= static_cast<std::uint8_t>(!other.mask_[i]);
  return *this;
}

struct SlicePropagator::Impl {
  GridSpec grid;
  std::vector<cplx> base;
  std::vector<double> symbol;
  detail::Fft fft;

  explicit Impl(const SpectralField& f) : grid(f.grid()), fft(grid.dim, grid.nx) {
    const auto shift = axis_shift(grid);
    const double scale = 1.0 / std::pow(grid.L, grid.dim);
    base.resize(f.size());
    symbol.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      base[k] = f[k] * std::conj(shift_at(grid, shift, k)) * scale;
      symbol[k] = norm_sq(grid.frequency(k), grid.dim);
    }
  }
};

SlicePropagator::SlicePropagator(const SpectralField& f) : impl_(std::make_unique<Impl>(f)) {}
SlicePropagator::~SlicePropagator() = default;

std::span<const cplx> SlicePropagator::at(double t) {
  auto d = impl_->fft.data();
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = impl_->base[k] == cplx{} ? cplx{} : impl_->base[k] * std::polar(1.0, t * impl_->symbol[k]);
  impl_->fft.backward();
  return d;
}

SpaceTimeField propagate(const SpectralField& f, std::span<const double> times) {
  SpaceTimeField u(f.grid(), {times.begin(), times.end()});
  SlicePropagator prop(f);
  for (std::size_t m = 0; m < times.size(); ++m) {
    const auto s = prop.at(times[m]);
    std::copy(s.begin(), s.end(), u.slice(m).begin());
  }
  return u;
}

SpaceTimeField propagate(const SpectralField& f) { return propagate(f, f.grid().time_samples()); }

double mixed_norm(const SpaceTimeField& u, const MixedNormParams& params) {
  require(params.p > 0 && params.q > 0, ErrorCode::kInvalidArgument, "exponents must be positive");
  const Region region = params.region ? *params.region : Region::full_box(u.grid(), u.times());
  require(region.num_points() == u.num_points() && region.num_times() == u.num_times(),
          ErrorCode::kInvalidArgument, "region does not match the field");
  require(region.count() > 0, ErrorCode::kEmptyRegion, "region has no sample points");

  const std::size_t np = u.num_points();
  const auto wt = time_weights(u.times());
  const double wx = std::pow(u.grid().dx(), u.grid().dim);

  std::vector<double> peak(np, -1.0);
  for (std::size_t m = 0; m < u.num_times(); ++m) {
    const auto s = u.slice(m);
    for (std::size_t x = 0; x < np; ++x) {
      if (!region.contains(x, m)) continue;
      const double a = std::abs(s[x]);
      check_finite(a, "field value is not finite");
      peak[x] = std::max(peak[x], a);
    }
  }

  std::vector<double> inner = peak;
  if (std::isfinite(params.q)) {
    std::vector<double> acc(np, 0.0);
    for (std::size_t m = 0; m < u.num_times(); ++m) {
      const auto s = u.slice(m);
      for (std::size_t x = 0; x < np; ++x)
        if (region.contains(x, m) && peak[x] > 0)
          acc[x] += wt[m] * std::pow(std::abs(s[x]) / peak[x], params.q);
    }
    for (std::size_t x = 0; x < np; ++x)
      if (peak[x] > 0) inner[x] = peak[x] * std::pow(acc[x], 1.0 / params.q);
  }

  double top = 0.0;
  for (double v : inner) top = std::max(top, v);
  if (!std::isfinite(params.p) || top == 0.0) return top;
  double acc = 0.0;
  for (double v : inner)
    if (v > 0) acc += wx * std::pow(v / top, params.p);
  const double out = top * std::pow(acc, 1.0 / params.p);
  check_finite(out, "norm is not finite");
  return out;
}

double region_power_sum(const SpectralField& f, std::span<const double> times,
                        const Region& region, double p) {
  require(region.num_points() == f.grid().spatial_size() && region.num_times() == times.size(),
          ErrorCode::kInvalidArgument, "region does not match the field");
  const auto wt = time_weights(times);
  const double wx = std::pow(f.grid().dx(), f.grid().dim);
  SlicePropagator prop(f);
  double acc = 0.0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    const auto s = prop.at(times[m]);
    double slice = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x)
      if (region.contains(x, m)) slice += std::pow(std::abs(s[x]), p);
    acc += wt[m] * wx * slice;
  }
  check_finite(acc, "power sum is not finite");
  return acc;
}

std::vector<double> maximal_function(const SpaceTimeField& u) {
  std::vector<double> out(u.num_points(), 0.0);
  for (std::size_t m = 0; m < u.num_times(); ++m) {
    const auto s = u.slice(m);
    for (std::size_t x = 0; x < out.size(); ++x) {
      const double a = std::abs(s[x]);
      check_finite(a, "field value is not finite");
      out[x] = std::max(out[x], a);
    }
  }
  return out;
}

double littlewood_paley_weight(int k, double radius, int kmax) noexcept {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  auto lift = [&](int j) { return smooth_step(radius / std::ldexp(1.0, j) - 1.0); };
  auto down = [&](int j) {
    const double s = lift(j);
    return s >= 1.0 ? 0.0 : std::cos(half_pi * s);
  };
  if (k < 0 || k > kmax) return 0.0;
  if (kmax == 0) return 1.0;
  if (k == 0) return down(0);
  const double up = std::sin(half_pi * lift(k - 1));
  return k == kmax ? up : up * down(k);
}

std::vector<SpectralField> littlewood_paley(const SpectralField& f, int kmax) {
  require(kmax >= 0, ErrorCode::kInvalidArgument, "kmax must be non-negative");
  require(f.grid().nyquist() >= std::ldexp(1.0, kmax) * (1 - 1e-12), ErrorCode::kGridTooCoarse,
          "grid does not resolve frequency band 2^" + std::to_string(kmax));
  std::vector<SpectralField> pieces;
  pieces.reserve(kmax + 1);
  const int dim = f.grid().dim;
  for (int k = 0; k <= kmax; ++k) {
    SpectralField piece(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double r = std::sqrt(norm_sq(f.frequency(i), dim));
      piece[i] = f[i] * littlewood_paley_weight(k, r, kmax);
    }
    piece.support = k == 0 ? SupportBall{{0, 0}, 2.0} : SupportBall{{0, 0}, std::ldexp(1.0, k + 1)};
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

double sobolev_norm(const SpectralField& f, double s) {
  double acc = 0.0;
  const int dim = f.grid().dim;
  for (std::size_t k = 0; k < f.size(); ++k)
    acc += std::pow(1.0 + norm_sq(f.frequency(k), dim), s) * std::norm(f[k]);
  return std::sqrt(acc / std::pow(f.grid().L, dim));
}

Point ParabolicMap::space(const Point& x, double t) const noexcept {
  return {(x[0] + 2 * t * xi0[0]) / M, dim == 1 ? 0.0 : (x[1] + 2 * t * xi0[1]) / M};
}

Point ParabolicMap::inverse_space(const Point& y, double r) const noexcept {
  const double t = inverse_time(r);
  return {y[0] * M - 2 * t * xi0[0], dim == 1 ? 0.0 : y[1] * M - 2 * t * xi0[1]};
}

double ParabolicMap::norm_factor(double p) const noexcept {
  const double n = dim;
  return std::pow(M, (n + 2) / p - n / 2);
}

RescaledField parabolic_rescale(const SpectralField& f, const Point& xi0, double M) {
  const GridSpec& g = f.grid();
  require(std::isfinite(M) && M >= 1.0, ErrorCode::kInvalidArgument, "M must be at least 1");
  std::array<std::ptrdiff_t, 2> k0{0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double k = xi0[a] / g.dk();
    k0[a] = static_cast<std::ptrdiff_t>(std::llround(k));
    require(std::abs(k - static_cast<double>(k0[a])) <= 1e-9, ErrorCode::kInvalidArgument,
            "xi0 must be a lattice frequency");
  }
  const SupportBall ball{xi0, 1.0 / M};
  const double total = f.l2_norm();
  require(f.mass_outside(ball) <= 1e-16 * total * total, ErrorCode::kBadSupport,
          "spectrum is not contained in B(xi0, 1/M)");

  GridSpec h = g;
  h.R = g.R / M;
  h.L = g.L / M;
  RescaledField out{SpectralField(h), ParabolicMap{g.dim, xi0, M}};
  out.g.support = SupportBall{{0, 0}, 1.0};
  const double amp = std::pow(M, -0.5 * g.dim);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] == cplx{}) continue;
    std::size_t slot;
    if (g.dim == 1) {
      slot = h.slot(g.wavenumber(k) - k0[0]);
    } else {
      slot = h.slot(g.wavenumber(k / g.nx) - k0[0]) * h.nx + h.slot(g.wavenumber(k % g.nx) - k0[1]);
    }
    out.g[slot] = amp * f[k];
  }
  return out;
}

SpectralField random_band_limited(const GridSpec& grid, std::mt19937_64& rng,
                                  const SupportBall& ball) {
  SpectralField f(grid);
  std::normal_distribution<double> normal;
  const double r2 = ball.radius * ball.radius;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Point xi = f.frequency(k);
    const Point d{xi[0] - ball.center[0], xi[1] - ball.center[1]};
    if (norm_sq(d, grid.dim) > r2) continue;
    const double re = normal(rng);
    const double im = normal(rng);
    f[k] = {re, im};
  }
  const double n = f.l2_norm();
  if (n > 0) f *= 1.0 / n;
  f.support = ball;
  return f;
}

}  // namespace schro
