#include "schro/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>

#include "fft.hpp"
#include "json.hpp"
#include "schro/error.hpp"
#include "schro/parallel.hpp"
#include "schro/smooth.hpp"

namespace schro {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_grid(const WavePacketFrame& frame, const GridSpec& grid) {
  const bool same = frame.dim == grid.dim && std::abs(frame.R - grid.R) <= 1e-12 * grid.R &&
                    std::abs(frame.L - grid.L) <= 1e-12 * grid.L;
  require(same, ErrorCode::kScaleMismatch, "frame was built for a different grid");
}

// Wavenumbers (per axis) strictly inside the window around centre c, clipped to
// those representable on the grid.
std::pair<std::ptrdiff_t, std::ptrdiff_t> window_range(const WavePacketFrame& frame,
                                                       const GridSpec& grid, double c) {
  const double reach = frame.kappa * frame.theta_side;
  const double dk = grid.dk();
  auto lo = static_cast<std::ptrdiff_t>(std::floor((c - reach) / dk)) + 1;
  auto hi = static_cast<std::ptrdiff_t>(std::ceil((c + reach) / dk)) - 1;
  const auto n = static_cast<std::ptrdiff_t>(grid.nx);
  lo = std::max(lo, -(n / 2));
  hi = std::min(hi, (n - 1) / 2);
  return {lo, hi};
}

std::size_t fold(std::ptrdiff_t k, std::size_t m) {
  const auto mm = static_cast<std::ptrdiff_t>(m);
  return static_cast<std::size_t>(((k % mm) + mm) % mm);
}

// Visits every grid mode inside the window of theta: (grid slot, fold position, window value).
template <class F>
void for_window(const WavePacketFrame& frame, const GridSpec& grid, const LatticeIndex& theta,
                F&& visit) {
  const Point c = frame.theta_center(theta);
  const auto [lo0, hi0] = window_range(frame, grid, c[0]);
  const std::size_t m = frame.nu_count;
  if (grid.dim == 1) {
    for (auto k = lo0; k <= hi0; ++k) {
      const Point xi{grid.dk() * static_cast<double>(k), 0.0};
      const double w = frame.window(xi, c);
      if (w != 0.0) visit(grid.slot(k), fold(k, m), w);
    }
    return;
  }
  const auto [lo1, hi1] = window_range(frame, grid, c[1]);
  for (auto k0 = lo0; k0 <= hi0; ++k0)
    for (auto k1 = lo1; k1 <= hi1; ++k1) {
      const Point xi{grid.dk() * static_cast<double>(k0), grid.dk() * static_cast<double>(k1)};
      const double w = frame.window(xi, c);
      if (w != 0.0) visit(grid.slot(k0) * grid.nx + grid.slot(k1), fold(k0, m) * m + fold(k1, m), w);
    }
}

}  // namespace

WavePacketFrame WavePacketFrame::make(const GridSpec& grid, double kappa) {
  grid.validate();
  require(kappa > 0 && kappa <= 1, ErrorCode::kInvalidArgument, "kappa must lie in (0, 1]");
  WavePacketFrame f;
  f.dim = grid.dim;
  f.R = grid.R;
  f.L = grid.L;
  f.kappa = kappa;
  f.nu_count = static_cast<std::size_t>(std::max(1.0, std::round(grid.L / std::sqrt(grid.R))));
  f.nu_spacing = grid.L / static_cast<double>(f.nu_count);
  f.theta_side = 1.0 / f.nu_spacing;
  f.theta_spacing = 1.5 * kappa * f.theta_side;
  f.amplitude = std::pow(kTwoPi / f.theta_spacing, 0.5 * f.dim);
  f.c_kappa = std::pow(f.nu_spacing, f.dim) / (f.amplitude * f.amplitude);
  return f;
}

Point WavePacketFrame::theta_center(const LatticeIndex& i) const noexcept {
  return {theta_spacing * i[0], dim == 1 ? 0.0 : theta_spacing * i[1]};
}

Point WavePacketFrame::nu_center(const LatticeIndex& j) const noexcept {
  return {nu_spacing * j[0], dim == 1 ? 0.0 : nu_spacing * j[1]};
}

double WavePacketFrame::window(const Point& xi, const Point& c) const noexcept {
  const double half = 0.5 * kappa;
  double w = amplitude * plateau_bump((xi[0] - c[0]) / theta_side, half);
  if (dim == 2 && w != 0.0) w *= plateau_bump((xi[1] - c[1]) / theta_side, half);
  return w;
}

Tile make_tile(const WavePacketFrame& frame, const LatticeIndex& theta, const LatticeIndex& nu) {
  Tile t;
  t.dim = frame.dim;
  t.theta = theta;
  t.nu = nu;
  t.theta_center = frame.theta_center(theta);
  t.theta_side = frame.theta_side;
  t.nu_center = frame.nu_center(nu);
  t.nu_side = frame.nu_spacing;
  t.R = frame.R;
  return t;
}

Point Tube::axis(double t) const noexcept {
  return {tile.nu_center[0] - 2 * t * tile.theta_center[0],
          tile.dim == 1 ? 0.0 : tile.nu_center[1] - 2 * t * tile.theta_center[1]};
}

bool Tube::contains_dilated(const Point& x, double t, double factor) const noexcept {
  if (t < 0 || t > length) return false;
  const Point a = axis(t);
  const Point d{x[0] - a[0], tile.dim == 1 ? 0.0 : x[1] - a[1]};
  const double r = factor * radius;
  return norm_sq(d, tile.dim) <= r * r;
}

bool Tube::contains(const Point& x, double t) const noexcept { return contains_dilated(x, t, 1.0); }

std::array<double, 3> Tube::direction() const noexcept {
  return {-2 * tile.theta_center[0], tile.dim == 1 ? 0.0 : -2 * tile.theta_center[1], 1.0};
}

double Tube::angle_to_time_axis() const noexcept {
  const auto d = direction();
  return std::atan(std::hypot(d[0], d[1]));
}

Tube tube_of(const Tile& tile, double delta) {
  require(delta > 0 && delta < 0.5, ErrorCode::kInvalidArgument, "delta must lie in (0, 1/2)");
  Tube tube;
  tube.tile = tile;
  tube.delta = delta;
  tube.radius = std::pow(tile.R, 0.5 + delta);
  tube.length = tile.R;
  return tube;
}

SpectralField packet_field(const WavePacketFrame& frame, const GridSpec& grid,
                           const LatticeIndex& theta, const LatticeIndex& nu) {
  check_grid(frame, grid);
  SpectralField f(grid);
  const Point c = frame.nu_center(nu);
  for_window(frame, grid, theta, [&](std::size_t slot, std::size_t, double w) {
    f[slot] = w * std::polar(1.0, -dot(grid.frequency(slot), c, grid.dim));
  });
  f.support = {frame.theta_center(theta), std::sqrt(double(grid.dim)) * frame.kappa * frame.theta_side};
  return f;
}

CoefficientSet::CoefficientSet(WavePacketFrame frame, GridSpec grid)
    : frame_(std::move(frame)), grid_(std::move(grid)) {}

std::size_t CoefficientSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [theta, b] : blocks_)
    n += static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](cplx c) { return c != cplx{}; }));
  return n;
}

double CoefficientSet::l2_mass() const noexcept {
  double acc = 0.0;
  for (const auto& [theta, b] : blocks_)
    for (const cplx& c : b) acc += std::norm(c);
  return acc;
}

LatticeIndex CoefficientSet::nu_index(std::size_t p) const noexcept {
  const auto m = static_cast<std::ptrdiff_t>(frame_.nu_count);
  auto wrap = [m](std::ptrdiff_t q) { return static_cast<int>(q <= (m - 1) / 2 ? q : q - m); };
  if (frame_.dim == 1) return {wrap(static_cast<std::ptrdiff_t>(p)), 0};
  return {wrap(static_cast<std::ptrdiff_t>(p) / m), wrap(static_cast<std::ptrdiff_t>(p) % m)};
}

std::size_t CoefficientSet::block_position(const LatticeIndex& nu) const noexcept {
  const std::size_t m = frame_.nu_count;
  if (frame_.dim == 1) return fold(nu[0], m);
  return fold(nu[0], m) * m + fold(nu[1], m);
}

std::vector<cplx>& CoefficientSet::block(const LatticeIndex& theta) {
  auto& b = blocks_[theta];
  if (b.empty()) b.assign(frame_.dim == 1 ? frame_.nu_count : frame_.nu_count * frame_.nu_count, cplx{});
  return b;
}

cplx CoefficientSet::at(const LatticeIndex& theta, const LatticeIndex& nu) const {
  const auto it = blocks_.find(theta);
  if (it == blocks_.end()) return {};
  return it->second[block_position(nu)];
}

void CoefficientSet::for_each(const std::function<void(const Tile&, cplx)>& visit) const {
  for (const auto& [theta, b] : blocks_)
    for (std::size_t p = 0; p < b.size(); ++p)
      if (b[p] != cplx{}) visit(make_tile(frame_, theta, nu_index(p)), b[p]);
}

CoefficientSet CoefficientSet::filtered(const std::function<bool(const Tile&)>& keep) const {
  CoefficientSet out(frame_, grid_);
  for (const auto& [theta, b] : blocks_) {
    std::vector<cplx> kept(b.size());
    bool any = false;
    for (std::size_t p = 0; p < b.size(); ++p)
      if (b[p] != cplx{} && keep(make_tile(frame_, theta, nu_index(p)))) {
        kept[p] = b[p];
        any = true;
      }
    if (any) out.blocks_.emplace(theta, std::move(kept));
  }
  return out;
}

CoefficientSet& CoefficientSet::operator+=(const CoefficientSet& other) {
  check_grid(frame_, other.grid_);
  require(frame_.kappa == other.frame_.kappa, ErrorCode::kScaleMismatch, "frames differ");
  for (const auto& [theta, b] : other.blocks_) {
    auto& mine = block(theta);
    for (std::size_t p = 0; p < b.size(); ++p) mine[p] += b[p];
  }
  dropped_mass_ += other.dropped_mass_;
  return *this;
}

CoefficientSet decompose(const SpectralField& f, const WavePacketFrame& frame) {
  const GridSpec& grid = f.grid();
  check_grid(frame, grid);
  CoefficientSet out(frame, grid);

  std::set<LatticeIndex> touched;
  const double reach = frame.kappa * frame.theta_side;
  const double s = frame.theta_spacing;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] == cplx{}) continue;
    const Point xi = grid.frequency(k);
    std::array<int, 2> lo{0, 0}, hi{0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = static_cast<int>(std::floor((xi[a] - reach) / s)) + 1;
      hi[a] = static_cast<int>(std::ceil((xi[a] + reach) / s)) - 1;
    }
    for (int i0 = lo[0]; i0 <= hi[0]; ++i0)
      for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
        if (frame.window(xi, frame.theta_center({i0, i1})) != 0.0) touched.insert({i0, i1});
  }
  if (touched.empty()) return out;

  const std::vector<LatticeIndex> thetas(touched.begin(), touched.end());
  std::vector<std::vector<cplx>> blocks(thetas.size());
  const double scale = 1.0 / std::pow(grid.L, grid.dim);
  parallel_for(thetas.size(), [&](std::size_t i) {
    auto& fft = detail::cached_fft(grid.dim, frame.nu_count);
    auto buf = fft.data();
    std::fill(buf.begin(), buf.end(), cplx{});
    for_window(frame, grid, thetas[i], [&](std::size_t slot, std::size_t pos, double w) {
      buf[pos] += f[slot] * w;
    });
    fft.backward();
    blocks[i].assign(buf.begin(), buf.end());
    for (auto& c : blocks[i]) c *= scale;
  });

  const double floor = 1e-14 * f.l2_norm();
  double dropped = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    bool any = false;
    for (auto& c : blocks[i]) {
      if (std::abs(c) < floor) {
        dropped += std::norm(c);
        c = {};
      } else {
        any = true;
      }
    }
    if (any) out.block(thetas[i]) = std::move(blocks[i]);
  }
  out.add_dropped_mass(dropped);
  return out;
}

SpectralField reconstruct(const CoefficientSet& coeffs) {
  const GridSpec& grid = coeffs.grid();
  const WavePacketFrame& frame = coeffs.frame();
  SpectralField out(grid);
  for (const auto& [theta, b] : coeffs.blocks()) {
    auto& fft = detail::cached_fft(grid.dim, frame.nu_count);
    auto buf = fft.data();
    std::copy(b.begin(), b.end(), buf.begin());
    fft.forward();
    for_window(frame, grid, theta, [&](std::size_t slot, std::size_t pos, double w) {
      out[slot] += frame.c_kappa * w * buf[pos];
    });
  }
  return out;
}

void write_json_lines(std::ostream& os, const CoefficientSet& coeffs) {
  const int dim = coeffs.frame().dim;
  coeffs.for_each([&](const Tile& t, cplx c) {
    auto pt = [dim](const Point& p) {
      return dim == 1 ? nlohmann::json::array({p[0]}) : nlohmann::json::array({p[0], p[1]});
    };
    nlohmann::json j{{"theta_center", pt(t.theta_center)},
                     {"nu_center", pt(t.nu_center)},
                     {"R", t.R},
                     {"re", c.real()},
                     {"im", c.imag()}};
    os << j.dump() << '\n';
  });
}

double calibrate_c_kappa(const WavePacketFrame& frame, const SpectralField& reference) {
  WavePacketFrame raw = frame;
  raw.c_kappa = 1.0;
  const SpectralField s = reconstruct(decompose(reference, raw));
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    num += (std::conj(s[k]) * reference[k]).real();
    den += std::norm(s[k]);
  }
  require(den > 0, ErrorCode::kDegenerateInput, "reference field is zero");
  return num / den;
}

TubeLocalization tube_mass_fraction(const Tile& tile, const WavePacketFrame& frame,
                                    const GridSpec& grid, double delta) {
  const SpectralField psi = packet_field(frame, grid, tile.theta, tile.nu);
  const Tube tube = tube_of(tile, delta);
  const auto times = grid.time_samples();
  const auto wt = time_weights(times);
  const double r2 = grid.R * grid.R;
  std::vector<Point> points(grid.spatial_size());
  for (std::size_t x = 0; x < points.size(); ++x) points[x] = grid.point(x);

  SlicePropagator prop(psi);
  double inside = 0.0, total = 0.0, exterior = 0.0;
  for (std::size_t m = 0; m < times.size(); ++m) {
    const auto slice = prop.at(times[m]);
    const double cut = time_cutoff(times[m] / grid.R);
    for (std::size_t x = 0; x < points.size(); ++x) {
      if (norm_sq(points[x], grid.dim) > r2) continue;
      const double v = std::norm(slice[x]) * wt[m];
      total += v;
      if (tube.contains(points[x], times[m])) inside += v;
      if (!tube.contains_dilated(points[x], times[m], 2.0))
        exterior = std::max(exterior, std::abs(slice[x]) * cut);
    }
  }
  return {total > 0 ? inside / total : 0.0, exterior, psi.l2_norm()};
}

double frequency_cap_check(const Tile& tile, const WavePacketFrame& frame, const GridSpec& grid,
                           double C, double enlarge) {
  check_grid(frame, grid);
  require(C > 0 && enlarge >= 1, ErrorCode::kInvalidArgument, "need C > 0 and enlarge >= 1");
  const double R = grid.R;
  // The cutoff is negligible outside |t/R - 1/2| <= 48; dt = 1 resolves |tau| < pi.
  const double half_span = 48.0;
  const double dt = 1.0;
  const auto n = static_cast<std::size_t>(std::ceil(2 * half_span * R / dt));
  const double t0 = (0.5 - half_span) * R;
  std::vector<double> cutoff(n);
  for (std::size_t j = 0; j < n; ++j) cutoff[j] = time_cutoff((t0 + dt * j) / R);

  detail::Fft fft(1, n);
  const double half_side = 0.5 * enlarge * tile.theta_side;
  const double band = enlarge * C / R;
  double inside = 0.0, total = 0.0;
  for_window(frame, grid, tile.theta, [&](std::size_t slot, std::size_t, double w) {
    const Point xi = grid.frequency(slot);
    const double symbol = norm_sq(xi, grid.dim);
    auto buf = fft.data();
    for (std::size_t j = 0; j < n; ++j) buf[j] = std::polar(cutoff[j], symbol * (t0 + dt * j));
    fft.forward();
    bool in_theta = std::abs(xi[0] - tile.theta_center[0]) <= half_side;
    if (grid.dim == 2) in_theta = in_theta && std::abs(xi[1] - tile.theta_center[1]) <= half_side;
    for (std::size_t j = 0; j < n; ++j) {
      const auto q = static_cast<std::ptrdiff_t>(j);
      const auto signed_j = q <= static_cast<std::ptrdiff_t>(n - 1) / 2 ? q : q - static_cast<std::ptrdiff_t>(n);
      const double tau = kTwoPi * static_cast<double>(signed_j) / (static_cast<double>(n) * dt);
      const double mass = w * w * std::norm(buf[j]);
      total += mass;
      if (in_theta && std::abs(tau - symbol) <= band) inside += mass;
    }
  });
  return total > 0 ? inside / total : 0.0;
}

}  // namespace schro
