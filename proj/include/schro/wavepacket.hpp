#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "schro/field.hpp"

namespace schro {

using LatticeIndex = std::array<int, 2>;

// Single-scale tight frame of wave packets phi_{theta,nu} at scale R.
//
// Frequency tiles theta have side R^{-1/2}; the window on a tile is a product
// of plateau bumps of half-width kappa R^{-1/2} per axis, centred on a lattice of
// spacing 1.5 kappa R^{-1/2} so that the squared windows sum to a constant.
// Spatial centres nu form the lattice of spacing ~R^{1/2} that divides the
// period. Then f = c_kappa * sum <f, phi_{theta,nu}> phi_{theta,nu} exactly.
struct WavePacketFrame {
  int dim = 1;
  double R = 1.0;
  double L = 4.0;
  double kappa = 0.125;
  double nu_spacing = 1.0;
  double theta_side = 1.0;
  double theta_spacing = 1.0;
  std::size_t nu_count = 1;  // nu lattice points per axis
  double amplitude = 1.0;    // chosen so that ||phi_theta||_2 = 1 in the continuum
  double c_kappa = 1.0;

  static WavePacketFrame make(const GridSpec& grid, double kappa = 0.125);

  Point theta_center(const LatticeIndex& i) const noexcept;
  Point nu_center(const LatticeIndex& j) const noexcept;
  // Real window phi_theta-hat(xi), including the amplitude.
  double window(const Point& xi, const Point& theta_center) const noexcept;
  // Tight frame bound: sum |<f, phi>|^2 = ||f||^2 / c_kappa.
  double frame_bound() const noexcept { return 1.0 / c_kappa; }
};

struct Tile {
  int dim = 1;
  LatticeIndex theta{0, 0};
  LatticeIndex nu{0, 0};
  Point theta_center{0, 0};
  double theta_side = 1.0;
  Point nu_center{0, 0};
  double nu_side = 1.0;
  double R = 1.0;
};

Tile make_tile(const WavePacketFrame& frame, const LatticeIndex& theta, const LatticeIndex& nu);

struct Tube {
  Tile tile;
  double delta = 0.05;
  double radius = 1.0;
  double length = 1.0;

  // Axis point at time t: c(nu) - 2 t c(theta).
  Point axis(double t) const noexcept;
  bool contains(const Point& x, double t) const noexcept;
  // Membership in the tube dilated by `factor` about its axis (same time span).
  bool contains_dilated(const Point& x, double t, double factor) const noexcept;
  // Direction (-2 c(theta), 1) as (x1, x2, t); x2 is zero when dim == 1.
  std::array<double, 3> direction() const noexcept;
  double angle_to_time_axis() const noexcept;
};

Tube tube_of(const Tile& tile, double delta);

// phi_{theta,nu} as a spectral field on the grid.
SpectralField packet_field(const WavePacketFrame& frame, const GridSpec& grid,
                           const LatticeIndex& theta, const LatticeIndex& nu);

class CoefficientSet {
 public:
  CoefficientSet(WavePacketFrame frame, GridSpec grid);

  const WavePacketFrame& frame() const noexcept { return frame_; }
  const GridSpec& grid() const noexcept { return grid_; }

  // Number of nonzero coefficients.
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  double l2_mass() const noexcept;
  // Squared magnitude of coefficients dropped as negligible.
  double dropped_mass() const noexcept { return dropped_mass_; }

  cplx at(const LatticeIndex& theta, const LatticeIndex& nu) const;
  void for_each(const std::function<void(const Tile&, cplx)>& visit) const;
  CoefficientSet filtered(const std::function<bool(const Tile&)>& keep) const;
  CoefficientSet& operator+=(const CoefficientSet& other);

  // Dense per-theta blocks of nu coefficients (nu_count^dim each, row-major).
  const std::map<LatticeIndex, std::vector<cplx>>& blocks() const noexcept { return blocks_; }
  std::vector<cplx>& block(const LatticeIndex& theta);
  void add_dropped_mass(double m) noexcept { dropped_mass_ += m; }

  // Index of the nu lattice point stored at position p of a block.
  LatticeIndex nu_index(std::size_t p) const noexcept;
  std::size_t block_position(const LatticeIndex& nu) const noexcept;

 private:
  WavePacketFrame frame_;
  GridSpec grid_;
  std::map<LatticeIndex, std::vector<cplx>> blocks_;
  double dropped_mass_ = 0.0;
};

// <f, phi_{theta,nu}> for every tile whose window meets supp fhat. Throws
// ScaleMismatch if the frame was built for a different grid.
CoefficientSet decompose(const SpectralField& f, const WavePacketFrame& frame);

// c_kappa * sum coeff * phi_{theta,nu}.
SpectralField reconstruct(const CoefficientSet& coeffs);

// One record per nonzero tile: {theta_center, nu_center, R, re, im}.
void write_json_lines(std::ostream& os, const CoefficientSet& coeffs);

// c minimizing ||c * S f - f|| where S is synthesis after analysis without the
// normalization constant.
double calibrate_c_kappa(const WavePacketFrame& frame, const SpectralField& reference);

struct TubeLocalization {
  double fraction = 0.0;       // share of |psi|^2 over B_R x [0,R] inside the tube
  double exterior_max = 0.0;   // max |psi*| on B_R x [0,R] outside the doubled tube
  double packet_norm = 0.0;    // ||phi_{theta,nu}||_2
};

TubeLocalization tube_mass_fraction(const Tile& tile, const WavePacketFrame& frame,
                                    const GridSpec& grid, double delta);

// Share of the space-time Fourier mass of psi* = psi(x,t) * cutoff(t/R) lying in
// {xi in enlarge * theta, |tau - |xi|^2| <= enlarge * C / R}.
double frequency_cap_check(const Tile& tile, const WavePacketFrame& frame, const GridSpec& grid,
                           double C = 4.0, double enlarge = 1.0);

}  // namespace schro
