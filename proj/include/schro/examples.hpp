#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "schro/field.hpp"
#include "schro/fit.hpp"
#include "schro/refined.hpp"
#include "schro/wavepacket.hpp"

namespace schro {

// sigma Gaussian packets with frequency centre 0, focused at t = R/2, whose
// R^{1/2} x R rectangles are spread evenly over [-R, R] x [0, R].
struct PacketSpreadExample {
  std::size_t sigma = 0;
  double R = 0.0;
  SpectralField g;
  std::vector<Tube> tubes;  // radius R^{1/2}/2
  CubeUnion Y;              // one cube per strip per packet
  double inner_variation = 0.0;  // max over tubes of max/min |u| within R^{1/2}/4 of the axis
};

// Throws TooManyPackets when sigma > R^{1/2}.
PacketSpreadExample build_packet_spread(std::size_t sigma, double R, std::uint64_t seed = 1);

// Number of (grid point, time sample) pairs lying in two or more tubes.
std::size_t shared_tube_points(const GridSpec& grid, std::span<const Tube> tubes);

struct SparseFocusingOptions {
  double spacing_factor = 0.75;  // frequency spacing = spacing_factor * R^{-1/4}
  double threshold = 0.5;       // X = unit squares reaching threshold * H
  double resolution = 0.5;      // sample spacing in x and t
};

using UnitSquare = std::array<int, 2>;  // lower corner (y, s)

struct SparseFocusingExample {
  double R = 0.0;
  SpectralField g;
  std::size_t frequencies = 0;
  double spacing = 0.0;
  std::vector<UnitSquare> X;
  double H = 0.0;              // largest sampled |e^{isLaplacian} g| on [0,R]^2
  double g_norm = 0.0;         // ||g||_{L^2([0,R])}
  std::size_t per_ball_density = 0;  // most squares of X in one R^{1/2} lattice square
  std::vector<float> square_max;  // per unit square, row s, column y

  double focusing_ratio() const { return H / g_norm; }
};

// g = sum of e^{i m a y} over |m a| <= 1 on the lattice a Z with a ~ R^{-1/4}.
// Requires R a power of 2 with R >= 256. Throws ConstructionDegenerate when
// |X| < R^{3/2}/16.
SparseFocusingExample build_sparse_focusing(double R, const SparseFocusingOptions& options = {});

struct ExperimentConfig {
  std::string name;
  std::vector<double> R;      // empty selects the experiment's default
  std::vector<double> sigma;  // sigma_law only
  std::vector<int> D;         // partition_balance, crossing_bound
  int trials = 0;             // 0 selects the default
  double M = 1.0;
  double epsilon = 0.22360679774997896;  // sqrt(0.05)
  double delta = 0.05;                   // epsilon^2
  double K = 16.0;
  std::uint64_t seed = 1;
  SparseFocusingOptions focusing;
};

struct ExperimentRow {
  double R = 0.0;
  double sigma_or_N = 0.0;
  double M = 1.0;
  double E = 1.0;
  double norm = 0.0;
  double ratio = 0.0;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();  // NaN without a fit
  nlohmann::json details;
};

struct LabelledFit {
  std::string label;
  ExponentFit fit;
};

struct ExperimentResult {
  std::string name;
  std::vector<ExperimentRow> rows;
  std::vector<LabelledFit> fits;
  nlohmann::json summary;
};

const std::vector<std::string>& experiment_names();

// Throws UnknownExperiment.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Header R,sigma_or_N,M,E,norm,ratio,fitted_slope; numbers printed with %.12g.
std::string to_csv(const ExperimentResult& result);

}  // namespace schro
