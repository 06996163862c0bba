#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "schro/field.hpp"
#include "schro/polynomial.hpp"
#include "schro/wavepacket.hpp"

namespace schro {

// Regular lattice over a space-time box: the same coordinate list on every
// spatial axis and an increasing list of times. Points are indexed time-major,
// index = m * spatial_size() + x, matching SpaceTimeField.
struct SpaceTimeLattice {
  int dim = 1;
  std::vector<double> axis;
  std::vector<double> times;
  std::vector<double> time_weight;
  double spatial_weight = 1.0;  // volume of one spatial cell

  // Cell-centred lattice of nx points per spatial axis on [-R, R] and nt times on [0, R].
  static SpaceTimeLattice uniform(int dim, double R, std::size_t nx, std::size_t nt);

  std::size_t spatial_size() const noexcept { return dim == 1 ? axis.size() : axis.size() * axis.size(); }
  std::size_t size() const noexcept { return spatial_size() * times.size(); }
  STPoint point(std::size_t index) const noexcept;
};

// Nonnegative space-time density W on a lattice.
struct MassField {
  SpaceTimeLattice lattice;
  std::vector<double> values;

  // ||chi_S W||_{L^1_x L^r_t} for the lattice points selected by `members`
  // (all points when empty).
  double mixed_mass(double r, std::span<const std::uint8_t> members = {}) const;
};

// |u|^p restricted to |x_i| <= R and the region (if given), subsampled by the
// given strides in space and time.
MassField mass_from_field(const SpaceTimeField& u, double p, const Region* region = nullptr,
                          std::size_t space_stride = 1, std::size_t time_stride = 1);

struct PartitionPolynomial {
  int dim = 1;
  int D = 1;  // degree budget
  std::vector<Polynomial> factors;

  int degree() const noexcept;
  double operator()(const STPoint& z) const noexcept;
  // Bit k set when factor k is positive; nullopt when some factor is within the
  // tie tolerance of zero.
  std::optional<unsigned> cell_of(const STPoint& z) const noexcept;
  nlohmann::json to_json() const;
};

struct BisectionOptions {
  double tol = 1e-3;
  int restarts = 64;
  std::uint64_t seed = 1;
  double singular_gradient = 1e-8;
  std::vector<Polynomial> avoid;  // factors the result must differ from
};

// Sparse weight on a shared lattice.
struct LatticeWeight {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};

struct BisectionResult {
  Polynomial factor;
  std::vector<double> residuals;  // G_j / mass_j with the hard indicator
  int restarts_used = 0;
};

// Finds a polynomial of degree <= degree on the unit coefficient sphere that
// bisects every weight in L^1_x L^r_t to relative tolerance tol.
// Throws BisectionNotFound after options.restarts failed starts.
BisectionResult ham_sandwich_bisect(const SpaceTimeLattice& lattice,
                                    std::span<const LatticeWeight> weights, int degree, double r,
                                    const Chart& chart, const BisectionOptions& options = {});

struct Cell {
  unsigned sign_vector = 0;  // bit k set where factor k > 0
  double mass = 0.0;
  std::vector<std::uint8_t> mask;  // lattice points belonging to the cell

  // [start, length] runs of member indices.
  nlohmann::json run_length_mask() const;
};

struct PartitionResult {
  PartitionPolynomial polynomial;
  std::vector<Cell> cells;
  int steps = 0;
  double total_mass = 0.0;
  double tie_mass = 0.0;  // mass on lattice points lying on the zero set (r = 1 accounting)
  std::vector<std::vector<double>> residuals;
};

// Number of bisection steps whose factor degrees fit in D.
int partition_steps(int dim, int D);
// Degree of the factor used at step k (1-based): the least d whose basis has at
// least 2^{k-1} + 2 monomials.
int factor_degree(int dim, int step);

struct PartitionOptions {
  BisectionOptions bisection;
  std::optional<int> steps;  // overrides partition_steps(dim, D)
};

PartitionResult polynomial_partition(const MassField& W, int D, double r, double R,
                                     const PartitionOptions& options = {});

struct Line {
  STPoint origin{0, 0, 0};
  STPoint direction{0, 0, 1};
};

struct Box {
  STPoint lo{0, 0, 0};
  STPoint hi{0, 0, 0};
  static Box for_scale(int dim, double R);
  bool contains(const STPoint& z) const noexcept;
};

struct LineCrossing {
  std::size_t cells = 0;
  std::vector<double> crossings;  // line parameters of the sign changes
  std::vector<unsigned> sign_vectors;
  bool degenerate = false;  // some factor vanishes identically on the line
  std::vector<int> degenerate_factors;
};

LineCrossing cells_entered_by_line(const PartitionPolynomial& P, const Line& line, const Box& box);

struct ZeroSample {
  STPoint z{0, 0, 0};
  int factor = 0;
};

// Points of Z(P) sampled on the edges of a lattice over the box of given spacing.
std::vector<ZeroSample> sample_zero_set(const PartitionPolynomial& P, const Box& box, double spacing);

class Wall {
 public:
  Wall(PartitionPolynomial P, Box box, double width, double resolution, std::vector<ZeroSample> zeros);

  const PartitionPolynomial& polynomial() const noexcept { return P_; }
  const Box& box() const noexcept { return box_; }
  double width() const noexcept { return width_; }
  double resolution() const noexcept { return resolution_; }
  const std::vector<ZeroSample>& zeros() const noexcept { return zeros_; }

  // Distance to the nearest sampled zero if it is <= limit, otherwise +inf.
  double distance_within(const STPoint& z, double limit) const;
  double distance(const STPoint& z) const;
  bool contains(const STPoint& z) const;
  // Lattice points of B(0,R) x [0,R] within the wall width of the zero set.
  std::vector<std::uint8_t> mask(const SpaceTimeLattice& lattice, double R) const;

 private:
  PartitionPolynomial P_;
  Box box_;
  double width_;
  double resolution_;
  std::vector<ZeroSample> zeros_;
  double bucket_;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::vector<std::uint32_t>> buckets_;

  std::array<int, 3> bucket_of(const STPoint& z) const noexcept;
};

// Wall of width R^{1/2+delta}; zeros sampled at spacing width/8.
Wall wall_region(const PartitionPolynomial& P, double R, double delta);

struct IncidenceReport {
  std::vector<std::vector<unsigned>> cells;  // per tube, sorted distinct cell ids
  std::size_t max_cells = 0;
  std::size_t violations = 0;  // tubes entering more than deg(P) + 1 cells
};

// Cells O'_i = (O_i cap B*_R) minus the wall entered by each tube's central line.
IncidenceReport tube_cell_incidence(std::span<const Tube> tubes, const Wall& wall);

struct BudgetReport {
  std::vector<double> cell_mass;  // ||f_i||_2^2 per cell id
  double sum = 0.0;
  double total = 0.0;  // ||f||_2^2
  double ratio = 0.0;  // sum / (D * total)
};

// f_i = c_kappa * sum of packets whose tube enters cell i. tubes[j] must come
// from the coefficient set (see tubes_of).
BudgetReport orthogonality_budget(const CoefficientSet& coeffs, std::span<const Tube> tubes,
                                  const IncidenceReport& incidence, int D, unsigned num_cells);

std::vector<Tube> tubes_of(const CoefficientSet& coeffs, double delta);

enum class Tangency { kTangent, kTransverse, kDisjoint };
const char* to_string(Tangency t) noexcept;

struct Ball {
  STPoint center{0, 0, 0};
  double radius = 1.0;
  int id = 0;
};

struct TangencyResult {
  Tangency label = Tangency::kDisjoint;
  int ball_id = 0;
  double max_angle = 0.0;
  double threshold = 0.0;
  std::size_t zero_points = 0;
};

// Threshold defaults to R^{-1/2 + 2 delta}. Throws NoNonSingularPoints.
TangencyResult classify_tangency(const Tube& tube, const Wall& wall, const Ball& ball, double delta,
                                 std::optional<double> threshold = std::nullopt);

// Balls of radius R^{1-delta} on a lattice of that spacing covering the box.
std::vector<Ball> cover_with_balls(int dim, double R, double delta);

}  // namespace schro
