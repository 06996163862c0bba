#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "schro/field.hpp"
#include "schro/wavepacket.hpp"

namespace schro {

// Lattice cube of side R^{1/2}: spatial indices (i1, i2) and time strip k, covering
// [i side, (i+1) side) per axis and [k side, (k+1) side) in time. i2 is 0 when dim == 1.
using CubeIndex = std::array<int, 3>;

class CubeUnion {
 public:
  CubeUnion(int dim, double R);

  int dim() const noexcept { return dim_; }
  double R() const noexcept { return R_; }
  double side() const noexcept { return side_; }
  // Spatial indices run over [-half_width(), half_width()), strips over [0, strips()).
  int half_width() const noexcept { return half_; }
  int strips() const noexcept { return strips_; }

  bool in_range(const CubeIndex& q) const noexcept;
  // False when q was already present. Throws InvalidArgument outside the box.
  bool insert(const CubeIndex& q);
  bool contains(const CubeIndex& q) const { return cubes_.count(q) != 0; }
  std::size_t size() const noexcept { return cubes_.size(); }
  bool empty() const noexcept { return cubes_.empty(); }
  const std::set<CubeIndex>& cubes() const noexcept { return cubes_; }

  CubeIndex cube_of(const Point& x, double t) const noexcept;
  // Lower corner (x1, x2, t).
  std::array<double, 3> corner(const CubeIndex& q) const noexcept;
  // Grid points of the union.
  Region region(const GridSpec& grid, std::span<const double> times) const;

 private:
  int dim_;
  double R_;
  double side_;
  int half_;
  int strips_;
  std::set<CubeIndex> cubes_;
};

// Points of the cube dilated by `factor` about its centre, clipped to the grid domain.
Region cube_region(const CubeUnion& shape, const CubeIndex& q, const GridSpec& grid,
                   std::span<const double> times, double factor = 1.0);

// One cube per strip for every tube: the cube holding the axis at the strip's mid-time.
CubeUnion cubes_along_tubes(int dim, double R, std::span<const Tube> tubes);

struct StripOccupancy {
  std::size_t sigma = 0;  // largest per-strip count
  std::size_t min_nonempty = 0;
  std::map<int, std::size_t> histogram;  // strip -> count, nonempty strips only
  bool uniform = false;  // every nonempty strip holds >= sigma / 2 cubes
};

StripOccupancy strip_occupancy(const CubeUnion& Y);

// Per-cube sums of w * (prod_i |e^{it Laplacian} f_i|)^{p/k} over the cubes of Y,
// k = fields.size(), on the grid's time samples.
std::map<CubeIndex, double> cube_power_sums(std::span<const SpectralField* const> fields,
                                            const CubeUnion& Y, double p);

struct DyadicClass {
  int exponent = 0;  // members lie in (top 2^{-exponent-1}, top 2^{-exponent}]
  std::vector<std::size_t> members;
  double mass = 0.0;
};

struct PigeonholeResult {
  DyadicClass selected;
  std::vector<DyadicClass> classes;  // nonempty classes by exponent
  std::size_t class_bound = 0;       // number of admissible exponents
  std::vector<std::size_t> dropped;  // below the floor
  double floor = 0.0;
  double total = 0.0;     // sum of value^p over every item
  double retained = 0.0;  // selected.mass
};

// Groups positive values into dyadic classes below `reference` (default: the
// maximum), drops values under R^{-C} * reference and keeps the class with the
// largest sum of value^p. Throws AllBelowFloor or InvalidArgument.
PigeonholeResult dyadic_pigeonhole(std::span<const double> values, double R, double p = 1.0,
                                   double C = 20.0, std::optional<double> reference = std::nullopt);

// One box of the two-scale decomposition: its L^2 mass and the tubes it contains.
struct BoxTubes {
  double l2 = 0.0;
  std::vector<int> strip;                     // per tube: strip along the box's short axes
  std::vector<double> norm;                   // per tube: L^6 norm of the box's solution on it
  std::vector<std::vector<CubeIndex>> cubes;  // per tube: cubes it covers
};

struct PigeonholeSelection {
  int lambda = 0;  // dyadic exponent of the tube norms
  int eta = 0;     // dyadic exponent of the per-strip tube counts
  int box_class = 0;
  int mu = 0;      // dyadic exponent of the per-cube multiplicity
  std::vector<std::size_t> selected_boxes;
  std::map<std::size_t, std::vector<CubeIndex>> box_cubes;  // Y_box for each selected box
  std::vector<CubeIndex> surviving;                          // Y'
  std::size_t class_product = 1;  // product of the numbers of candidate classes
  double retained_fraction = 0.0;  // |Y'| / |Y|
};

// Picks (lambda, eta) by retained L^6 mass, then a dyadic class of box L^2 norms,
// then the multiplicity class holding the most cubes of Y.
PigeonholeSelection box_pigeonhole(std::span<const BoxTubes> boxes, const CubeUnion& Y, double R,
                                   double C = 20.0);

// Axis-aligned frequency box [lo, hi) per axis.
struct FrequencyBox {
  Point lo{0, 0};
  Point hi{0, 0};
  bool contains(const Point& xi, int dim) const noexcept;
};

// Intervals of length R^{-1/2} tiling [-1, 1) (dim 1) or squares of side R^{-1/2}
// tiling [-1, 1)^2 (dim 2).
std::vector<FrequencyBox> parabola_caps(int dim, double R);

// Sharp split: each lattice frequency goes to the first cap containing it;
// frequencies in no cap are dropped.
std::vector<SpectralField> split_into_caps(const SpectralField& f, std::span<const FrequencyBox> caps);

struct DecouplingReport {
  double ratio = 0.0;
  double lhs = 0.0;                 // ||F||_{L^6(Q)}
  double rhs = 0.0;                 // (sum ||F_tau||^2_{L^6(enlarged)})^{1/2}
  std::vector<double> piece_norms;  // ||F_tau||_{L^6(enlarged)}
};

// ||F||_{L^6(Q)} / (sum_tau ||F_tau||^2_{L^6(enlarged)})^{1/2}. Throws
// SupportViolation when a piece leaks outside its cap by more than tol (relative
// L^2 mass) and PreconditionFailed when the pieces do not sum to F.
DecouplingReport decoupling_ratio(const SpectralField& F, std::span<const SpectralField> pieces,
                                  std::span<const FrequencyBox> caps, const Region& Q,
                                  const Region& enlarged, double tol = 1e-10);

struct RatioOptions {
  double uniform_factor = 4.0;  // allowed max/min of the per-cube norms
};

struct RefinedReport {
  double ratio = 0.0;
  double norm = 0.0;  // ||e^{it Laplacian} g||_{L^6(Y)}
  std::size_t sigma = 0;
  double cube_spread = 0.0;  // max/min of per-cube norms
};

// ||e^{it Laplacian} g||_{L^6(Y)} / (sigma^{-1/3} ||g||_2), n = 1. Throws
// NonUniformCubes (cube norms) or PreconditionFailed (strip occupancy).
RefinedReport refined_strichartz_ratio(const SpectralField& g, const CubeUnion& Y,
                                       const RatioOptions& options = {});

struct BilinearReport {
  double ratio = 0.0;
  double norm = 0.0;  // || |u1 u2|^{1/2} ||_{L^6(Y)}
  std::size_t N = 0;
  double separation = 0.0;  // measured distance between the Fourier supports
  double cube_spread = 0.0;
};

// || |u1 u2|^{1/2} ||_{L^6(Y)} / (M^{1/6} N^{-1/6} R^{-1/6} ||f1||^{1/2} ||f2||^{1/2}).
// Throws SeparationViolated or NonUniformCubes.
BilinearReport bilinear_refined_ratio(const SpectralField& f1, const SpectralField& f2,
                                      const CubeUnion& Y, double separation, double M = 1.0,
                                      const RatioOptions& options = {});

// Distance between the sets of frequencies carrying nonzero coefficients.
double fourier_support_distance(const SpectralField& a, const SpectralField& b);

// Values at one space-time point, per cap: the tangent and transverse parts of
// e^{it Laplacian} f_tau.
struct CapValues {
  std::vector<cplx> tangent;
  std::vector<cplx> transverse;
};

struct BilDecompositionReport {
  double worst_constant = 0.0;  // max |f| / (|f_{I,trans}| + K^10 Bil)
  std::size_t points = 0;       // points satisfying the broadness hypothesis
  std::size_t excluded = 0;     // PreconditionFailed points
  std::size_t via_bilinear = 0;  // points where two separated caps exceed K^{-10}|f|
};

// Checks |f| <= C (|f_{I,trans}| + K^10 Bil) with I = {tau : |tangent_tau| <= K^{-10}|f|},
// Bil = max over caps with centre distance >= 1/(K M) of |tangent_1|^{1/2} |tangent_2|^{1/2}.
BilDecompositionReport bil_decomposition_check(std::span<const CapValues> points,
                                               std::span<const Point> cap_centers, int dim, double K,
                                               double M, double eps);

// |Y_box cap Y| sigma / (sigma_box |Y|): the constant in the strip estimate.
double strip_estimate_constant(const CubeUnion& Y_box, const CubeUnion& Y);

std::size_t common_cubes(const CubeUnion& a, const CubeUnion& b);

// Max over rectangles of size (a x b) tiling the region's bounding box of
// sup |h| / (average of |h| over the rectangle dilated by `enlarge`), with h
// sampled on the grid and times. Rectangles where h vanishes are skipped.
double sup_over_average(const SpaceTimeField& h, double a, double b, double enlarge);

}  // namespace schro
