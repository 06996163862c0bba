#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "schro/error.hpp"
#include "schro/partition.hpp"

namespace schro {
namespace {

MassField make_mass(const SpaceTimeLattice& lat, const std::function<double(const STPoint&)>& w) {
  MassField W{lat, std::vector<double>(lat.size())};
  for (std::size_t i = 0; i < lat.size(); ++i) W.values[i] = w(lat.point(i));
  return W;
}

LatticeWeight as_weight(const MassField& W) {
  LatticeWeight out;
  for (std::size_t i = 0; i < W.values.size(); ++i)
    if (W.values[i] > 0) {
      out.index.push_back(static_cast<std::uint32_t>(i));
      out.value.push_back(W.values[i]);
    }
  return out;
}

// Signed half-space mass difference (r = 1) by direct summation.
double half_space_gap(const MassField& W, const Polynomial& p) {
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < W.values.size(); ++i) {
    const double v = p(W.lattice.point(i));
    if (v > 1e-12) plus += W.values[i];
    else if (v < -1e-12) minus += W.values[i];
  }
  return (plus - minus) / (plus + minus);
}

// L^1_x L^r_t norm of the points with selected(i), written independently of MassField.
double brute_mixed(const MassField& W, double r, const std::function<bool(std::size_t)>& selected) {
  const auto& lat = W.lattice;
  const std::size_t np = lat.spatial_size();
  double acc = 0.0;
  for (std::size_t x = 0; x < np; ++x) {
    double s = 0.0;
    for (std::size_t m = 0; m < lat.times.size(); ++m) {
      const std::size_t i = m * np + x;
      if (selected(i)) s += lat.time_weight[m] * std::pow(W.values[i], r);
    }
    acc += lat.spatial_weight * std::pow(s, 1.0 / r);
  }
  return acc;
}

Tube make_tube(int dim, double R, Point theta_center, Point nu_center, double delta = 0.05) {
  Tile tile;
  tile.dim = dim;
  tile.R = R;
  tile.theta_center = theta_center;
  tile.nu_center = nu_center;
  tile.theta_side = 1.0 / 8;
  tile.nu_side = std::sqrt(R);
  return tube_of(tile, delta);
}

PartitionPolynomial single(const Polynomial& p, int D) { return {p.dim(), D, {p}}; }

Polynomial random_polynomial(int dim, int degree, const Chart& chart, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> c(Polynomial::basis_size(dim, degree));
  for (double& v : c) v = normal(rng);
  return Polynomial(dim, degree, c, chart);
}

TEST(Lattice, UniformIsCellCentred) {
  const auto lat = SpaceTimeLattice::uniform(2, 10.0, 4, 5);
  EXPECT_EQ(lat.size(), 80u);
  EXPECT_DOUBLE_EQ(lat.axis.front(), -7.5);
  EXPECT_DOUBLE_EQ(lat.times.back(), 9.0);
  EXPECT_DOUBLE_EQ(lat.spatial_weight, 25.0);
  const STPoint z = lat.point(3 * 16 + 1 * 4 + 2);
  EXPECT_DOUBLE_EQ(z[0], -2.5);
  EXPECT_DOUBLE_EQ(z[1], 2.5);
  EXPECT_DOUBLE_EQ(z[2], 7.0);
}

TEST(MassField, MixedMassMatchesBruteForce) {
  const auto lat = SpaceTimeLattice::uniform(1, 16.0, 12, 9);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  MassField W{lat, std::vector<double>(lat.size())};
  for (double& v : W.values) v = u(rng);
  for (double r : {1.0, 2.0, 3.5}) {
    const double want = brute_mixed(W, r, [](std::size_t) { return true; });
    EXPECT_NEAR(W.mixed_mass(r), want, 1e-12 * want);
  }
}

TEST(Bisect, SymmetricWeightGivesCoordinatePlane) {
  const double R = 64;
  const auto lat = SpaceTimeLattice::uniform(1, R, 64, 32);
  const auto W = make_mass(lat, [](const STPoint& z) { return std::exp(-z[0] * z[0] / 300) * (1 + z[2] / 10); });
  const LatticeWeight w = as_weight(W);
  const auto res = ham_sandwich_bisect(lat, std::span(&w, 1), 1, 1.0, Chart::for_box(R));
  ASSERT_EQ(res.residuals.size(), 1u);
  EXPECT_LE(std::abs(res.residuals[0]), 1e-12);
  const auto x1 = Polynomial::affine(1, Chart::for_box(R), 0.0, {1, 0, 0});
  EXPECT_GE(Polynomial::alignment(res.factor, x1), 1 - 1e-9);
}

TEST(Bisect, UniformBoxAgreesWithSortedMedian) {
  const double R = 64;
  const auto lat = SpaceTimeLattice::uniform(1, R, 96, 48);
  const auto W = make_mass(lat, [](const STPoint& z) {
    return (z[0] > -20 && z[0] < 50 && z[2] > 10 && z[2] < 40) ? 1.0 : 0.0;
  });
  const LatticeWeight w = as_weight(W);
  BisectionOptions opt;
  opt.seed = 11;
  const auto res = ham_sandwich_bisect(lat, std::span(&w, 1), 1, 1.0, Chart::for_box(R), opt);
  EXPECT_LE(std::abs(res.residuals[0]), 1e-3);
  EXPECT_LE(std::abs(half_space_gap(W, res.factor)), 1e-3);

  // P = a0 + g.z: the level -a0 of g.z must sit inside the central quantile band.
  const STPoint g = res.factor.gradient({0, 0, 0});
  const double a0 = res.factor({0, 0, 0});
  std::vector<double> proj;
  for (auto idx : w.index) {
    const STPoint z = lat.point(idx);
    proj.push_back(g[0] * z[0] + g[2] * z[2]);
  }
  std::sort(proj.begin(), proj.end());
  const double n = static_cast<double>(proj.size());
  const auto lo = proj[static_cast<std::size_t>(std::floor(n * (0.5 - 5e-4))) - 1];
  const auto hi = proj[static_cast<std::size_t>(std::ceil(n * (0.5 + 5e-4)))];
  EXPECT_GE(-a0, lo);
  EXPECT_LE(-a0, hi);
}

TEST(Bisect, TwoDisjointBallsBothBisected) {
  const double R = 64;
  const auto lat = SpaceTimeLattice::uniform(2, R, 40, 24);
  auto ball = [](STPoint c, double rad) {
    return [c, rad](const STPoint& z) {
      const double d = (z[0] - c[0]) * (z[0] - c[0]) + (z[1] - c[1]) * (z[1] - c[1]) + (z[2] - c[2]) * (z[2] - c[2]);
      return d <= rad * rad ? 1.0 : 0.0;
    };
  };
  const auto A = make_mass(lat, ball({-30, 0, 20}, 16));
  const auto B = make_mass(lat, ball({28, 12, 44}, 14));
  const std::vector<LatticeWeight> ws{as_weight(A), as_weight(B)};
  const auto res = ham_sandwich_bisect(lat, ws, 1, 1.0, Chart::for_box(R));
  EXPECT_LE(std::abs(half_space_gap(A, res.factor)), 1e-3);
  EXPECT_LE(std::abs(half_space_gap(B, res.factor)), 1e-3);
  EXPECT_NEAR(std::abs(res.residuals[0]), std::abs(half_space_gap(A, res.factor)), 1e-12);
}

TEST(Bisect, MixedNormResidualMatchesDirectNorms) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(1, R, 40, 30);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  MassField W{lat, std::vector<double>(lat.size())};
  for (double& v : W.values) v = u(rng) * u(rng);
  const LatticeWeight w = as_weight(W);
  const double r = 3.0;
  const auto res = ham_sandwich_bisect(lat, std::span(&w, 1), 2, r, Chart::for_box(R));
  const auto& P = res.factor;
  const double plus = brute_mixed(W, r, [&](std::size_t i) { return P(lat.point(i)) > 1e-12; });
  const double minus = brute_mixed(W, r, [&](std::size_t i) { return P(lat.point(i)) < -1e-12; });
  const double total = brute_mixed(W, r, [](std::size_t) { return true; });
  EXPECT_LE(std::abs(plus - minus), 1e-3 * total);
  EXPECT_NEAR(res.residuals[0], (plus - minus) / total, 1e-12);
}

TEST(Bisect, ManyWeightsWithQuadraticBasis) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(1, R, 256, 128);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<LatticeWeight> ws(5);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double v = u(rng);
    if (v < 0.3) continue;
    auto& w = ws[i % 5];
    w.index.push_back(static_cast<std::uint32_t>(i));
    w.value.push_back(v);
  }
  const auto res = ham_sandwich_bisect(lat, ws, 2, 1.0, Chart::for_box(R));
  for (double g : res.residuals) EXPECT_LE(std::abs(g), 1e-3);
}

TEST(Bisect, RejectsBadInput) {
  const auto lat = SpaceTimeLattice::uniform(1, 8.0, 8, 8);
  std::vector<LatticeWeight> ws(3, LatticeWeight{{1, 2}, {1.0, 1.0}});
  try {
    ham_sandwich_bisect(lat, ws, 1, 1.0, Chart::for_box(8.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  std::vector<LatticeWeight> zero(1, LatticeWeight{{1}, {0.0}});
  EXPECT_THROW(ham_sandwich_bisect(lat, zero, 1, 1.0, Chart::for_box(8.0)), Error);
  std::vector<LatticeWeight> ok(1, LatticeWeight{{1, 2}, {1.0, 1.0}});
  EXPECT_THROW(ham_sandwich_bisect(lat, ok, 1, 0.5, Chart::for_box(8.0)), Error);
}

TEST(Bisect, ExhaustedRestartsReportNotFound) {
  // All mass on one lattice point cannot be split.
  const auto lat = SpaceTimeLattice::uniform(1, 8.0, 8, 8);
  std::vector<LatticeWeight> ws(1, LatticeWeight{{10}, {1.0}});
  BisectionOptions opt;
  opt.restarts = 4;
  try {
    ham_sandwich_bisect(lat, ws, 1, 1.0, Chart::for_box(8.0), opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBisectionNotFound);
  }
}

TEST(Partition, StepSchedule) {
  EXPECT_EQ(partition_steps(1, 1), 1);
  EXPECT_EQ(partition_steps(1, 2), 1);
  EXPECT_EQ(partition_steps(1, 3), 2);
  EXPECT_EQ(partition_steps(1, 5), 3);
  EXPECT_EQ(partition_steps(2, 1), 1);
  EXPECT_EQ(partition_steps(2, 2), 2);
  EXPECT_EQ(partition_steps(2, 4), 3);
  for (int dim : {1, 2})
    for (int D = 1; D <= 12; ++D) {
      const int s = partition_steps(dim, D);
      int total = 0;
      for (int k = 1; k <= s; ++k) {
        total += factor_degree(dim, k);
        EXPECT_GE(Polynomial::basis_size(dim, factor_degree(dim, k)), (std::size_t{1} << (k - 1)) + 2);
      }
      EXPECT_LE(total, D);
    }
}

TEST(Partition, SingleStepHalves) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(1, R, 48, 24);
  const auto W = make_mass(lat, [](const STPoint& z) { return 1 + 0.5 * std::sin(z[0] / 5) * std::cos(z[2] / 7); });
  const auto res = polynomial_partition(W, 1, 1.0, R);
  ASSERT_EQ(res.steps, 1);
  ASSERT_EQ(res.cells.size(), 2u);
  for (const auto& c : res.cells) EXPECT_NEAR(c.mass / res.total_mass, 0.5, 0.5e-3);
}

TEST(Partition, UniformCubeEightCells) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(2, R, 24, 16);
  const auto W = make_mass(lat, [](const STPoint&) { return 1.0; });
  const auto res = polynomial_partition(W, 4, 1.0, R);
  ASSERT_EQ(res.steps, 3);
  ASSERT_EQ(res.cells.size(), 8u);
  EXPECT_LE(res.polynomial.degree(), 4);
  for (const auto& c : res.cells) {
    // Direct summation over points whose sign vector is the cell's.
    double direct = 0.0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const auto id = res.polynomial.cell_of(lat.point(i));
      if (id && *id == c.sign_vector) direct += W.values[i] * lat.spatial_weight * lat.time_weight[0];
    }
    EXPECT_NEAR(direct, c.mass, 1e-9 * c.mass);
    EXPECT_NEAR(c.mass / res.total_mass, 1.0 / 8, 3e-3 / 8);
  }
}

TEST(Partition, BalanceOnRandomMasses) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int dim : {1, 2}) {
    const double R = 32;
    // Fine enough that no single lattice atom exceeds the bisection tolerance.
    const auto lat = dim == 1 ? SpaceTimeLattice::uniform(1, R, 256, 128) : SpaceTimeLattice::uniform(2, R, 32, 32);
    for (int D : dim == 1 ? std::vector<int>{1, 3, 5} : std::vector<int>{1, 2, 4}) {
      MassField W{lat, std::vector<double>(lat.size())};
      for (double& v : W.values) v = u(rng);
      for (double r : {1.0, 2.0}) {
        SCOPED_TRACE("dim " + std::to_string(dim) + " D " + std::to_string(D) + " r " + std::to_string(r));
        PartitionResult res;
        ASSERT_NO_THROW(res = polynomial_partition(W, D, r, R));
        const int s = res.steps;
        const double floor = (1 - s * 1e-3) / std::pow(2.0, s);
        for (const auto& c : res.cells) {
          EXPECT_GE(c.mass / res.total_mass, floor) << "dim " << dim << " D " << D << " r " << r;
          EXPECT_GE(c.mass / res.total_mass, 0.8 / std::pow(2.0, s));
        }
        for (const auto& step : res.residuals)
          for (double g : step) EXPECT_LE(std::abs(g), 1e-3);
      }
    }
  }
}

TEST(Partition, CompletenessAtROne) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(1, R, 256, 128);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  MassField W{lat, std::vector<double>(lat.size())};
  for (double& v : W.values) v = u(rng);
  const auto res = polynomial_partition(W, 4, 1.0, R);
  double sum = res.tie_mass;
  std::vector<int> owners(lat.size(), 0);
  for (const auto& c : res.cells) {
    sum += c.mass;
    for (std::size_t i = 0; i < lat.size(); ++i) owners[i] += c.mask[i];
  }
  EXPECT_NEAR(sum, res.total_mass, 1e-12 * res.total_mass);
  for (int o : owners) EXPECT_LE(o, 1);
}

TEST(Partition, FactorsAreDistinctAndNonSingular) {
  const double R = 32;
  const auto lat = SpaceTimeLattice::uniform(1, R, 64, 32);
  const auto W = make_mass(lat, [](const STPoint& z) { return std::exp(-(z[0] * z[0]) / 400.0); });
  const auto res = polynomial_partition(W, 4, 1.0, R);
  const auto& fs = res.polynomial.factors;
  for (std::size_t a = 0; a < fs.size(); ++a)
    for (std::size_t b = a + 1; b < fs.size(); ++b) EXPECT_LT(Polynomial::alignment(fs[a], fs[b]), 1 - 1e-9);
  const auto zeros = sample_zero_set(res.polynomial, Box::for_scale(1, R), 1.0);
  ASSERT_FALSE(zeros.empty());
  double least = 1e300;
  for (const auto& z : zeros) {
    const auto& f = fs[static_cast<std::size_t>(z.factor)];
    const auto g = f.gradient_unit(f.chart().to_unit(z.z));
    least = std::min(least, std::hypot(g[0], g[1], g[2]));
  }
  EXPECT_GT(least, 1e-8);
}

TEST(Partition, SerializesFactorsAndRunLengthMasks) {
  const double R = 16;
  const auto lat = SpaceTimeLattice::uniform(1, R, 16, 8);
  const auto W = make_mass(lat, [](const STPoint&) { return 1.0; });
  const auto res = polynomial_partition(W, 2, 1.0, R);
  const auto j = res.polynomial.to_json();
  EXPECT_EQ(j["D"], 2);
  ASSERT_EQ(j["factors"].size(), res.polynomial.factors.size());
  for (const auto& c : res.cells) {
    std::vector<std::uint8_t> decoded(lat.size(), 0);
    for (const auto& run : c.run_length_mask())
      for (std::size_t k = 0; k < run[1].get<std::size_t>(); ++k) decoded[run[0].get<std::size_t>() + k] = 1;
    EXPECT_EQ(decoded, c.mask);
  }
}

TEST(Lines, GenericLineMeetsTwoHalfSpaces) {
  const double R = 16;
  const Chart chart = Chart::for_box(R);
  const auto P = single(Polynomial::affine(1, chart, -1.0, {0.3, 0, 1.0}), 1);
  const auto out = cells_entered_by_line(P, Line{{-R, 0, 0}, {1.0, 0, 0.4}}, Box::for_scale(1, R));
  EXPECT_EQ(out.cells, 2u);
  ASSERT_EQ(out.crossings.size(), 1u);
  EXPECT_FALSE(out.degenerate);
}

TEST(Lines, ParallelHyperplanesGiveDPlusOne) {
  const double R = 16;
  const Chart chart = Chart::for_box(R);
  for (int D = 1; D <= 6; ++D) {
    PartitionPolynomial P{2, D, {}};
    for (int k = 0; k < D; ++k)
      P.factors.push_back(Polynomial::affine(2, chart, -R * (k + 0.5) / D, {0, 0, 1}));
    const auto out = cells_entered_by_line(P, Line{{1, 2, 0}, {0.1, -0.2, 1}}, Box::for_scale(2, R));
    EXPECT_EQ(out.cells, static_cast<std::size_t>(D + 1));
    ASSERT_EQ(out.crossings.size(), static_cast<std::size_t>(D));
    for (int k = 0; k < D; ++k) EXPECT_NEAR(out.crossings[k], R * (k + 0.5) / D, 1e-9);
  }
}

TEST(Lines, RandomPairsRespectCrossingBound) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1, 1);
  const double R = 16;
  const Chart chart = Chart::for_box(R);
  int worst_excess = -100;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 2;
    const int D = 2 + trial % 3;
    PartitionPolynomial P{dim, D, {}};
    int left = D;
    while (left > 0) {
      const int d = 1 + static_cast<int>(rng() % static_cast<unsigned>(left));
      P.factors.push_back(random_polynomial(dim, d, chart, rng));
      left -= d;
    }
    Line line{{R * u(rng), dim == 1 ? 0.0 : R * u(rng), R * (0.5 + 0.5 * u(rng))},
              {u(rng), dim == 1 ? 0.0 : u(rng), u(rng)}};
    const auto out = cells_entered_by_line(P, line, Box::for_scale(dim, R));
    if (out.degenerate) continue;
    worst_excess = std::max(worst_excess, static_cast<int>(out.cells) - (D + 1));
    EXPECT_LE(out.crossings.size(), static_cast<std::size_t>(D));
  }
  EXPECT_LE(worst_excess, 0);
}

TEST(Lines, DegenerateFactorIsFlagged) {
  const double R = 16;
  const Chart chart = Chart::for_box(R);
  PartitionPolynomial P{1, 2, {Polynomial::affine(1, chart, 0, {1, 0, 0}),
                               Polynomial::affine(1, chart, -R / 2, {0, 0, 1})}};
  const auto out = cells_entered_by_line(P, Line{{0, 0, 0}, {0, 0, 1}}, Box::for_scale(1, R));
  EXPECT_TRUE(out.degenerate);
  ASSERT_EQ(out.degenerate_factors, std::vector<int>{0});
  EXPECT_EQ(out.cells, 2u);
}

TEST(Lines, MissingTheBoxEntersNothing) {
  const double R = 16;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, 0}), 1);
  EXPECT_EQ(cells_entered_by_line(P, Line{{0, 0, -5}, {1, 0, 0}}, Box::for_scale(1, R)).cells, 0u);
}

TEST(Walls, PlaneGivesSlab) {
  const double R = 64, delta = 0.05;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, 0}), 1);
  const Wall wall = wall_region(P, R, delta);
  const double w = std::pow(R, 0.5 + delta);
  EXPECT_DOUBLE_EQ(wall.width(), w);
  EXPECT_LE(wall.resolution(), w / 8);
  const auto lat = SpaceTimeLattice::uniform(1, R, 128, 32);
  const auto mask = wall.mask(lat, R);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = std::abs(lat.point(i)[0]);
    if (x <= w - wall.resolution()) EXPECT_EQ(mask[i], 1);
    if (x > w) EXPECT_EQ(mask[i], 0);
  }
}

TEST(Walls, EmptyZeroSetGivesEmptyWall) {
  const double R = 16;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), -5 * R, {1, 0, 0}), 1);
  const Wall wall = wall_region(P, R, 0.05);
  EXPECT_TRUE(wall.zeros().empty());
  const auto lat = SpaceTimeLattice::uniform(1, R, 16, 8);
  const auto mask = wall.mask(lat, R);
  EXPECT_EQ(std::count(mask.begin(), mask.end(), 1), 0);
}

TEST(Walls, MaskMonotoneInWidth) {
  const double R = 32;
  std::mt19937_64 rng(4);
  const auto P = single(random_polynomial(2, 2, Chart::for_box(R), rng), 2);
  const Box box = Box::for_scale(2, R);
  const auto zeros = sample_zero_set(P, box, 1.0);
  const auto lat = SpaceTimeLattice::uniform(2, R, 24, 12);
  std::vector<std::uint8_t> previous(lat.size(), 0);
  for (double width : {2.0, 4.0, 8.0, 16.0}) {
    const Wall wall(P, box, width, 1.0, zeros);
    const auto mask = wall.mask(lat, R);
    for (std::size_t i = 0; i < lat.size(); ++i) EXPECT_GE(mask[i], previous[i]);
    previous = mask;
  }
}

TEST(Walls, MembershipMatchesBruteDistance) {
  const double R = 64;
  std::mt19937_64 rng(8);
  PartitionPolynomial P{2, 3, {random_polynomial(2, 2, Chart::for_box(R), rng),
                               random_polynomial(2, 1, Chart::for_box(R), rng)}};
  const Wall wall = wall_region(P, R, 0.05);
  std::uniform_real_distribution<double> u(-1, 1);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const STPoint z{R * u(rng), R * u(rng), R * (0.5 + 0.5 * u(rng))};
    double best = 1e300;
    for (const auto& s : wall.zeros())
      best = std::min(best, std::hypot(z[0] - s.z[0], z[1] - s.z[1], z[2] - s.z[2]));
    EXPECT_EQ(wall.contains(z), best <= wall.width());
    EXPECT_NEAR(wall.distance(z), best, 1e-12);
    inside += best <= wall.width();
  }
  EXPECT_GT(inside, 0);
  EXPECT_LT(inside, 10000);
}

TEST(Walls, SampledZerosLieOnTheZeroSet) {
  const double R = 32;
  std::mt19937_64 rng(12);
  const auto P = single(random_polynomial(1, 3, Chart::for_box(R), rng), 3);
  const auto zeros = sample_zero_set(P, Box::for_scale(1, R), 0.5);
  ASSERT_FALSE(zeros.empty());
  for (const auto& z : zeros) EXPECT_LE(std::abs(P.factors[0](z.z)), 1e-9);
}

TEST(Incidence, VerticalTubeThroughHorizontalSlab) {
  const double R = 256;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), -R / 2, {0, 0, 1}), 1);
  const Wall wall = wall_region(P, R, 0.05);
  const std::vector<Tube> tubes{make_tube(1, R, {0, 0}, {10, 0})};
  const auto rep = tube_cell_incidence(tubes, wall);
  ASSERT_EQ(rep.cells.size(), 1u);
  EXPECT_EQ(rep.cells[0], (std::vector<unsigned>{0, 1}));
  EXPECT_EQ(rep.violations, 0u);
}

TEST(Incidence, TubeInsideTheWallEntersNoCell) {
  const double R = 256;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, 0}), 1);
  const Wall wall = wall_region(P, R, 0.05);
  const std::vector<Tube> tubes{make_tube(1, R, {0, 0}, {1, 0})};
  EXPECT_TRUE(tube_cell_incidence(tubes, wall).cells[0].empty());
}

TEST(Incidence, RandomEnsembleRespectsCrossingBound) {
  const double R = 128;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int dim : {1, 2}) {
    for (int D : {2, 4}) {
      const auto lat = dim == 1 ? SpaceTimeLattice::uniform(1, R, 256, 128) : SpaceTimeLattice::uniform(2, R, 32, 32);
      MassField W{lat, std::vector<double>(lat.size())};
      for (double& v : W.values) v = 0.5 + 0.5 * u(rng);
      SCOPED_TRACE("dim " + std::to_string(dim) + " D " + std::to_string(D));
      PartitionResult part;
      ASSERT_NO_THROW(part = polynomial_partition(W, D, 1.0, R));
      const Wall wall = wall_region(part.polynomial, R, 0.05);
      std::vector<Tube> tubes;
      for (int k = 0; k < 200; ++k)
        tubes.push_back(make_tube(dim, R, {0.5 * u(rng), dim == 1 ? 0.0 : 0.5 * u(rng)},
                                  {R * u(rng), dim == 1 ? 0.0 : R * u(rng)}));
      const auto rep = tube_cell_incidence(tubes, wall);
      EXPECT_EQ(rep.violations, 0u);
      EXPECT_LE(rep.max_cells, static_cast<std::size_t>(part.polynomial.degree() + 1));
    }
  }
}

TEST(Incidence, BudgetStaysWithinConstant) {
  const double R = 256;
  const auto grid = GridSpec::make(1, R);
  const auto frame = WavePacketFrame::make(grid, 0.125);
  std::mt19937_64 rng(41);
  for (int draw = 0; draw < 3; ++draw) {
    const SpectralField f = random_band_limited(grid, rng);
    const auto coeffs = decompose(f, frame);
    const auto tubes = tubes_of(coeffs, 0.05);
    const auto u = propagate(f);
    const auto W = mass_from_field(u, 2.0);
    for (int D : {2, 4}) {
      const auto part = polynomial_partition(W, D, 1.0, R);
      const Wall wall = wall_region(part.polynomial, R, 0.05);
      const auto inc = tube_cell_incidence(tubes, wall);
      const auto budget = orthogonality_budget(coeffs, tubes, inc, D, static_cast<unsigned>(part.cells.size()));
      EXPECT_NEAR(budget.total, std::pow(f.l2_norm(), 2), 1e-9 * budget.total);
      EXPECT_LE(budget.ratio, 4.0);
      EXPECT_LE(budget.sum, (D + 1) * budget.total * (1 + 1e-9));
    }
  }
}

TEST(Tangency, TubeInsideThePlaneIsTangent) {
  const double R = 256, delta = 0.05;
  // Z = {x1 = t}; the axis x1 = c(nu) - 2 t c(theta) with c(theta) = -1/2, c(nu) = 0 lies in Z.
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, -1}), 1);
  const Wall wall = wall_region(P, R, delta);
  const Tube tube = make_tube(1, R, {-0.5, 0}, {0, 0}, delta);
  const Ball ball{{R / 2, 0, R / 2}, std::pow(R, 1 - delta), 7};
  const auto res = classify_tangency(tube, wall, ball, delta);
  EXPECT_EQ(res.label, Tangency::kTangent);
  EXPECT_EQ(res.ball_id, 7);
  EXPECT_LE(res.max_angle, 1e-9);
  EXPECT_GT(res.zero_points, 0u);
  EXPECT_NEAR(res.threshold, std::pow(R, -0.5 + 2 * delta), 1e-15);
}

// c such that the direction (-2c, 1) makes the given angle with the plane x1 = t.
double theta_for_angle(double angle) {
  double lo = -0.5, hi = 3.0;
  for (int it = 0; it < 200; ++it) {
    const double c = 0.5 * (lo + hi);
    const double a = std::asin(std::abs(-2 * c - 1) / (std::sqrt(2.0) * std::hypot(2 * c, 1.0)));
    (a < angle ? lo : hi) = c;
  }
  return 0.5 * (lo + hi);
}

TEST(Tangency, SteepTubeIsTransverse) {
  const double R = 256, delta = 0.05;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, -1}), 1);
  const Wall wall = wall_region(P, R, delta);
  const double c = theta_for_angle(0.5);
  // Axis through (R/2, R/2): c(nu) - R c = R/2.
  const Tube tube = make_tube(1, R, {c, 0}, {R / 2 + R * c, 0}, delta);
  const Ball ball{{R / 2, 0, R / 2}, std::pow(R, 1 - delta), 0};
  const auto res = classify_tangency(tube, wall, ball, delta);
  EXPECT_EQ(res.label, Tangency::kTransverse);
  EXPECT_NEAR(res.max_angle, 0.5, 1e-9);
}

TEST(Tangency, FarTubeIsDisjoint) {
  const double R = 256, delta = 0.05;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, -1}), 1);
  const Wall wall = wall_region(P, R, delta);
  const Tube tube = make_tube(1, R, {0, 0}, {-200, 0}, delta);
  const Ball ball{{-200, 0, 20}, 20, 3};
  EXPECT_EQ(classify_tangency(tube, wall, ball, delta).label, Tangency::kDisjoint);
}

TEST(Tangency, ETangentTubesClassifyTangent) {
  const double R = 256, delta = 0.05;
  const auto P = single(Polynomial::affine(1, Chart::for_box(R), 0, {1, 0, -1}), 1);
  const Wall wall = wall_region(P, R, delta);
  const double threshold = std::pow(R, -0.5 + 2 * delta);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (double E : {0.5, 1.0, 1.5, std::pow(R, 2 * delta)}) {
    ASSERT_LE(E / std::sqrt(R), threshold * (1 + 1e-12));
    for (int k = 0; k < 10; ++k) {
      const double c = theta_for_angle(u(rng) * E / std::sqrt(R));
      const double offset = (u(rng) - 0.5) * E * std::sqrt(R);
      const Tube tube = make_tube(1, R, {c, 0}, {R / 2 + R * c + offset, 0}, delta);
      const Ball ball{{R / 2, 0, R / 2}, std::pow(R, 1 - delta), k};
      const auto res = classify_tangency(tube, wall, ball, delta);
      EXPECT_EQ(res.label, Tangency::kTangent) << "E " << E << " angle " << res.max_angle;
    }
  }
}

TEST(Tangency, LabelsMonotoneInThreshold) {
  const double R = 128, delta = 0.05;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto P = single(random_polynomial(1, 2, Chart::for_box(R), rng), 2);
  const Wall wall = wall_region(P, R, delta);
  const auto balls = cover_with_balls(1, R, delta);
  for (int k = 0; k < 40; ++k) {
    const Tube tube = make_tube(1, R, {0.5 * u(rng), 0}, {R * u(rng), 0}, delta);
    for (const Ball& ball : balls) {
      Tangency previous = Tangency::kTangent;
      for (double th : {0.01, 0.05, 0.1, 0.3, 1.0, 1.6}) {
        const auto res = classify_tangency(tube, wall, ball, delta, th);
        if (res.label == Tangency::kDisjoint) break;
        if (th > 0.01) EXPECT_FALSE(previous == Tangency::kTangent && res.label == Tangency::kTransverse);
        previous = res.label;
      }
    }
  }
}

TEST(Tangency, AllSingularZerosAreReported) {
  const double R = 64, delta = 0.05;
  const Chart chart = Chart::for_box(R);
  // x1^2 vanishes to second order on x1 = 0, so sign changes never find it.
  std::vector<double> coeffs(Polynomial::basis_size(1, 2), 0.0);
  coeffs[3] = 1.0;  // u1^2
  PartitionPolynomial P{1, 2, {Polynomial(1, 2, coeffs, chart)}};
  std::vector<ZeroSample> zeros;
  for (int k = 0; k <= 16; ++k) zeros.push_back({{0, 0, R * k / 16}, 0});
  const Wall wall(P, Box::for_scale(1, R), std::pow(R, 0.5 + delta), 1.0, zeros);
  const Tube tube = make_tube(1, R, {0, 0}, {0, 0}, delta);
  const Ball ball{{0, 0, R / 2}, R / 2, 0};
  try {
    classify_tangency(tube, wall, ball, delta);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoNonSingularPoints);
  }
}

TEST(Tangency, BallsCoverTheBox) {
  const double R = 64, delta = 0.1;
  const auto balls = cover_with_balls(2, R, delta);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const STPoint z{R * u(rng), R * u(rng), R * (0.5 + 0.5 * u(rng))};
    bool covered = false;
    for (const auto& b : balls)
      covered |= std::hypot(z[0] - b.center[0], z[1] - b.center[1], z[2] - b.center[2]) <= b.radius;
    EXPECT_TRUE(covered);
  }
  for (const auto& b : balls) EXPECT_DOUBLE_EQ(b.radius, std::pow(R, 1 - delta));
}

}  // namespace
}  // namespace schro
