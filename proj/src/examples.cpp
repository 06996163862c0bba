#include "schro/examples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <numbers>
#include <random>
#include <sstream>

#include "schro/error.hpp"
#include "schro/parallel.hpp"
#include "schro/partition.hpp"

namespace schro {

namespace {

bool is_power_of_two(double R) {
  if (!(R >= 1) || R != std::floor(R)) return false;
  const auto n = static_cast<std::uint64_t>(R);
  return (n & (n - 1)) == 0;
}

nlohmann::json grid_json(const GridSpec& g) {
  return {{"dim", g.dim}, {"R", g.R}, {"L", g.L}, {"nx", g.nx}, {"nt", g.nt}};
}

double l6_over(const SpectralField& f, const CubeUnion& Y) {
  const SpectralField* fields[] = {&f};
  double total = 0.0;
  for (const auto& [q, s] : cube_power_sums(fields, Y, 6.0)) total += s;
  return std::pow(total, 1.0 / 6);
}

void apply_fit(ExperimentResult& result, const std::string& label, std::span<const std::size_t> rows,
               double ExperimentRow::*scale, double ExperimentRow::*value) {
  std::vector<std::pair<double, double>> points;
  for (std::size_t i : rows) points.emplace_back(result.rows[i].*scale, result.rows[i].*value);
  const ExponentFit fit = fit_exponent(points);
  for (std::size_t i : rows) result.rows[i].fitted_slope = fit.slope;
  result.fits.push_back({label, fit});
}

std::vector<double> or_default(const std::vector<double>& v, std::vector<double> fallback) {
  return v.empty() ? fallback : v;
}

ExperimentResult sigma_law(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto Rs = or_default(cfg.R, {1024});
  const auto sigmas = or_default(cfg.sigma, {2, 4, 8, 16, 32});
  out.rows.resize(Rs.size() * sigmas.size());
  parallel_for(out.rows.size(), [&](std::size_t i) {
    const double R = Rs[i / sigmas.size()];
    const auto sigma = static_cast<std::size_t>(sigmas[i % sigmas.size()]);
    const auto ex = build_packet_spread(sigma, R, cfg.seed + i);
    ExperimentRow& row = out.rows[i];
    row.R = R;
    row.sigma_or_N = static_cast<double>(sigma);
    row.norm = l6_over(ex.g, ex.Y);
    row.ratio = row.norm * std::cbrt(static_cast<double>(sigma)) / ex.g.l2_norm();
    row.details = {{"cubes", ex.Y.size()}, {"inner_variation", ex.inner_variation},
                   {"grid", grid_json(ex.g.grid())}};
  });
  for (std::size_t r = 0; r < Rs.size(); ++r) {
    std::vector<std::size_t> rows(sigmas.size());
    for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = r * sigmas.size() + j;
    apply_fit(out, "norm vs sigma at R=" + std::to_string(static_cast<long>(Rs[r])), rows,
              &ExperimentRow::sigma_or_N, &ExperimentRow::norm);
  }
  return out;
}

ExperimentResult focusing_law(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto Rs = or_default(cfg.R, {256, 512, 1024, 2048});
  out.rows.resize(Rs.size());
  parallel_for(Rs.size(), [&](std::size_t i) {
    const double R = Rs[i];
    const auto ex = build_sparse_focusing(R, cfg.focusing);
    ExperimentRow& row = out.rows[i];
    row.R = R;
    row.sigma_or_N = static_cast<double>(ex.X.size());
    row.M = static_cast<double>(ex.frequencies);
    row.E = cfg.focusing.threshold;
    row.norm = ex.focusing_ratio();
    row.ratio = static_cast<double>(ex.X.size()) / std::pow(R, 1.5);
    row.details = {{"grid", grid_json(ex.g.grid())},
                   {"H", ex.H},
                   {"g_norm", ex.g_norm},
                   {"spacing", ex.spacing},
                   {"per_ball_density", ex.per_ball_density},
                   {"density_over_sqrtR", static_cast<double>(ex.per_ball_density) / std::sqrt(R)},
                   {"H_X16_over_R", ex.H * std::pow(static_cast<double>(ex.X.size()), 1.0 / 6) /
                                        (std::pow(R, -1.0 / 6 + 0.1) * ex.g_norm)}};
  });
  std::vector<std::size_t> rows(out.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() >= 3) apply_fit(out, "H/||g|| vs R", rows, &ExperimentRow::R, &ExperimentRow::norm);
  return out;
}

ExperimentResult decoupling_growth(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto Rs = or_default(cfg.R, {256, 512, 1024, 2048, 4096});
  const int trials = cfg.trials > 0 ? cfg.trials : 20;
  out.rows.resize(Rs.size());
  for (std::size_t i = 0; i < Rs.size(); ++i) {
    const double R = Rs[i];
    std::mt19937_64 rng(cfg.seed + 1000003 * i);
    std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
    const GridSpec grid = GridSpec::make(1, R);
    const auto caps = parabola_caps(1, R);
    const auto times = grid.time_samples();
    const Region Q = Region::full_box(grid, times);
    const SpectralField base = random_band_limited(grid, rng);
    auto pieces = split_into_caps(base, caps);
    double sum = 0.0, worst = 0.0, lhs_sum = 0.0, rhs = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      SpectralField F(grid);
      for (auto& p : pieces) {
        p *= std::polar(1.0, phase(rng));
        F += p;
      }
      double ratio = 0.0, lhs = 0.0;
      if (trial == 0) {
        const auto rep = decoupling_ratio(F, pieces, caps, Q, Q);
        rhs = rep.rhs;
        ratio = rep.ratio;
        lhs = rep.lhs;
      } else {
        // Unimodular phases leave every ||F_tau||_{L^6} unchanged.
        lhs = std::pow(region_power_sum(F, times, Q, 6.0), 1.0 / 6);
        ratio = lhs / rhs;
      }
      sum += ratio;
      lhs_sum += lhs;
      worst = std::max(worst, ratio);
    }
    ExperimentRow& row = out.rows[i];
    row.R = R;
    row.sigma_or_N = static_cast<double>(caps.size());
    row.E = trials;
    row.norm = lhs_sum / trials;
    row.ratio = sum / trials;
    row.details = {{"max_ratio", worst}, {"rhs", rhs}, {"grid", grid_json(grid)}};
  }
  std::vector<std::size_t> rows(out.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() >= 3) apply_fit(out, "mean ratio vs R", rows, &ExperimentRow::R, &ExperimentRow::ratio);
  return out;
}

// Shift of a spectral field by a lattice frequency offset (in units of dk).
SpectralField shift_frequency(const SpectralField& f, std::ptrdiff_t offset) {
  const GridSpec& g = f.grid();
  SpectralField out(g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] == cplx{}) continue;
    out[g.slot(g.wavenumber(k) + offset)] = f[k];
  }
  out.support = f.support;
  out.support.center[0] += static_cast<double>(offset) * g.dk();
  return out;
}

ExperimentResult bilinear_law(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto Rs = or_default(cfg.R, {256, 1024});
  const int trials = cfg.trials > 0 ? cfg.trials : 3;
  out.rows.resize(Rs.size());
  for (std::size_t i = 0; i < Rs.size(); ++i) {
    const double R = Rs[i];
    std::mt19937_64 rng(cfg.seed + 7777 * i);
    const GridSpec grid = GridSpec::make(1, R);
    CubeUnion all(1, R);
    for (int k = 0; k < all.strips(); ++k)
      for (int j = -all.half_width(); j < all.half_width(); ++j) all.insert({j, 0, k});
    double worst = 0.0, mean = 0.0, norm_mean = 0.0, n_mean = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
      const SpectralField f1 = random_band_limited(grid, rng, {{-0.5, 0.0}, 0.25});
      const SpectralField f2 = shift_frequency(f1, static_cast<std::ptrdiff_t>(std::lround(1.0 / grid.dk())));
      const SpectralField* fields[] = {&f1, &f2};
      const auto sums = cube_power_sums(fields, all, 6.0);
      std::vector<double> values;
      std::vector<CubeIndex> index;
      for (const auto& [q, s] : sums) {
        values.push_back(s);
        index.push_back(q);
      }
      const auto cls = dyadic_pigeonhole(values, R, 1.0, 20.0);
      CubeUnion Y(1, R);
      for (std::size_t m : cls.selected.members) Y.insert(index[m]);
      const auto rep = bilinear_refined_ratio(f1, f2, Y, 0.5, cfg.M);
      worst = std::max(worst, rep.ratio);
      mean += rep.ratio / trials;
      norm_mean += rep.norm / trials;
      n_mean += static_cast<double>(rep.N) / trials;
    }
    ExperimentRow& row = out.rows[i];
    row.R = R;
    row.sigma_or_N = n_mean;
    row.M = cfg.M;
    row.E = 0.5;
    row.norm = norm_mean;
    row.ratio = worst;
    row.details = {{"mean_ratio", mean}, {"trials", trials}, {"separation", 0.5}, {"grid", grid_json(grid)}};
  }
  std::vector<std::size_t> rows(out.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() >= 3) apply_fit(out, "max ratio vs R", rows, &ExperimentRow::R, &ExperimentRow::ratio);
  return out;
}

ExperimentResult partition_balance(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const auto Rs = or_default(cfg.R, {32});
  const std::vector<int> Ds = cfg.D.empty() ? std::vector<int>{1, 3, 5} : cfg.D;
  for (double R : Rs)
    for (int kind = 0; kind < 2; ++kind)
      for (int D : Ds) {
        const auto lat = SpaceTimeLattice::uniform(1, R, 256, 128);
        MassField W{lat, std::vector<double>(lat.size(), 1.0)};
        if (kind == 1) {
          std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(D));
          std::uniform_real_distribution<double> u(0, 1);
          for (double& v : W.values) v = u(rng);
        }
        PartitionOptions opts;
        opts.bisection.seed = cfg.seed;
        const auto res = polynomial_partition(W, D, 1.0, R, opts);
        double smallest = std::numeric_limits<double>::infinity(), residual = 0.0;
        for (const auto& c : res.cells) smallest = std::min(smallest, c.mass / res.total_mass);
        for (const auto& step : res.residuals)
          for (double g : step) residual = std::max(residual, std::abs(g));
        ExperimentRow row;
        row.R = R;
        row.sigma_or_N = static_cast<double>(res.cells.size());
        row.M = res.steps;
        row.E = D;
        row.norm = smallest * std::pow(2.0, res.steps);
        row.ratio = residual;
        row.details = {{"mass", kind == 0 ? "uniform" : "random"}, {"tie_mass", res.tie_mass},
                       {"lattice", {{"dim", 1}, {"R", R}, {"nx", 256}, {"nt", 128}}}};
        out.rows.push_back(row);
      }
  return out;
}

ExperimentResult crossing_bound(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::vector<int> Ds = cfg.D.empty() ? std::vector<int>{2, 3, 4} : cfg.D;
  const int trials = cfg.trials > 0 ? cfg.trials : 1000;
  const double R = cfg.R.empty() ? 16.0 : cfg.R.front();
  const Chart chart = Chart::for_box(R);
  for (int D : Ds) {
    std::mt19937_64 rng(cfg.seed + 31 * static_cast<std::uint64_t>(D));
    std::uniform_real_distribution<double> u(-1, 1);
    std::normal_distribution<double> normal;
    std::size_t most = 0, violations = 0, degenerate = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const int dim = 1 + trial % 2;
      PartitionPolynomial P{dim, D, {}};
      for (int left = D; left > 0;) {
        const int d = 1 + static_cast<int>(rng() % static_cast<unsigned>(left));
        std::vector<double> c(Polynomial::basis_size(dim, d));
        for (double& v : c) v = normal(rng);
        P.factors.emplace_back(dim, d, c, chart);
        left -= d;
      }
      const Line line{{R * u(rng), dim == 1 ? 0.0 : R * u(rng), R * (0.5 + 0.5 * u(rng))},
                      {u(rng), dim == 1 ? 0.0 : u(rng), u(rng)}};
      const auto cross = cells_entered_by_line(P, line, Box::for_scale(dim, R));
      if (cross.degenerate) {
        ++degenerate;
        continue;
      }
      most = std::max(most, cross.cells);
      violations += cross.cells > static_cast<std::size_t>(D + 1);
    }
    ExperimentRow row;
    row.R = R;
    row.sigma_or_N = trials;
    row.M = 1;
    row.E = D;
    row.norm = static_cast<double>(most);
    row.ratio = static_cast<double>(most) - (D + 1);
    row.details = {{"violations", violations}, {"degenerate", degenerate}};
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

PacketSpreadExample build_packet_spread(std::size_t sigma, double R, std::uint64_t seed) {
  require(sigma >= 1, ErrorCode::kInvalidArgument, "sigma must be >= 1");
  const double side = std::sqrt(R);
  if (static_cast<double>(sigma) > side)
    fail(ErrorCode::kTooManyPackets, std::to_string(sigma) + " packets do not fit beside each other at R = " +
                                         std::to_string(R));
  const GridSpec grid = GridSpec::make(1, R);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  // |g|^2 has standard deviation s0 with s0^2 = R/2, which minimizes the largest
  // width over [0, R] once the packet focuses at R/2.
  const double s0 = std::sqrt(R / 2);
  const double span = 2 * R - 2 * side;
  SpectralField g(grid);
  std::vector<Tube> tubes;
  for (std::size_t i = 0; i < sigma; ++i) {
    const double x0 = sigma == 1 ? 0.0 : -span / 2 + span * static_cast<double>(i) / static_cast<double>(sigma - 1);
    std::vector<cplx> samples(grid.spatial_size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double d = grid.coord(j) - x0;
      samples[j] = std::exp(-d * d / (4 * s0 * s0));
    }
    SpectralField p = SpectralField::from_samples(grid, samples);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double xi = p.frequency(k)[0];
      p[k] *= std::polar(1.0, -0.5 * R * xi * xi);
    }
    p *= std::polar(1.0 / p.l2_norm(), phase(rng));
    g += p;
    Tile tile;
    tile.R = R;
    tile.nu_center = {x0, 0.0};
    Tube tube = tube_of(tile, 0.05);
    tube.radius = side / 2;
    tubes.push_back(tube);
  }
  g *= cplx{1.0 / g.l2_norm(), 0.0};
  g.support = {{0.0, 0.0}, std::min(1.0, 12.0 / s0)};

  std::vector<double> lo(sigma, std::numeric_limits<double>::infinity()), hi(sigma, 0.0);
  SlicePropagator prop(g);
  for (double t : grid.time_samples()) {
    const auto u = prop.at(t);
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double x = grid.coord(j);
      for (std::size_t i = 0; i < sigma; ++i)
        if (std::abs(x - tubes[i].axis(t)[0]) <= side / 4) {
          lo[i] = std::min(lo[i], std::abs(u[j]));
          hi[i] = std::max(hi[i], std::abs(u[j]));
        }
    }
  }
  double variation = 0.0;
  for (std::size_t i = 0; i < sigma; ++i) variation = std::max(variation, hi[i] / lo[i]);
  CubeUnion Y = cubes_along_tubes(1, R, tubes);
  return PacketSpreadExample{sigma, R, std::move(g), std::move(tubes), std::move(Y), variation};
}

std::size_t shared_tube_points(const GridSpec& grid, std::span<const Tube> tubes) {
  std::size_t shared = 0;
  for (double t : grid.time_samples())
    for (std::size_t j = 0; j < grid.spatial_size(); ++j) {
      const Point x = grid.point(j);
      int inside = 0;
      for (const Tube& tube : tubes) inside += tube.contains(x, t);
      shared += inside >= 2;
    }
  return shared;
}

SparseFocusingExample build_sparse_focusing(double R, const SparseFocusingOptions& options) {
  require(is_power_of_two(R) && R >= 256, ErrorCode::kInvalidArgument, "R must be a power of 2 with R >= 256");
  require(options.resolution > 0 && options.resolution <= 1, ErrorCode::kInvalidArgument,
          "resolution must lie in (0, 1]");
  const GridSpec grid = GridSpec::make(1, R, std::numbers::pi / options.resolution);
  const double dk = grid.dk();
  const auto step = std::max<long>(1, std::lround(options.spacing_factor * std::pow(R, -0.25) / dk));
  const double a = static_cast<double>(step) * dk;
  const long M = static_cast<long>(std::floor(1.0 / a + 1e-9));

  std::vector<cplx> samples(grid.spatial_size());
  for (std::size_t j = 0; j < samples.size(); ++j)
    for (long m = -M; m <= M; ++m) samples[j] += std::polar(1.0, static_cast<double>(m) * a * grid.coord(j));
  SpectralField g = SpectralField::from_samples(grid, samples);
  g.support = {{0.0, 0.0}, static_cast<double>(M) * a};

  double mass = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double x = grid.coord(j);
    if (x >= 0 && x < R) mass += std::norm(samples[j]) * grid.dx();
  }

  const auto n = static_cast<std::size_t>(R);
  std::vector<float> square_max(n * n, 0.0f);
  SlicePropagator prop(g);
  for (double t : grid.time_samples()) {
    const auto s_index = std::min(static_cast<std::size_t>(t), n - 1);
    const auto u = prop.at(t);
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double x = grid.coord(j);
      if (x < 0 || x >= R) continue;
      float& cell = square_max[s_index * n + static_cast<std::size_t>(x)];
      cell = std::max(cell, static_cast<float>(std::abs(u[j])));
    }
  }
  const double H = *std::max_element(square_max.begin(), square_max.end());
  std::vector<UnitSquare> X;
  const double side = std::sqrt(R);
  std::map<std::pair<long, long>, std::size_t> balls;
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t y = 0; y < n; ++y)
      if (square_max[s * n + y] >= options.threshold * H) {
        X.push_back({static_cast<int>(y), static_cast<int>(s)});
        ++balls[{static_cast<long>((y + 0.5) / side), static_cast<long>((s + 0.5) / side)}];
      }
  std::size_t density = 0;
  for (const auto& [key, count] : balls) density = std::max(density, count);
  if (static_cast<double>(X.size()) < std::pow(R, 1.5) / 16)
    fail(ErrorCode::kConstructionDegenerate, "|X| = " + std::to_string(X.size()) +
                                                 " is below R^{3/2}/16; adjust spacing_factor or threshold");
  return SparseFocusingExample{R,       std::move(g), static_cast<std::size_t>(2 * M + 1), a, std::move(X),
                               H,       std::sqrt(mass), density, std::move(square_max)};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sigma_law",    "focusing_law",      "decoupling_growth",
                                              "bilinear_law", "partition_balance", "crossing_bound"};
  return names;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult out;
  if (config.name == "sigma_law") out = sigma_law(config);
  else if (config.name == "focusing_law") out = focusing_law(config);
  else if (config.name == "decoupling_growth") out = decoupling_growth(config);
  else if (config.name == "bilinear_law") out = bilinear_law(config);
  else if (config.name == "partition_balance") out = partition_balance(config);
  else if (config.name == "crossing_bound") out = crossing_bound(config);
  else fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + config.name + "'");
  out.name = config.name;
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : out.fits)
    fits.push_back({{"label", f.label}, {"slope", f.fit.slope}, {"intercept", f.fit.intercept},
                    {"max_residual", f.fit.max_residual}});
  out.summary = {{"experiment", out.name}, {"rows", out.rows.size()}, {"fits", fits}};
  return out;
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "R,sigma_or_N,M,E,norm,ratio,fitted_slope\n";
  char buf[64];
  for (const auto& row : result.rows) {
    const double cols[] = {row.R, row.sigma_or_N, row.M, row.E, row.norm, row.ratio, row.fitted_slope};
    for (std::size_t c = 0; c < 7; ++c) {
      if (std::isnan(cols[c])) std::snprintf(buf, sizeof buf, "nan");
      else std::snprintf(buf, sizeof buf, "%.12g", cols[c]);
      os << buf << (c + 1 < 7 ? ',' : '\n');
    }
  }
  return os.str();
}

}  // namespace schro
