// Acceptance checks: one pass/fail line per criterion. Run with a criterion
// number (1-12) or with no argument for all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "schro/error.hpp"
#include "schro/examples.hpp"
#include "schro/field.hpp"
#include "schro/parallel.hpp"
#include "schro/partition.hpp"
#include "schro/refined.hpp"
#include "schro/wavepacket.hpp"

namespace {

using namespace schro;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Independent quadrature: sqrt(sum |v|^2 * cell volume).
double grid_norm(std::span<const cplx> v, double cell) {
  long double sum = 0;
  for (const auto& z : v) sum += std::norm(z);
  return std::sqrt(static_cast<double>(sum) * cell);
}

double cell_volume(const GridSpec& g) { return std::pow(g.dx(), g.dim); }

// Least squares of ln(value) on ln(scale), written out independently of fit_exponent.
std::pair<double, double> refit(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [s, v] : pts) {
    const double x = std::log(s), y = std::log(v);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double worst = 0;
  for (const auto& [s, v] : pts) worst = std::max(worst, std::abs(std::log(v) - intercept - slope * std::log(s)));
  return {slope, worst};
}

Outcome unitarity() {
  constexpr double kTol = 1e-10;
  double worst = 0;
  for (int dim : {1, 2}) {
    const GridSpec g = GridSpec::make(dim, dim == 1 ? 1024 : 256);
    const auto times = g.time_samples();
    std::mt19937_64 rng(100 + dim);
    for (int draw = 0; draw < 50; ++draw) {
      const SpectralField f = random_band_limited(g, rng);
      const double base = grid_norm(f.samples(), cell_volume(g));
      SlicePropagator prop(f);
      for (double t : times) worst = std::max(worst, std::abs(grid_norm(prop.at(t), cell_volume(g)) - base) / base);
    }
  }
  return {worst <= kTol, fmt("max relative L2 drift %.3g (tolerance %.0e)", worst, kTol)};
}

Outcome round_trip() {
  constexpr double kTol = 1e-6, kFrameSpread = 2.0;
  double worst = 0, spread = 1;
  for (int dim : {1, 2}) {
    const GridSpec g = GridSpec::make(dim, 256);
    const WavePacketFrame frame = WavePacketFrame::make(g, 0.125);
    std::mt19937_64 rng(200 + dim);
    double lo = INFINITY, hi = 0;
    for (int draw = 0; draw < 20; ++draw) {
      const SpectralField f = random_band_limited(g, rng);
      const CoefficientSet c = decompose(f, frame);
      const auto a = f.samples(), b = reconstruct(c).samples();
      std::vector<cplx> diff(a.size());
      for (std::size_t j = 0; j < a.size(); ++j) diff[j] = b[j] - a[j];
      const double norm = grid_norm(a, cell_volume(g));
      worst = std::max(worst, grid_norm(diff, cell_volume(g)) / norm);
      const double ratio = c.l2_mass() / (norm * norm);
      lo = std::min(lo, ratio), hi = std::max(hi, ratio);
    }
    spread = std::max(spread, hi / lo);
  }
  return {worst <= kTol && spread <= kFrameSpread,
          fmt("max round-trip error %.3g (tolerance %.0e); frame ratio spread %.6f (limit %.0f)", worst, kTol,
              spread, kFrameSpread)};
}

Outcome tube_localization() {
  constexpr double kTol = 0.99, kDelta = 0.05, kSeconds = 120;
  const auto start = std::chrono::steady_clock::now();
  double mass = 1, cap = 1;
  std::mt19937_64 rng(300);
  for (int k = 0; k < 20; ++k) {
    const int dim = 1 + k % 2;
    const GridSpec g = GridSpec::make(dim, 256);
    const WavePacketFrame frame = WavePacketFrame::make(g, 0.125);
    const int imax = static_cast<int>(0.75 / frame.theta_spacing);
    const int jmax = static_cast<int>(0.5 * g.R / frame.nu_spacing);
    std::uniform_int_distribution<int> ti(-imax, imax), ni(-jmax, jmax);
    const Tile tile = make_tile(frame, {ti(rng), dim == 2 ? ti(rng) : 0}, {ni(rng), dim == 2 ? ni(rng) : 0});
    mass = std::min(mass, tube_mass_fraction(tile, frame, g, kDelta).fraction);
    cap = std::min(cap, frequency_cap_check(tile, frame, g));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mass >= kTol && cap >= kTol && seconds <= kSeconds,
          fmt("min tube mass fraction %.4f, min frequency cap share %.4f (need %.2f); %.1f s (limit %.0f s)", mass,
              cap, kTol, seconds, kSeconds)};
}

Outcome partition_balance() {
  constexpr double kShare = 0.8, kResidual = 1e-3;
  const double R = 32;
  double worst_share = INFINITY, worst_residual = 0;
  bool schedule_ok = true;
  for (int kind = 0; kind < 2; ++kind) {
    const auto lattice = SpaceTimeLattice::uniform(1, R, 256, 128);
    MassField W{lattice, std::vector<double>(lattice.size(), 1.0)};
    std::mt19937_64 rng(400 + kind);
    std::uniform_real_distribution<double> u(0, 1);
    if (kind == 1)
      for (double& v : W.values) v = u(rng);
    for (int s = 1; s <= 3; ++s) {
      const int D = 2 * s - 1;
      schedule_ok = schedule_ok && partition_steps(1, D) == s;
      PartitionOptions opts;
      opts.bisection.seed = 410 + static_cast<std::uint64_t>(s);
      const PartitionResult res = polynomial_partition(W, D, 1.0, R, opts);
      schedule_ok = schedule_ok && res.steps == s;
      // Cell masses recomputed from the sign vectors, not from the stored masks.
      std::vector<double> mass(std::size_t{1} << s, 0.0);
      double total = 0;
      for (std::size_t i = 0; i < lattice.size(); ++i) {
        total += W.values[i];
        if (const auto cell = res.polynomial.cell_of(lattice.point(i))) mass[*cell] += W.values[i];
      }
      for (double m : mass) worst_share = std::min(worst_share, m / total * std::pow(2.0, s));
      for (const auto& step : res.residuals)
        for (double r : step) worst_residual = std::max(worst_residual, std::abs(r));
    }
  }
  return {schedule_ok && worst_share >= kShare && worst_residual <= kResidual,
          fmt("min cell share %.4f x 2^-s (need %.1f); max bisection residual %.2e (limit %.0e)%s", worst_share,
              kShare, worst_residual, kResidual, schedule_ok ? "" : "; step schedule mismatch")};
}

Outcome crossing_bound() {
  const double R = 16;
  const Chart chart = Chart::for_box(R);
  std::size_t violations = 0, oracle_violations = 0, degenerate = 0, disagreements = 0, trials = 0;
  for (int D : {2, 3, 4}) {
    std::mt19937_64 rng(500 + static_cast<std::uint64_t>(D));
    std::uniform_real_distribution<double> u(-1, 1);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 1000; ++trial, ++trials) {
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
      const Box box = Box::for_scale(dim, R);
      const auto cross = cells_entered_by_line(P, line, box);
      if (cross.degenerate) {
        ++degenerate;
        continue;
      }
      violations += cross.cells > static_cast<std::size_t>(D + 1);

      // Oracle: dense samples of the clipped segment, counting distinct cells met.
      double s0 = -INFINITY, s1 = INFINITY;
      for (int a = 0; a < 3; ++a) {
        if (line.direction[a] == 0) continue;
        double p = (box.lo[a] - line.origin[a]) / line.direction[a];
        double q = (box.hi[a] - line.origin[a]) / line.direction[a];
        if (p > q) std::swap(p, q);
        s0 = std::max(s0, p), s1 = std::min(s1, q);
      }
      std::set<unsigned> met;
      for (int k = 0; s0 < s1 && k <= 20000; ++k) {
        const double s = s0 + (s1 - s0) * k / 20000;
        const STPoint z{line.origin[0] + s * line.direction[0], line.origin[1] + s * line.direction[1],
                        line.origin[2] + s * line.direction[2]};
        if (const auto cell = P.cell_of(z)) met.insert(*cell);
      }
      const std::size_t sampled = met.size();
      oracle_violations += sampled > static_cast<std::size_t>(D + 1);
      disagreements += sampled > cross.cells;
    }
  }
  return {violations == 0 && oracle_violations == 0 && disagreements == 0,
          fmt("%zu trials: %zu violations of count <= D+1 (sampled oracle: %zu, oracle above solver: %zu), %zu "
              "degenerate lines skipped",
              trials, violations, oracle_violations, disagreements, degenerate)};
}

Outcome orthogonality_budget_check() {
  constexpr double kFactor = 4.0;
  const double R = 256;
  const GridSpec grid = GridSpec::make(1, R);
  const WavePacketFrame frame = WavePacketFrame::make(grid, 0.125);
  std::mt19937_64 rng(600);
  double worst = 0, total_error = 0;
  for (int draw = 0; draw < 20; ++draw) {
    const SpectralField f = random_band_limited(grid, rng);
    const CoefficientSet coeffs = decompose(f, frame);
    const auto tubes = tubes_of(coeffs, 0.05);
    const MassField W = mass_from_field(propagate(f), 2.0);
    const double norm = grid_norm(f.samples(), cell_volume(grid));
    for (int D : {2, 4}) {
      PartitionOptions opts;
      opts.bisection.seed = 610 + static_cast<std::uint64_t>(draw);
      const PartitionResult part = polynomial_partition(W, D, 1.0, R, opts);
      const Wall wall = wall_region(part.polynomial, R, 0.05);
      const auto inc = tube_cell_incidence(tubes, wall);
      const auto budget = orthogonality_budget(coeffs, tubes, inc, D, static_cast<unsigned>(part.cells.size()));
      worst = std::max(worst, budget.sum / (D * norm * norm));
      total_error = std::max(total_error, std::abs(budget.total - norm * norm) / (norm * norm));
    }
  }
  return {worst <= kFactor && total_error <= 1e-9,
          fmt("max sum ||f_i||^2 / (D ||f||^2) = %.4f (limit %.0f); ||f||^2 quadrature mismatch %.2e", worst,
              kFactor, total_error)};
}

Outcome fitted_law(const char* name, const ExperimentResult& res, double lo, double hi, double residual_limit,
                   double seconds, double time_limit, const std::string& extra, bool extra_ok) {
  if (res.fits.empty()) return {false, "no fit produced"};
  const auto& fit = res.fits.front().fit;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [x, y] : fit.log_points) pts.emplace_back(std::exp(x), std::exp(y));
  const auto [slope, resid] = refit(pts);
  const bool agrees = std::abs(slope - fit.slope) <= 1e-9 && std::abs(resid - fit.max_residual) <= 1e-9;
  const bool pass = fit.slope >= lo && fit.slope <= hi && fit.max_residual <= residual_limit &&
                    seconds <= time_limit && agrees && extra_ok;
  return {pass, fmt("%s slope %.4f (window [%.4f, %.4f]), max residual %.4f (limit %.2f), independent refit %s; "
                    "%.1f s (limit %.0f s)%s",
                    name, fit.slope, lo, hi, fit.max_residual, residual_limit, agrees ? "agrees" : "DISAGREES",
                    seconds, time_limit, extra.c_str())};
}

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Outcome sigma_law() {
  ExperimentConfig cfg;
  cfg.name = "sigma_law";
  const auto start = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg);
  const double third = 1.0 / 3.0;
  return fitted_law("norm vs sigma", res, -third - 0.1, -third + 0.1, 0.15, since(start), 600, "", true);
}

Outcome focusing_law() {
  ExperimentConfig cfg;
  cfg.name = "focusing_law";
  const auto start = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg);
  const double seconds = since(start);
  bool ok = res.rows.size() == 4;
  std::string extra;
  for (const auto& row : res.rows) {
    const double target = std::pow(row.R, 1.5);
    const double density = row.details["per_ball_density"].get<double>() / std::sqrt(row.R);
    ok = ok && row.sigma_or_N >= target / 4 && row.sigma_or_N <= 4 * target && density <= 4;
    extra += fmt("; R=%g |X|/R^1.5=%.3f density/R^0.5=%.2f", row.R, row.sigma_or_N / target, density);
  }
  const double slope = -5.0 / 12.0;
  return fitted_law("H/||g|| vs R", res, slope - 0.08, slope + 0.08, INFINITY, seconds, 900, extra, ok);
}

Outcome decoupling_growth() {
  ExperimentConfig cfg;
  cfg.name = "decoupling_growth";
  const auto start = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg);
  bool ok = res.rows.size() == 5;
  for (const auto& row : res.rows) ok = ok && row.E == 20;
  return fitted_law("decoupling ratio vs R", res, -INFINITY, 0.1, INFINITY, since(start), INFINITY,
                    ok ? "" : "; wrong trial count", ok);
}

Outcome rescaling_identity() {
  constexpr double kTol = 1e-3;
  const GridSpec g = GridSpec::make(2, 64, 3.0);
  double worst = 0;
  std::string values;
  for (double M : {2.0, 4.0}) {
    const Point xi0{g.dk() * 8, g.dk() * 5};
    SpectralField f(g);
    const double width = 1 / (4 * M), radius = 1 / M;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const Point xi = f.frequency(k);
      const double r2 = (xi[0] - xi0[0]) * (xi[0] - xi0[0]) + (xi[1] - xi0[1]) * (xi[1] - xi0[1]);
      if (r2 <= radius * radius) f[k] = std::exp(-r2 / (2 * width * width));
    }
    const RescaledField r = parabolic_rescale(f, xi0, M);
    const auto t = g.time_samples();
    std::vector<double> rt(t.size());
    for (std::size_t m = 0; m < t.size(); ++m) rt[m] = t[m] / (M * M);
    // Independent L^6 quadrature: trapezoid in time, dx^2 in space.
    auto l6 = [](const SpectralField& h, const std::vector<double>& times) {
      const SpaceTimeField u = propagate(h, times);
      const double cell = std::pow(h.grid().dx(), 2);
      long double sum = 0;
      for (std::size_t m = 0; m < times.size(); ++m) {
        const double w = (m > 0 ? (times[m] - times[m - 1]) / 2 : 0.0) +
                         (m + 1 < times.size() ? (times[m + 1] - times[m]) / 2 : 0.0);
        for (const auto& z : u.slice(m)) sum += std::pow(std::norm(z), 3) * w * cell;
      }
      return std::pow(static_cast<double>(sum), 1.0 / 6);
    };
    const double ratio = l6(f, t) / l6(r.g, rt);
    const double expected = std::pow(M, -1.0 / 3.0);
    worst = std::max(worst, std::abs(ratio - expected));
    values += fmt("; M=%g ratio %.9f vs %.9f", M, ratio, expected);
  }
  return {worst <= kTol, fmt("max |ratio - M^-1/3| = %.2e (tolerance %.0e)%s", worst, kTol, values.c_str())};
}

Outcome pigeonhole_guarantee() {
  std::mt19937_64 rng(1100);
  std::uniform_int_distribution<int> log_r(2, 14), size(1, 4000), shape(0, 3);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = INFINITY;
  std::size_t failures = 0;
  for (int set = 0; set < 100; ++set) {
    const double R = std::ldexp(1.0, log_r(rng));
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    const int kind = shape(rng);
    for (double& x : v) {
      switch (kind) {
        case 0: x = u(rng); break;
        case 1: x = std::pow(10.0, -40 * u(rng)); break;           // spans the floor
        case 2: x = u(rng) < 0.01 ? 1e6 * u(rng) : u(rng); break;  // a few heavy items
        default: x = u(rng) < 0.3 ? 0.0 : std::exp2(-std::floor(30 * u(rng)));  // exact powers of 2 and zeros
      }
    }
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; })) v[0] = 1;
    const auto res = dyadic_pigeonhole(v, R);
    double total = 0, kept = 0;
    for (double x : v) total += x;
    for (std::size_t i : res.selected.members) kept += v[i];
    const double bound = 1 / (2 * std::log2(std::pow(R, 20.0)));
    worst = std::min(worst, kept / total / bound);
    failures += kept < bound * total;
  }
  return {failures == 0, fmt("100 value sets: %zu below the guarantee; min retained / guaranteed share %.3f", failures,
                             worst)};
}

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  for (const auto& name : experiment_names()) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.seed = 1234;
    if (name == "decoupling_growth") {
      cfg.R = {256, 512, 1024};
      cfg.trials = 4;
    }
    configs.push_back(cfg);
  }
  std::string mismatched;
  for (const auto& cfg : configs) {
    set_thread_count(1);
    const std::string a = to_csv(run_experiment(cfg));
    set_thread_count(4);
    const std::string b = to_csv(run_experiment(cfg));
    if (a != b || a.empty()) mismatched += " " + cfg.name;
  }
  set_thread_count(0);
  return {mismatched.empty(), mismatched.empty()
                                  ? fmt("%zu experiments byte-identical across repeated runs (1 and 4 threads)",
                                        configs.size())
                                  : "CSV differs for:" + mismatched};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "unitarity", unitarity},
      {2, "wave-packet round trip", round_trip},
      {3, "tube localization", tube_localization},
      {4, "partition balance", partition_balance},
      {5, "crossing bound", crossing_bound},
      {6, "orthogonality budget", orthogonality_budget_check},
      {7, "sigma law", sigma_law},
      {8, "focusing law", focusing_law},
      {9, "decoupling growth", decoupling_growth},
      {10, "rescaling identity", rescaling_identity},
      {11, "pigeonhole guarantee", pigeonhole_guarantee},
      {12, "determinism", determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  bool all_pass = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    std::printf("criterion %d (%s): %s: %s [%.1f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                since(start));
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
