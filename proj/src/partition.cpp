#include "schro/partition.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>

#include "schro/error.hpp"
#include "schro/parallel.hpp"

namespace schro {

namespace {

constexpr double kTie = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dist3(const STPoint& a, const STPoint& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// Per-weight data for the bisection solver.
struct Prepared {
  std::vector<double> basis;     // rows of basis values, K per point
  std::vector<double> b;         // time weight * W^r
  std::vector<std::uint32_t> group;  // compact spatial column per point
  std::size_t groups = 0;
  double mass = 0.0;
};

Prepared prepare(const SpaceTimeLattice& lat, const LatticeWeight& w, const Polynomial& shape,
                 double r) {
  Prepared p;
  const std::size_t K = shape.coeffs().size();
  const std::size_t np = lat.spatial_size();
  std::map<std::uint32_t, std::uint32_t> column;
  p.basis.resize(w.index.size() * K);
  p.b.resize(w.index.size());
  p.group.resize(w.index.size());
  std::vector<double> col_sum;
  for (std::size_t i = 0; i < w.index.size(); ++i) {
    const std::uint32_t idx = w.index[i];
    const auto x = static_cast<std::uint32_t>(idx % np);
    auto [it, fresh] = column.emplace(x, static_cast<std::uint32_t>(column.size()));
    if (fresh) col_sum.push_back(0.0);
    p.group[i] = it->second;
    p.b[i] = lat.time_weight[idx / np] * std::pow(w.value[i], r);
    col_sum[it->second] += p.b[i];
    shape.basis_values(shape.chart().to_unit(lat.point(idx)), &p.basis[i * K]);
  }
  p.groups = column.size();
  for (double s : col_sum) p.mass += lat.spatial_weight * std::pow(s, 1.0 / r);
  return p;
}

// Relative signed mass differences (and optionally the Jacobian) for the
// coefficient vector c. eps > 0 uses the smoothed indicator, eps == 0 the hard one.
void residual(const std::vector<Prepared>& weights, const Eigen::VectorXd& c, double r, double eps,
              double spatial_weight, Eigen::VectorXd& g, Eigen::MatrixXd* J) {
  const std::size_t K = static_cast<std::size_t>(c.size());
  g.resize(static_cast<Eigen::Index>(weights.size()));
  if (J) J->setZero(static_cast<Eigen::Index>(weights.size()), static_cast<Eigen::Index>(K));
  std::vector<double> plus, minus, P, fprime;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const Prepared& w = weights[j];
    const std::size_t n = w.b.size();
    plus.assign(w.groups, 0.0);
    minus.assign(w.groups, 0.0);
    P.resize(n);
    fprime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      const double* row = &w.basis[i * K];
      for (std::size_t k = 0; k < K; ++k) v += row[k] * c[static_cast<Eigen::Index>(k)];
      P[i] = v;
      double fp, fm;
      if (eps > 0) {
        const double th = std::tanh(v / eps);
        fp = 0.5 * (1 + th);
        fm = 0.5 * (1 - th);
        fprime[i] = 0.5 * (1 - th * th) / eps;
      } else {
        fp = v > kTie ? 1.0 : 0.0;
        fm = v < -kTie ? 1.0 : 0.0;
        fprime[i] = 0.0;
      }
      plus[w.group[i]] += w.b[i] * fp;
      minus[w.group[i]] += w.b[i] * fm;
    }
    double G = 0.0;
    for (std::size_t q = 0; q < w.groups; ++q)
      G += spatial_weight * (std::pow(plus[q], 1.0 / r) - std::pow(minus[q], 1.0 / r));
    g[static_cast<Eigen::Index>(j)] = G / w.mass;
    if (!J) continue;
    std::vector<double> alpha(w.groups);
    for (std::size_t q = 0; q < w.groups; ++q) {
      const double floor = 1e-300;
      alpha[q] = (std::pow(std::max(plus[q], floor), 1.0 / r - 1.0) +
                  std::pow(std::max(minus[q], floor), 1.0 / r - 1.0)) / r;
      if (r == 1.0) alpha[q] = 2.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (fprime[i] < 1e-300) continue;
      const double s = spatial_weight * alpha[w.group[i]] * w.b[i] * fprime[i] / w.mass;
      const double* row = &w.basis[i * K];
      for (std::size_t k = 0; k < K; ++k) (*J)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) += s * row[k];
    }
  }
}

// Largest share of a weight sitting on lattice points where |P| <= kTie.
double tie_share(const std::vector<Prepared>& weights, const Eigen::VectorXd& c, double r,
                 double spatial_weight) {
  const std::size_t K = static_cast<std::size_t>(c.size());
  double worst = 0.0;
  for (const Prepared& w : weights) {
    std::vector<double> col(w.groups, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < w.b.size(); ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < K; ++k) v += w.basis[i * K + k] * c[static_cast<Eigen::Index>(k)];
      if (std::abs(v) <= kTie) {
        col[w.group[i]] += w.b[i];
        any = true;
      }
    }
    if (!any) continue;
    double m = 0.0;
    for (double s : col) m += spatial_weight * std::pow(s, 1.0 / r);
    worst = std::max(worst, m / w.mass);
  }
  return worst;
}

Eigen::VectorXd newton_direction(const Eigen::MatrixXd& J, const Eigen::VectorXd& g,
                                 const Eigen::VectorXd& c) {
  Eigen::MatrixXd A(J.rows() + 1, J.cols());
  A.topRows(J.rows()) = J;
  A.row(J.rows()) = c.transpose();
  Eigen::VectorXd rhs(J.rows() + 1);
  rhs.head(J.rows()) = -g;
  rhs[J.rows()] = 0.0;
  return A.completeOrthogonalDecomposition().solve(rhs);
}

std::vector<std::ptrdiff_t> axis_counts(const Box& box, double spacing, int dim) {
  std::vector<std::ptrdiff_t> n(3, 1);
  for (int a : {0, 1, 2}) {
    if (a == 1 && dim == 1) continue;
    n[a] = static_cast<std::ptrdiff_t>(std::ceil((box.hi[a] - box.lo[a]) / spacing)) + 1;
  }
  return n;
}

bool nonsingular_on_box(const Polynomial& p, const Box& box, double threshold) {
  PartitionPolynomial single{p.dim(), p.degree(), {p}};
  const double spacing = (box.hi[2] - box.lo[2]) / 48.0;
  for (const ZeroSample& z : sample_zero_set(single, box, spacing)) {
    const STPoint g = p.gradient_unit(p.chart().to_unit(z.z));
    if (std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) < threshold) return false;
  }
  return true;
}

}  // namespace

SpaceTimeLattice SpaceTimeLattice::uniform(int dim, double R, std::size_t nx, std::size_t nt) {
  SpaceTimeLattice lat;
  lat.dim = dim;
  const double hx = 2 * R / static_cast<double>(nx);
  const double ht = R / static_cast<double>(nt);
  for (std::size_t i = 0; i < nx; ++i) lat.axis.push_back(-R + (static_cast<double>(i) + 0.5) * hx);
  for (std::size_t m = 0; m < nt; ++m) lat.times.push_back((static_cast<double>(m) + 0.5) * ht);
  lat.time_weight.assign(nt, ht);
  lat.spatial_weight = std::pow(hx, dim);
  return lat;
}

STPoint SpaceTimeLattice::point(std::size_t index) const noexcept {
  const std::size_t np = spatial_size();
  const std::size_t x = index % np;
  const double t = times[index / np];
  if (dim == 1) return {axis[x], 0.0, t};
  return {axis[x / axis.size()], axis[x % axis.size()], t};
}

double MassField::mixed_mass(double r, std::span<const std::uint8_t> members) const {
  const std::size_t np = lattice.spatial_size();
  std::vector<double> col(np, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!members.empty() && !members[i]) continue;
    col[i % np] += lattice.time_weight[i / np] * std::pow(values[i], r);
  }
  double acc = 0.0;
  for (double s : col)
    if (s > 0) acc += lattice.spatial_weight * std::pow(s, 1.0 / r);
  return acc;
}

MassField mass_from_field(const SpaceTimeField& u, double p, const Region* region,
                          std::size_t space_stride, std::size_t time_stride) {
  const GridSpec& g = u.grid();
  require(space_stride >= 1 && time_stride >= 1, ErrorCode::kInvalidArgument, "strides must be >= 1");
  std::vector<std::size_t> keep_axis;
  for (std::size_t j = 0; j < g.nx; j += space_stride)
    if (std::abs(g.coord(j)) <= g.R) keep_axis.push_back(j);
  MassField W;
  W.lattice.dim = g.dim;
  for (std::size_t j : keep_axis) W.lattice.axis.push_back(g.coord(j));
  std::vector<std::size_t> keep_time;
  for (std::size_t m = 0; m < u.num_times(); m += time_stride) keep_time.push_back(m);
  const auto tw = time_weights(u.times());
  for (std::size_t m : keep_time) {
    W.lattice.times.push_back(u.times()[m]);
    W.lattice.time_weight.push_back(tw[m] * static_cast<double>(time_stride));
  }
  W.lattice.spatial_weight = std::pow(g.dx() * static_cast<double>(space_stride), g.dim);
  const double r2 = g.R * g.R;
  for (std::size_t m : keep_time) {
    for (std::size_t a = 0; a < keep_axis.size(); ++a) {
      for (std::size_t b = 0; b < (g.dim == 1 ? 1 : keep_axis.size()); ++b) {
        const std::size_t x = g.dim == 1 ? keep_axis[a] : keep_axis[a] * g.nx + keep_axis[b];
        const Point pt = g.point(x);
        const bool in = norm_sq(pt, g.dim) <= r2 && (!region || region->contains(x, m));
        W.values.push_back(in ? std::pow(std::abs(u.at(x, m)), p) : 0.0);
      }
    }
  }
  return W;
}

int PartitionPolynomial::degree() const noexcept {
  int d = 0;
  for (const auto& f : factors) d += f.degree();
  return d;
}

double PartitionPolynomial::operator()(const STPoint& z) const noexcept {
  double v = 1.0;
  for (const auto& f : factors) v *= f(z);
  return v;
}

std::optional<unsigned> PartitionPolynomial::cell_of(const STPoint& z) const noexcept {
  unsigned id = 0;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const double v = factors[k](z);
    if (std::abs(v) <= kTie) return std::nullopt;
    if (v > 0) id |= 1u << k;
  }
  return id;
}

nlohmann::json PartitionPolynomial::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : factors) fs.push_back(f.to_json());
  return {{"dim", dim}, {"D", D}, {"degree", degree()}, {"factors", fs}};
}

BisectionResult ham_sandwich_bisect(const SpaceTimeLattice& lattice,
                                    std::span<const LatticeWeight> weights, int degree, double r,
                                    const Chart& chart, const BisectionOptions& options) {
  require(r >= 1.0, ErrorCode::kInvalidArgument, "r must be >= 1");
  require(degree >= 1 && degree <= 12, ErrorCode::kInvalidArgument, "degree must lie in [1, 12]");
  const int dim = lattice.dim;
  const std::size_t K = Polynomial::basis_size(dim, degree);
  require(!weights.empty() && weights.size() + 1 <= K, ErrorCode::kInvalidArgument,
          "need 1 <= #weights <= dim(polynomials of degree " + std::to_string(degree) + ") - 1");
  const Polynomial shape(dim, degree, std::vector<double>(K, 0.0), chart);
  std::vector<Prepared> prepared;
  for (const auto& w : weights) {
    prepared.push_back(prepare(lattice, w, shape, r));
    require(prepared.back().mass > 0, ErrorCode::kInvalidArgument, "every weight needs positive mass");
  }
  const Box box{{lattice.axis.front(), dim == 1 ? 0.0 : lattice.axis.front(), lattice.times.front()},
                {lattice.axis.back(), dim == 1 ? 0.0 : lattice.axis.back(), lattice.times.back()}};

  const auto exps = Polynomial::monomials(dim, degree);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  const double sw = lattice.spatial_weight;
  const std::vector<double> schedule{0.5, 0.2, 0.1, 0.05, 0.02, 0.01};
  constexpr std::array<double, 4> kPolishEps{0.01, 0.003, 0.03, 0.001};

  int coordinate_starts = 0;
  for (const auto& e : exps)
    if (e[0] + e[1] + e[2] == 1) ++coordinate_starts;

  for (int attempt = 0; attempt < options.restarts; ++attempt) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    if (attempt < coordinate_starts) {
      c[1 + attempt] = 1.0;
    } else {
      for (std::size_t k = 0; k < K; ++k) c[static_cast<Eigen::Index>(k)] = normal(rng);
    }
    c.normalize();

    Eigen::VectorXd g;
    Eigen::MatrixXd J;
    for (double eps : schedule) {
      for (int it = 0; it < 40; ++it) {
        residual(prepared, c, r, eps, sw, g, &J);
        if (g.cwiseAbs().maxCoeff() <= 0.25 * options.tol) break;
        const Eigen::VectorXd dir = newton_direction(J, g, c);
        const double merit = g.norm();
        bool moved = false;
        for (double step = 1.0; step >= 1.0 / 64; step *= 0.5) {
          Eigen::VectorXd trial = (c + step * dir).normalized();
          Eigen::VectorXd gt;
          residual(prepared, trial, r, eps, sw, gt, nullptr);
          if (gt.norm() < merit) {
            c = trial;
            moved = true;
            break;
          }
        }
        if (!moved) break;
      }
    }

    bool ok = false;
    std::normal_distribution<double> jitter;
    for (int it = 0; it < 60; ++it) {
      residual(prepared, c, r, 0.0, sw, g, nullptr);
      const double worst = g.cwiseAbs().maxCoeff();
      if (worst <= options.tol) {
        ok = true;
        break;
      }
      auto try_move = [&](const Eigen::VectorXd& trial) {
        Eigen::VectorXd gt;
        residual(prepared, trial, r, 0.0, sw, gt, nullptr);
        if (gt.cwiseAbs().maxCoeff() >= worst) return false;
        c = trial;
        return true;
      };
      bool moved = false;
      for (double eps : kPolishEps) {
        Eigen::VectorXd unused;
        residual(prepared, c, r, eps, sw, unused, &J);
        const Eigen::VectorXd dir = newton_direction(J, g, c);
        for (double step = 1.0; step >= 1.0 / 256 && !moved; step *= 0.5)
          moved = try_move((c + step * dir).normalized());
        if (moved) break;
      }
      // The hard residual is piecewise constant; a random nudge can cross the
      // lattice point the Newton model cannot see.
      for (int k = 0; k < 64 && !moved; ++k) {
        const double scale = 1e-2 * std::pow(0.1, k / 32.0);
        Eigen::VectorXd trial = c;
        for (Eigen::Index q = 0; q < trial.size(); ++q) trial[q] += scale * jitter(rng);
        moved = try_move(trial.normalized());
      }
      if (!moved) break;
    }
    if (!ok || tie_share(prepared, c, r, sw) > options.tol) continue;

    Polynomial candidate(dim, degree, std::vector<double>(c.data(), c.data() + c.size()), chart);
    bool distinct = true;
    for (const auto& other : options.avoid)
      if (Polynomial::alignment(candidate, other) > 1 - 1e-9) distinct = false;
    if (!distinct) continue;
    if (!nonsingular_on_box(candidate, box, options.singular_gradient)) continue;

    BisectionResult out{std::move(candidate), {}, attempt + 1};
    out.residuals.assign(g.data(), g.data() + g.size());
    return out;
  }
  double atom = 0.0;
  for (const auto& w : prepared)
    for (std::size_t i = 0; i < w.b.size(); ++i)
      atom = std::max(atom, lattice.spatial_weight * std::pow(w.b[i], 1.0 / r) / w.mass);
  fail(ErrorCode::kBisectionNotFound,
       "no bisecting polynomial of degree " + std::to_string(degree) + " after " +
           std::to_string(options.restarts) + " restarts (largest lattice atom holds " +
           std::to_string(atom) + " of its weight)");
}

nlohmann::json Cell::run_length_mask() const {
  nlohmann::json runs = nlohmann::json::array();
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j]) ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  return runs;
}

int factor_degree(int dim, int step) {
  // One spare coefficient beyond the 2^{k-1} weights leaves a curve of
  // solutions, so the search is not pinned to a lattice-aligned bisector.
  const std::size_t needed = (std::size_t{1} << (step - 1)) + 2;
  int d = 1;
  while (Polynomial::basis_size(dim, d) < needed) ++d;
  return d;
}

int partition_steps(int dim, int D) {
  require(D >= 1, ErrorCode::kInvalidArgument, "D must be >= 1");
  int total = 0, s = 0;
  for (int k = 1; k <= 16; ++k) {
    total += factor_degree(dim, k);
    if (total > D) break;
    s = k;
  }
  return std::max(s, 1);
}

PartitionResult polynomial_partition(const MassField& W, int D, double r, double R,
                                     const PartitionOptions& options) {
  const SpaceTimeLattice& lat = W.lattice;
  require(W.values.size() == lat.size(), ErrorCode::kInvalidArgument, "mass field shape mismatch");
  PartitionResult out;
  out.total_mass = W.mixed_mass(r);
  require(out.total_mass > 0, ErrorCode::kInvalidArgument, "mass field has no mass");
  out.steps = options.steps ? *options.steps : partition_steps(lat.dim, D);
  out.polynomial = PartitionPolynomial{lat.dim, D, {}};
  const Chart chart = Chart::for_box(R);

  std::vector<STPoint> points(lat.size());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = lat.point(i);
  // Cell id per point; -1 for points on the zero set so far.
  std::vector<long> cell(lat.size(), 0);

  for (int step = 1; step <= out.steps; ++step) {
    const std::size_t ncells = std::size_t{1} << (step - 1);
    std::vector<LatticeWeight> weights(ncells);
    for (std::size_t i = 0; i < points.size(); ++i)
      if (cell[i] >= 0 && W.values[i] > 0) {
        weights[static_cast<std::size_t>(cell[i])].index.push_back(static_cast<std::uint32_t>(i));
        weights[static_cast<std::size_t>(cell[i])].value.push_back(W.values[i]);
      }
    std::erase_if(weights, [](const LatticeWeight& w) { return w.index.empty(); });
    BisectionOptions bopt = options.bisection;
    bopt.seed = options.bisection.seed + 7919u * static_cast<unsigned>(step);
    bopt.avoid = out.polynomial.factors;
    BisectionResult res;
    try {
      res = ham_sandwich_bisect(lat, weights, factor_degree(lat.dim, step), r, chart, bopt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBisectionNotFound)
        fail(ErrorCode::kBisectionNotFound,
             "step " + std::to_string(step) + ": " + std::string(e.what()).substr(std::string(to_string(e.code())).size() + 2));
      throw;
    }
    out.residuals.push_back(res.residuals);
    const Polynomial& f = res.factor;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (cell[i] < 0) continue;
      const double v = f(points[i]);
      if (std::abs(v) <= kTie) cell[i] = -1;
      else if (v > 0) cell[i] |= 1L << (step - 1);
    }
    out.polynomial.factors.push_back(f);
  }

  const std::size_t ncells = std::size_t{1} << out.steps;
  std::vector<std::uint8_t> ties(lat.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) ties[i] = cell[i] < 0;
  for (std::size_t id = 0; id < ncells; ++id) {
    Cell c;
    c.sign_vector = static_cast<unsigned>(id);
    c.mask.resize(lat.size());
    for (std::size_t i = 0; i < points.size(); ++i) c.mask[i] = cell[i] == static_cast<long>(id);
    c.mass = W.mixed_mass(r, c.mask);
    out.cells.push_back(std::move(c));
  }
  out.tie_mass = W.mixed_mass(r, ties);
  return out;
}

Box Box::for_scale(int dim, double R) {
  return Box{{-R, dim == 1 ? 0.0 : -R, 0.0}, {R, dim == 1 ? 0.0 : R, R}};
}

bool Box::contains(const STPoint& z) const noexcept {
  for (int a = 0; a < 3; ++a)
    if (z[a] < lo[a] - 1e-12 || z[a] > hi[a] + 1e-12) return false;
  return true;
}

LineCrossing cells_entered_by_line(const PartitionPolynomial& P, const Line& line, const Box& box) {
  LineCrossing out;
  double t0 = -kInf, t1 = kInf;
  for (int a = 0; a < 3; ++a) {
    if (a == 1 && P.dim == 1) continue;
    const double d = line.direction[a];
    if (std::abs(d) < 1e-300) {
      if (line.origin[a] < box.lo[a] || line.origin[a] > box.hi[a]) return out;
      continue;
    }
    double u = (box.lo[a] - line.origin[a]) / d, v = (box.hi[a] - line.origin[a]) / d;
    if (u > v) std::swap(u, v);
    t0 = std::max(t0, u);
    t1 = std::min(t1, v);
  }
  require(std::isfinite(t0) && std::isfinite(t1), ErrorCode::kInvalidArgument, "line direction is zero");
  if (t1 <= t0) return out;

  auto at = [&](double s) {
    return STPoint{line.origin[0] + s * line.direction[0], line.origin[1] + s * line.direction[1],
                   line.origin[2] + s * line.direction[2]};
  };
  constexpr int kSamples = 4096;
  const std::size_t nf = P.factors.size();
  std::vector<std::vector<double>> vals(nf, std::vector<double>(kSamples + 1));
  std::vector<double> s(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    s[i] = t0 + (t1 - t0) * i / kSamples;
    const STPoint z = at(s[i]);
    for (std::size_t k = 0; k < nf; ++k) vals[k][i] = P.factors[k](z);
  }
  std::vector<bool> active(nf, true);
  for (std::size_t k = 0; k < nf; ++k) {
    double top = 0.0;
    for (double v : vals[k]) top = std::max(top, std::abs(v));
    if (top <= kTie) {
      active[k] = false;
      out.degenerate = true;
      out.degenerate_factors.push_back(static_cast<int>(k));
    }
  }
  std::set<unsigned> seen;
  std::optional<unsigned> previous;
  int previous_index = -1;
  for (int i = 0; i <= kSamples; ++i) {
    unsigned id = 0;
    bool tie = false;
    for (std::size_t k = 0; k < nf; ++k) {
      if (!active[k]) continue;
      if (std::abs(vals[k][i]) <= kTie) tie = true;
      else if (vals[k][i] > 0) id |= 1u << k;
    }
    if (tie) continue;
    if (previous && *previous != id) {
      for (std::size_t k = 0; k < nf; ++k) {
        if (!active[k] || ((*previous ^ id) & (1u << k)) == 0) continue;
        double lo = s[previous_index], hi = s[i];
        const double flo = vals[k][previous_index];
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = P.factors[k](at(mid));
          if ((fm > 0) == (flo > 0)) lo = mid;
          else hi = mid;
        }
        out.crossings.push_back(0.5 * (lo + hi));
      }
    }
    if (seen.insert(id).second) out.sign_vectors.push_back(id);
    previous = id;
    previous_index = i;
  }
  std::sort(out.crossings.begin(), out.crossings.end());
  out.cells = seen.size();
  return out;
}

std::vector<ZeroSample> sample_zero_set(const PartitionPolynomial& P, const Box& box, double spacing) {
  require(spacing > 0, ErrorCode::kInvalidArgument, "spacing must be positive");
  const auto n = axis_counts(box, spacing, P.dim);
  auto coord = [&](int a, std::ptrdiff_t i) {
    if (n[a] == 1) return box.lo[a];
    return box.lo[a] + (box.hi[a] - box.lo[a]) * static_cast<double>(i) / static_cast<double>(n[a] - 1);
  };
  const std::size_t total = static_cast<std::size_t>(n[0] * n[1] * n[2]);
  std::vector<ZeroSample> out;
  std::vector<double> vals(total);
  auto flat = [&](std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) {
    return static_cast<std::size_t>((i * n[1] + j) * n[2] + k);
  };
  for (std::size_t f = 0; f < P.factors.size(); ++f) {
    const Polynomial& poly = P.factors[f];
    for (std::ptrdiff_t i = 0; i < n[0]; ++i)
      for (std::ptrdiff_t j = 0; j < n[1]; ++j)
        for (std::ptrdiff_t k = 0; k < n[2]; ++k)
          vals[flat(i, j, k)] = poly({coord(0, i), coord(1, j), coord(2, k)});
    for (std::ptrdiff_t i = 0; i < n[0]; ++i)
      for (std::ptrdiff_t j = 0; j < n[1]; ++j)
        for (std::ptrdiff_t k = 0; k < n[2]; ++k) {
          const double v = vals[flat(i, j, k)];
          const STPoint a{coord(0, i), coord(1, j), coord(2, k)};
          if (v == 0.0) {
            out.push_back({a, static_cast<int>(f)});
            continue;
          }
          const std::array<std::array<std::ptrdiff_t, 3>, 3> steps{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
          for (const auto& d : steps) {
            const std::ptrdiff_t i2 = i + d[0], j2 = j + d[1], k2 = k + d[2];
            if (i2 >= n[0] || j2 >= n[1] || k2 >= n[2]) continue;
            const double w = vals[flat(i2, j2, k2)];
            if (w == 0.0 || (v > 0) == (w > 0)) continue;
            STPoint lo = a, hi{coord(0, i2), coord(1, j2), coord(2, k2)};
            for (int it = 0; it < 40; ++it) {
              const STPoint mid{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
              if ((poly(mid) > 0) == (v > 0)) lo = mid;
              else hi = mid;
            }
            out.push_back({{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])},
                           static_cast<int>(f)});
          }
        }
  }
  return out;
}

Wall::Wall(PartitionPolynomial P, Box box, double width, double resolution,
           std::vector<ZeroSample> zeros)
    : P_(std::move(P)), box_(box), width_(width), resolution_(resolution), zeros_(std::move(zeros)),
      bucket_(width) {
  for (int a = 0; a < 3; ++a)
    dims_[a] = static_cast<int>(std::floor((box_.hi[a] - box_.lo[a]) / bucket_)) + 1;
  buckets_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);
  for (std::size_t i = 0; i < zeros_.size(); ++i) {
    const auto b = bucket_of(zeros_[i].z);
    buckets_[(static_cast<std::size_t>(b[0]) * dims_[1] + b[1]) * dims_[2] + b[2]].push_back(
        static_cast<std::uint32_t>(i));
  }
}

std::array<int, 3> Wall::bucket_of(const STPoint& z) const noexcept {
  std::array<int, 3> b{};
  for (int a = 0; a < 3; ++a)
    b[a] = std::clamp(static_cast<int>(std::floor((z[a] - box_.lo[a]) / bucket_)), 0, dims_[a] - 1);
  return b;
}

double Wall::distance_within(const STPoint& z, double limit) const {
  const int reach = static_cast<int>(std::ceil(limit / bucket_));
  const auto b = bucket_of(z);
  double best = kInf;
  for (int i = std::max(0, b[0] - reach); i <= std::min(dims_[0] - 1, b[0] + reach); ++i)
    for (int j = std::max(0, b[1] - reach); j <= std::min(dims_[1] - 1, b[1] + reach); ++j)
      for (int k = std::max(0, b[2] - reach); k <= std::min(dims_[2] - 1, b[2] + reach); ++k)
        for (std::uint32_t idx : buckets_[(static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k])
          best = std::min(best, dist3(z, zeros_[idx].z));
  return best <= limit ? best : kInf;
}

double Wall::distance(const STPoint& z) const {
  double best = kInf;
  for (const auto& s : zeros_) best = std::min(best, dist3(z, s.z));
  return best;
}

bool Wall::contains(const STPoint& z) const { return std::isfinite(distance_within(z, width_)); }

std::vector<std::uint8_t> Wall::mask(const SpaceTimeLattice& lattice, double R) const {
  std::vector<std::uint8_t> m(lattice.size(), 0);
  const double r2 = R * R * (1 + 1e-12);
  parallel_for(lattice.size(), [&](std::size_t i) {
    const STPoint z = lattice.point(i);
    const double x2 = z[0] * z[0] + (lattice.dim == 2 ? z[1] * z[1] : 0.0);
    if (x2 <= r2 && z[2] >= 0 && z[2] <= R && contains(z)) m[i] = 1;
  });
  return m;
}

Wall wall_region(const PartitionPolynomial& P, double R, double delta) {
  const double width = std::pow(R, 0.5 + delta);
  const Box box = Box::for_scale(P.dim, R);
  const double resolution = width / 8;
  return Wall(P, box, width, resolution, sample_zero_set(P, box, resolution));
}

IncidenceReport tube_cell_incidence(std::span<const Tube> tubes, const Wall& wall) {
  IncidenceReport out;
  out.cells.resize(tubes.size());
  const PartitionPolynomial& P = wall.polynomial();
  const double R = wall.box().hi[2];
  const int samples = std::max(256, static_cast<int>(std::ceil(4 * R / wall.width())));
  parallel_for(tubes.size(), [&](std::size_t j) {
    const Tube& tube = tubes[j];
    std::set<unsigned> ids;
    for (int i = 0; i <= samples; ++i) {
      const double t = R * i / samples;
      const Point x = tube.axis(t);
      if (norm_sq(x, P.dim) > R * R) continue;
      const STPoint z{x[0], P.dim == 1 ? 0.0 : x[1], t};
      if (wall.contains(z)) continue;
      if (const auto id = P.cell_of(z)) ids.insert(*id);
    }
    out.cells[j].assign(ids.begin(), ids.end());
  });
  const std::size_t limit = static_cast<std::size_t>(P.degree()) + 1;
  for (const auto& c : out.cells) {
    out.max_cells = std::max(out.max_cells, c.size());
    if (c.size() > limit) ++out.violations;
  }
  return out;
}

std::vector<Tube> tubes_of(const CoefficientSet& coeffs, double delta) {
  std::vector<Tube> out;
  coeffs.for_each([&](const Tile& t, cplx) { out.push_back(tube_of(t, delta)); });
  return out;
}

BudgetReport orthogonality_budget(const CoefficientSet& coeffs, std::span<const Tube> tubes,
                                  const IncidenceReport& incidence, int D, unsigned num_cells) {
  require(tubes.size() == incidence.cells.size(), ErrorCode::kInvalidArgument,
          "incidence report does not match the tubes");
  std::map<std::pair<LatticeIndex, LatticeIndex>, std::size_t> where;
  for (std::size_t j = 0; j < tubes.size(); ++j) where[{tubes[j].tile.theta, tubes[j].tile.nu}] = j;
  BudgetReport out;
  out.total = std::pow(reconstruct(coeffs).l2_norm(), 2);
  out.cell_mass.assign(num_cells, 0.0);
  for (unsigned id = 0; id < num_cells; ++id) {
    const CoefficientSet part = coeffs.filtered([&](const Tile& t) {
      const auto it = where.find({t.theta, t.nu});
      if (it == where.end()) return false;
      const auto& c = incidence.cells[it->second];
      return std::binary_search(c.begin(), c.end(), id);
    });
    if (part.empty()) continue;
    out.cell_mass[id] = std::pow(reconstruct(part).l2_norm(), 2);
    out.sum += out.cell_mass[id];
  }
  out.ratio = out.total > 0 ? out.sum / (D * out.total) : 0.0;
  return out;
}

const char* to_string(Tangency t) noexcept {
  switch (t) {
    case Tangency::kTangent: return "tangent";
    case Tangency::kTransverse: return "transverse";
    case Tangency::kDisjoint: return "disjoint";
  }
  return "unknown";
}

TangencyResult classify_tangency(const Tube& tube, const Wall& wall, const Ball& ball, double delta,
                                 std::optional<double> threshold) {
  const PartitionPolynomial& P = wall.polynomial();
  const int dim = P.dim;
  const double R = tube.length;
  TangencyResult out;
  out.ball_id = ball.id;
  out.threshold = threshold ? *threshold : std::pow(R, -0.5 + 2 * delta);

  // Does the tube meet the wall inside the ball?
  const int axial = std::max(64, static_cast<int>(std::ceil(4 * R / wall.width())));
  const int across = 4;
  bool meets = false;
  for (int i = 0; i <= axial && !meets; ++i) {
    const double t = R * i / axial;
    const Point a = tube.axis(t);
    for (int p = -across; p <= across && !meets; ++p)
      for (int q = (dim == 1 ? 0 : -across); q <= (dim == 1 ? 0 : across) && !meets; ++q) {
        const double ox = tube.radius * p / across, oy = tube.radius * q / across;
        if (ox * ox + oy * oy > tube.radius * tube.radius) continue;
        const STPoint z{a[0] + ox, dim == 1 ? 0.0 : a[1] + oy, t};
        if (dist3(z, ball.center) > ball.radius) continue;
        if (wall.contains(z)) meets = true;
      }
  }
  if (!meets) return out;

  const auto G = tube.direction();
  const double gnorm = std::sqrt(G[0] * G[0] + G[1] * G[1] + G[2] * G[2]);
  std::size_t singular = 0;
  for (const ZeroSample& s : wall.zeros()) {
    if (dist3(s.z, ball.center) > 2 * ball.radius) continue;
    const Point a = tube.axis(s.z[2]);
    const Point d{s.z[0] - a[0], dim == 1 ? 0.0 : s.z[1] - a[1]};
    if (norm_sq(d, dim) > 100 * tube.radius * tube.radius) continue;
    const Polynomial& f = P.factors[static_cast<std::size_t>(s.factor)];
    const STPoint gu = f.gradient_unit(f.chart().to_unit(s.z));
    if (std::sqrt(gu[0] * gu[0] + gu[1] * gu[1] + gu[2] * gu[2]) < 1e-8) {
      ++singular;
      continue;
    }
    const STPoint g = f.gradient(s.z);
    const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    const double c = std::abs(G[0] * g[0] + G[1] * g[1] + G[2] * g[2]) / (gnorm * n);
    out.max_angle = std::max(out.max_angle, std::asin(std::min(1.0, c)));
    ++out.zero_points;
  }
  if (out.zero_points == 0 && singular > 0)
    fail(ErrorCode::kNoNonSingularPoints, "gradient vanishes at every sampled zero near the ball");
  out.label = out.max_angle <= out.threshold ? Tangency::kTangent : Tangency::kTransverse;
  return out;
}

std::vector<Ball> cover_with_balls(int dim, double R, double delta) {
  const double rho = std::pow(R, 1 - delta);
  const Box box = Box::for_scale(dim, R);
  auto count = [&](int a) { return std::max(1, static_cast<int>(std::ceil((box.hi[a] - box.lo[a]) / rho))); };
  std::vector<Ball> out;
  const int n0 = count(0), n1 = dim == 1 ? 1 : count(1), n2 = count(2);
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k) {
        const STPoint c{box.lo[0] + (i + 0.5) * rho, dim == 1 ? 0.0 : box.lo[1] + (j + 0.5) * rho,
                        box.lo[2] + (k + 0.5) * rho};
        out.push_back({c, rho, static_cast<int>(out.size())});
      }
  return out;
}

}  // namespace schro
