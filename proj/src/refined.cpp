#include "schro/refined.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "schro/error.hpp"

namespace schro {

namespace {

int floor_div(double v, double side) { return static_cast<int>(std::floor(v / side)); }

// Spatial cube indices of every grid point; nullopt-like flag via in_box.
struct PointCubes {
  std::vector<std::array<int, 2>> index;
  std::vector<std::uint8_t> in_box;
};

PointCubes point_cubes(const CubeUnion& Y, const GridSpec& grid) {
  PointCubes out;
  const std::size_t np = grid.spatial_size();
  out.index.resize(np);
  out.in_box.resize(np);
  for (std::size_t x = 0; x < np; ++x) {
    const Point p = grid.point(x);
    const int a = floor_div(p[0], Y.side());
    const int b = grid.dim == 1 ? 0 : floor_div(p[1], Y.side());
    out.index[x] = {a, b};
    out.in_box[x] = a >= -Y.half_width() && a < Y.half_width() &&
                    (grid.dim == 1 || (b >= -Y.half_width() && b < Y.half_width()));
  }
  return out;
}

double spread(const std::map<CubeIndex, double>& norms) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [q, v] : norms) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
}

int dyadic_exponent(double top, double v) {
  // v in (top 2^{-e-1}, top 2^{-e}]
  int e = static_cast<int>(std::floor(std::log2(top / v)));
  if (std::ldexp(top, -e) < v) --e;
  if (std::ldexp(top, -e - 1) >= v) ++e;
  return std::max(e, 0);
}

}  // namespace

CubeUnion::CubeUnion(int dim, double R) : dim_(dim), R_(R), side_(std::sqrt(R)) {
  require(dim == 1 || dim == 2, ErrorCode::kInvalidArgument, "dim must be 1 or 2");
  require(R >= 1, ErrorCode::kInvalidArgument, "R must be >= 1");
  half_ = static_cast<int>(std::ceil(R / side_ - 1e-12));
  strips_ = half_;
}

bool CubeUnion::in_range(const CubeIndex& q) const noexcept {
  if (q[0] < -half_ || q[0] >= half_) return false;
  if (dim_ == 1 ? q[1] != 0 : (q[1] < -half_ || q[1] >= half_)) return false;
  return q[2] >= 0 && q[2] < strips_;
}

bool CubeUnion::insert(const CubeIndex& q) {
  require(in_range(q), ErrorCode::kInvalidArgument, "cube outside the box");
  return cubes_.insert(q).second;
}

CubeIndex CubeUnion::cube_of(const Point& x, double t) const noexcept {
  return {floor_div(x[0], side_), dim_ == 1 ? 0 : floor_div(x[1], side_),
          std::min(floor_div(t, side_), strips_ - 1)};
}

std::array<double, 3> CubeUnion::corner(const CubeIndex& q) const noexcept {
  return {q[0] * side_, dim_ == 1 ? 0.0 : q[1] * side_, q[2] * side_};
}

Region CubeUnion::region(const GridSpec& grid, std::span<const double> times) const {
  require(grid.dim == dim_, ErrorCode::kInvalidArgument, "dimension mismatch");
  const PointCubes pc = point_cubes(*this, grid);
  Region out(grid.spatial_size(), times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    const int k = std::min(floor_div(times[m], side_), strips_ - 1);
    for (std::size_t x = 0; x < pc.index.size(); ++x)
      if (pc.in_box[x] && contains({pc.index[x][0], pc.index[x][1], k})) out.set(x, m, true);
  }
  return out;
}

Region cube_region(const CubeUnion& shape, const CubeIndex& q, const GridSpec& grid,
                   std::span<const double> times, double factor) {
  const auto c = shape.corner(q);
  const double half = 0.5 * shape.side() * factor;
  const std::array<double, 3> mid{c[0] + 0.5 * shape.side(), c[1] + 0.5 * shape.side(),
                                  c[2] + 0.5 * shape.side()};
  const double R = shape.R();
  return Region::from_predicate(grid, times, [&](const Point& x, double t) {
    if (std::abs(t - mid[2]) > half || t < 0 || t > R) return false;
    for (int a = 0; a < grid.dim; ++a) {
      const double lo = std::max(mid[a] - half, -R), hi = std::min(mid[a] + half, R);
      if (x[a] < lo || x[a] > hi) return false;
    }
    return true;
  });
}

CubeUnion cubes_along_tubes(int dim, double R, std::span<const Tube> tubes) {
  CubeUnion Y(dim, R);
  for (const Tube& tube : tubes)
    for (int k = 0; k < Y.strips(); ++k) {
      const double t = std::min((k + 0.5) * Y.side(), R);
      const CubeIndex q = Y.cube_of(tube.axis(t), t);
      if (Y.in_range(q)) Y.insert(q);
    }
  return Y;
}

StripOccupancy strip_occupancy(const CubeUnion& Y) {
  StripOccupancy out;
  for (const auto& q : Y.cubes()) ++out.histogram[q[2]];
  out.min_nonempty = out.histogram.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& [k, n] : out.histogram) {
    out.sigma = std::max(out.sigma, n);
    out.min_nonempty = std::min(out.min_nonempty, n);
  }
  out.uniform = !out.histogram.empty() && 2 * out.min_nonempty >= out.sigma;
  return out;
}

std::map<CubeIndex, double> cube_power_sums(std::span<const SpectralField* const> fields,
                                            const CubeUnion& Y, double p) {
  require(!fields.empty(), ErrorCode::kInvalidArgument, "no fields");
  const GridSpec& grid = fields[0]->grid();
  for (const auto* f : fields)
    require(f->grid() == grid, ErrorCode::kInvalidArgument, "fields live on different grids");
  require(grid.dim == Y.dim(), ErrorCode::kInvalidArgument, "dimension mismatch");
  const auto times = grid.time_samples();
  const auto wt = time_weights(times);
  const double wx = std::pow(grid.dx(), grid.dim);
  const PointCubes pc = point_cubes(Y, grid);
  std::vector<std::unique_ptr<SlicePropagator>> props;
  for (const auto* f : fields) props.push_back(std::make_unique<SlicePropagator>(*f));
  const double power = p / static_cast<double>(fields.size());

  std::map<CubeIndex, double> out;
  for (const auto& q : Y.cubes()) out[q] = 0.0;
  std::vector<double> prod(grid.spatial_size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    const int k = std::min(floor_div(times[m], Y.side()), Y.strips() - 1);
    std::fill(prod.begin(), prod.end(), 1.0);
    for (auto& prop : props) {
      const auto s = prop->at(times[m]);
      for (std::size_t x = 0; x < prod.size(); ++x) prod[x] *= std::abs(s[x]);
    }
    for (std::size_t x = 0; x < prod.size(); ++x) {
      if (!pc.in_box[x]) continue;
      const auto it = out.find({pc.index[x][0], pc.index[x][1], k});
      if (it != out.end()) it->second += wt[m] * wx * std::pow(prod[x], power);
    }
  }
  return out;
}

PigeonholeResult dyadic_pigeonhole(std::span<const double> values, double R, double p, double C,
                                   std::optional<double> reference) {
  require(!values.empty(), ErrorCode::kInvalidArgument, "no values");
  require(R > 1 && C > 0 && p > 0, ErrorCode::kInvalidArgument, "need R > 1, C > 0, p > 0");
  double top = 0.0;
  for (double v : values) {
    require(std::isfinite(v) && v >= 0, ErrorCode::kInvalidArgument, "values must be finite and >= 0");
    top = std::max(top, v);
  }
  const double ref = reference ? *reference : top;
  require(ref > 0, ErrorCode::kAllBelowFloor, "every value is zero");
  PigeonholeResult out;
  out.floor = std::pow(R, -C) * ref;
  out.class_bound = static_cast<std::size_t>(std::floor(C * std::log2(R))) + 1;
  std::map<int, DyadicClass> classes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    out.total += std::pow(v, p);
    if (v < out.floor || v == 0.0) {
      out.dropped.push_back(i);
      continue;
    }
    const int e = dyadic_exponent(ref, v);
    auto& c = classes[e];
    c.exponent = e;
    c.members.push_back(i);
    c.mass += std::pow(v, p);
  }
  if (classes.empty()) fail(ErrorCode::kAllBelowFloor, "every value lies below R^{-C} times the reference");
  for (auto& [e, c] : classes) {
    out.classes.push_back(c);
    if (c.mass > out.selected.mass) out.selected = c;
  }
  out.retained = out.selected.mass;
  return out;
}

PigeonholeSelection box_pigeonhole(std::span<const BoxTubes> boxes, const CubeUnion& Y, double R,
                                   double C) {
  require(!boxes.empty(), ErrorCode::kInvalidArgument, "no boxes");
  PigeonholeSelection out;

  // Stage 1: lambda classes of tube norms over every box.
  std::vector<double> norms;
  std::vector<std::pair<std::size_t, std::size_t>> owner;  // (box, tube)
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const auto& box = boxes[b];
    require(box.norm.size() == box.strip.size() && box.norm.size() == box.cubes.size(),
            ErrorCode::kInvalidArgument, "box tube arrays differ in length");
    for (std::size_t j = 0; j < box.norm.size(); ++j) {
      norms.push_back(box.norm[j]);
      owner.emplace_back(b, j);
    }
  }
  const auto lambda = dyadic_pigeonhole(norms, R, 6.0, C);

  // Stage 2: for each lambda class, eta classes of per-(box, strip) counts; keep
  // the (lambda, eta) pair with the largest retained L^6 mass.
  double best = -1.0;
  std::vector<std::size_t> chosen;
  std::size_t eta_classes = 0;
  for (const auto& cls : lambda.classes) {
    std::map<std::pair<std::size_t, int>, std::size_t> count;
    for (std::size_t i : cls.members) ++count[{owner[i].first, boxes[owner[i].first].strip[owner[i].second]}];
    std::map<int, std::pair<double, std::vector<std::size_t>>> by_eta;
    std::size_t most = 0;
    for (const auto& [key, n] : count) most = std::max(most, n);
    for (std::size_t i : cls.members) {
      const std::size_t n = count[{owner[i].first, boxes[owner[i].first].strip[owner[i].second]}];
      const int e = dyadic_exponent(static_cast<double>(most), static_cast<double>(n));
      by_eta[e].first += std::pow(norms[i], 6);
      by_eta[e].second.push_back(i);
    }
    eta_classes = std::max(eta_classes, by_eta.size());
    for (auto& [e, entry] : by_eta)
      if (entry.first > best) {
        best = entry.first;
        out.lambda = cls.exponent;
        out.eta = e;
        chosen = entry.second;
      }
  }

  std::map<std::size_t, std::set<CubeIndex>> ybox;
  for (std::size_t i : chosen) {
    const auto [b, j] = owner[i];
    for (const auto& q : boxes[b].cubes[j])
      if (Y.contains(q)) ybox[b].insert(q);
  }
  require(!ybox.empty(), ErrorCode::kInvalidArgument, "selected tubes meet no cube of Y");

  // Stage 3: dyadic class of box L^2 norms, weighted by L^2 mass.
  std::vector<std::size_t> candidates;
  std::vector<double> l2;
  for (const auto& [b, cubes] : ybox) {
    candidates.push_back(b);
    l2.push_back(boxes[b].l2);
  }
  const auto box_classes = dyadic_pigeonhole(l2, R, 2.0, C);
  out.box_class = box_classes.selected.exponent;
  for (std::size_t i : box_classes.selected.members) {
    const std::size_t b = candidates[i];
    out.selected_boxes.push_back(b);
    out.box_cubes[b].assign(ybox[b].begin(), ybox[b].end());
  }

  // Stage 4: multiplicity classes over the cubes of Y.
  std::map<CubeIndex, std::size_t> mult;
  for (const auto& [b, cubes] : out.box_cubes)
    for (const auto& q : cubes) ++mult[q];
  std::size_t most = 0;
  for (const auto& [q, n] : mult) most = std::max(most, n);
  std::map<int, std::vector<CubeIndex>> by_mu;
  for (const auto& [q, n] : mult)
    by_mu[dyadic_exponent(static_cast<double>(most), static_cast<double>(n))].push_back(q);
  std::size_t largest = 0;
  for (auto& [e, cubes] : by_mu)
    if (cubes.size() > largest) {
      largest = cubes.size();
      out.mu = e;
      out.surviving = cubes;
    }
  out.class_product = lambda.classes.size() * std::max<std::size_t>(eta_classes, 1) *
                      box_classes.classes.size() * by_mu.size();
  out.retained_fraction = Y.empty() ? 0.0 : static_cast<double>(out.surviving.size()) / Y.size();
  return out;
}

bool FrequencyBox::contains(const Point& xi, int dim) const noexcept {
  for (int a = 0; a < dim; ++a)
    if (xi[a] < lo[a] || xi[a] >= hi[a]) return false;
  return true;
}

std::vector<FrequencyBox> parabola_caps(int dim, double R) {
  require(dim == 1 || dim == 2, ErrorCode::kInvalidArgument, "dim must be 1 or 2");
  const int n = static_cast<int>(std::ceil(2 * std::sqrt(R) - 1e-9));
  const double w = 2.0 / n;
  std::vector<FrequencyBox> caps;
  for (int i = 0; i < n; ++i) {
    if (dim == 1) {
      caps.push_back({{-1 + i * w, 0}, {-1 + (i + 1) * w, 0}});
      continue;
    }
    for (int j = 0; j < n; ++j) caps.push_back({{-1 + i * w, -1 + j * w}, {-1 + (i + 1) * w, -1 + (j + 1) * w}});
  }
  // Close the top edge so xi = 1 is covered.
  for (auto& c : caps)
    for (int a = 0; a < dim; ++a)
      if (c.hi[a] >= 1 - 1e-12) c.hi[a] = std::nextafter(1.0, 2.0);
  return caps;
}

std::vector<SpectralField> split_into_caps(const SpectralField& f, std::span<const FrequencyBox> caps) {
  const GridSpec& g = f.grid();
  std::vector<SpectralField> out(caps.size(), SpectralField(g));
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] == cplx{}) continue;
    const Point xi = g.frequency(k);
    for (std::size_t c = 0; c < caps.size(); ++c)
      if (caps[c].contains(xi, g.dim)) {
        out[c][k] = f[k];
        break;
      }
  }
  for (std::size_t c = 0; c < caps.size(); ++c) {
    Point mid{0.5 * (caps[c].lo[0] + caps[c].hi[0]), 0.5 * (caps[c].lo[1] + caps[c].hi[1])};
    const double half = 0.5 * std::hypot(caps[c].hi[0] - caps[c].lo[0], g.dim == 1 ? 0.0 : caps[c].hi[1] - caps[c].lo[1]);
    out[c].support = {mid, half};
  }
  return out;
}

DecouplingReport decoupling_ratio(const SpectralField& F, std::span<const SpectralField> pieces,
                                  std::span<const FrequencyBox> caps, const Region& Q,
                                  const Region& enlarged, double tol) {
  require(!pieces.empty() && pieces.size() == caps.size(), ErrorCode::kInvalidArgument,
          "need one cap per piece");
  const GridSpec& g = F.grid();
  SpectralField sum(g);
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    const auto& piece = pieces[j];
    require(piece.grid() == g, ErrorCode::kInvalidArgument, "piece lives on another grid");
    double outside = 0.0, all = 0.0;
    for (std::size_t k = 0; k < piece.size(); ++k) {
      const double a = std::norm(piece[k]);
      all += a;
      if (!caps[j].contains(g.frequency(k), g.dim)) outside += a;
    }
    if (all > 0 && outside > tol * all)
      fail(ErrorCode::kSupportViolation, "piece " + std::to_string(j) + " leaks " +
                                             std::to_string(outside / all) + " of its mass outside its cap");
    sum += piece;
  }
  sum -= F;
  if (sum.l2_norm() > std::sqrt(tol) * std::max(F.l2_norm(), 1e-300))
    fail(ErrorCode::kPreconditionFailed, "pieces do not sum to F");

  const auto times = g.time_samples();
  DecouplingReport out;
  out.lhs = std::pow(region_power_sum(F, times, Q, 6.0), 1.0 / 6);
  double sq = 0.0;
  for (const auto& piece : pieces) {
    const double n = piece.l2_norm() == 0.0 ? 0.0 : std::pow(region_power_sum(piece, times, enlarged, 6.0), 1.0 / 6);
    out.piece_norms.push_back(n);
    sq += n * n;
  }
  out.rhs = std::sqrt(sq);
  require(out.rhs > 0, ErrorCode::kInvalidArgument, "all pieces vanish on the enlarged region");
  out.ratio = out.lhs / out.rhs;
  return out;
}

RefinedReport refined_strichartz_ratio(const SpectralField& g, const CubeUnion& Y,
                                       const RatioOptions& options) {
  require(g.grid().dim == 1, ErrorCode::kInvalidArgument, "the refined ratio is defined for n = 1");
  require(!Y.empty(), ErrorCode::kEmptyRegion, "Y has no cubes");
  const auto occ = strip_occupancy(Y);
  if (!occ.uniform)
    fail(ErrorCode::kPreconditionFailed, "strips are not uniformly occupied (min " +
                                             std::to_string(occ.min_nonempty) + ", max " +
                                             std::to_string(occ.sigma) + ")");
  const SpectralField* fields[] = {&g};
  const auto sums = cube_power_sums(fields, Y, 6.0);
  std::map<CubeIndex, double> norms;
  double total = 0.0;
  for (const auto& [q, s] : sums) {
    norms[q] = std::pow(s, 1.0 / 6);
    total += s;
  }
  RefinedReport out;
  out.cube_spread = spread(norms);
  if (out.cube_spread > options.uniform_factor)
    fail(ErrorCode::kNonUniformCubes, "per-cube L^6 norms vary by " + std::to_string(out.cube_spread));
  out.sigma = occ.sigma;
  out.norm = std::pow(total, 1.0 / 6);
  out.ratio = out.norm / (std::pow(static_cast<double>(out.sigma), -1.0 / 3) * g.l2_norm());
  return out;
}

double fourier_support_distance(const SpectralField& a, const SpectralField& b) {
  require(a.grid() == b.grid(), ErrorCode::kInvalidArgument, "fields live on different grids");
  auto support = [](const SpectralField& f) {
    double top = 0.0;
    for (const auto& c : f.coeffs()) top = std::max(top, std::abs(c));
    std::vector<Point> pts;
    for (std::size_t k = 0; k < f.size(); ++k)
      if (std::abs(f[k]) > 1e-14 * top) pts.push_back(f.frequency(k));
    return pts;
  };
  const auto A = support(a), B = support(b);
  require(!A.empty() && !B.empty(), ErrorCode::kInvalidArgument, "a field has no Fourier support");
  const int dim = a.grid().dim;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : A)
    for (const auto& q : B) best = std::min(best, std::sqrt(norm_sq({p[0] - q[0], p[1] - q[1]}, dim)));
  return best;
}

BilinearReport bilinear_refined_ratio(const SpectralField& f1, const SpectralField& f2,
                                      const CubeUnion& Y, double separation, double M,
                                      const RatioOptions& options) {
  require(!Y.empty(), ErrorCode::kEmptyRegion, "Y has no cubes");
  require(M >= 1, ErrorCode::kInvalidArgument, "M must be >= 1");
  BilinearReport out;
  out.separation = fourier_support_distance(f1, f2);
  if (out.separation < separation)
    fail(ErrorCode::kSeparationViolated, "Fourier supports are " + std::to_string(out.separation) +
                                             " apart, need " + std::to_string(separation));
  const SpectralField* fields[] = {&f1, &f2};
  const auto sums = cube_power_sums(fields, Y, 6.0);
  std::map<CubeIndex, double> norms;
  double total = 0.0;
  for (const auto& [q, s] : sums) {
    norms[q] = std::pow(s, 1.0 / 6);
    total += s;
  }
  out.cube_spread = spread(norms);
  if (out.cube_spread > options.uniform_factor)
    fail(ErrorCode::kNonUniformCubes, "per-cube bilinear norms vary by " + std::to_string(out.cube_spread));
  out.N = Y.size();
  out.norm = std::pow(total, 1.0 / 6);
  const double scale = std::pow(M, 1.0 / 6) * std::pow(static_cast<double>(out.N), -1.0 / 6) *
                       std::pow(Y.R(), -1.0 / 6) * std::sqrt(f1.l2_norm() * f2.l2_norm());
  out.ratio = out.norm / scale;
  return out;
}

BilDecompositionReport bil_decomposition_check(std::span<const CapValues> points,
                                               std::span<const Point> cap_centers, int dim, double K,
                                               double M, double eps) {
  require(K > 1 && M >= 1 && eps > 0, ErrorCode::kInvalidArgument, "need K > 1, M >= 1, eps > 0");
  const std::size_t n = cap_centers.size();
  const double sep = 1.0 / (K * M);
  const double broad = std::pow(K, -std::pow(eps, 4));
  const double small = std::pow(K, -10.0);
  BilDecompositionReport out;
  for (const auto& pt : points) {
    require(pt.tangent.size() == n && pt.transverse.size() == n, ErrorCode::kInvalidArgument,
            "cap values do not match the caps");
    cplx f{};
    double largest = 0.0;
    std::vector<double> tang(n);
    for (std::size_t c = 0; c < n; ++c) {
      const cplx piece = pt.tangent[c] + pt.transverse[c];
      f += piece;
      largest = std::max(largest, std::abs(piece));
      tang[c] = std::abs(pt.tangent[c]);
    }
    const double af = std::abs(f);
    if (af == 0.0 || largest > broad * af) {
      ++out.excluded;
      continue;
    }
    ++out.points;
    cplx trans{};
    for (std::size_t c = 0; c < n; ++c)
      if (tang[c] <= small * af) trans += pt.transverse[c];
    double bil = 0.0;
    bool separated_heavy = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const Point d{cap_centers[a][0] - cap_centers[b][0], cap_centers[a][1] - cap_centers[b][1]};
        if (std::sqrt(norm_sq(d, dim)) < sep) continue;
        bil = std::max(bil, std::sqrt(tang[a] * tang[b]));
        if (tang[a] > small * af && tang[b] > small * af) separated_heavy = true;
      }
    out.via_bilinear += separated_heavy;
    const double bound = std::abs(trans) + std::pow(K, 10.0) * bil;
    out.worst_constant = std::max(out.worst_constant,
                                  bound > 0 ? af / bound : std::numeric_limits<double>::infinity());
  }
  return out;
}

double strip_estimate_constant(const CubeUnion& Y_box, const CubeUnion& Y) {
  require(!Y.empty() && !Y_box.empty(), ErrorCode::kEmptyRegion, "empty cube union");
  const double sigma = static_cast<double>(strip_occupancy(Y).sigma);
  const double sigma_box = static_cast<double>(strip_occupancy(Y_box).sigma);
  return static_cast<double>(common_cubes(Y_box, Y)) * sigma / (sigma_box * static_cast<double>(Y.size()));
}

std::size_t common_cubes(const CubeUnion& a, const CubeUnion& b) {
  std::size_t n = 0;
  for (const auto& q : a.cubes()) n += b.contains(q);
  return n;
}

double sup_over_average(const SpaceTimeField& h, double a, double b, double enlarge) {
  require(a > 0 && b > 0 && enlarge >= 1, ErrorCode::kInvalidArgument, "bad rectangle");
  const GridSpec& g = h.grid();
  const auto times = h.times();
  const double R = g.R;
  const int nxr = static_cast<int>(std::ceil(2 * R / a));
  const int ntr = static_cast<int>(std::ceil((times.back() - times.front()) / b));
  const int ny = g.dim == 1 ? 1 : nxr;
  double worst = 0.0;
  for (int i = 0; i < nxr; ++i)
    for (int j = 0; j < ny; ++j)
      for (int k = 0; k < ntr; ++k) {
        const std::array<double, 3> c{-R + (i + 0.5) * a, g.dim == 1 ? 0.0 : -R + (j + 0.5) * a,
                                      times.front() + (k + 0.5) * b};
        double sup = 0.0, sum = 0.0;
        std::size_t count = 0;
        for (std::size_t m = 0; m < times.size(); ++m) {
          const double dt = std::abs(times[m] - c[2]);
          if (dt > 0.5 * b * enlarge) continue;
          for (std::size_t x = 0; x < h.num_points(); ++x) {
            const Point p = g.point(x);
            const double dx0 = std::abs(p[0] - c[0]);
            const double dx1 = g.dim == 1 ? 0.0 : std::abs(p[1] - c[1]);
            if (dx0 > 0.5 * a * enlarge || dx1 > 0.5 * a * enlarge) continue;
            const double v = std::abs(h.at(x, m));
            sum += v;
            ++count;
            if (dt <= 0.5 * b && dx0 <= 0.5 * a && dx1 <= 0.5 * a) sup = std::max(sup, v);
          }
        }
        if (count == 0 || sup == 0.0) continue;
        worst = std::max(worst, sup / (sum / static_cast<double>(count)));
      }
  return worst;
}

}  // namespace schro
