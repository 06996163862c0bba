#include "schro/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "schro/error.hpp"

namespace schro {

namespace {
// Active variable slots: (x1, t) in one dimension, (x1, x2, t) in two.
std::vector<int> slots(int dim) { return dim == 1 ? std::vector<int>{0, 2} : std::vector<int>{0, 1, 2}; }
}  // namespace

Chart Chart::for_box(double R) { return Chart{{0.0, 0.0, 0.5 * R}, {R, R, 0.5 * R}}; }

STPoint Chart::to_unit(const STPoint& z) const noexcept {
  return {(z[0] - center[0]) / scale[0], (z[1] - center[1]) / scale[1], (z[2] - center[2]) / scale[2]};
}

std::vector<Exponents> Polynomial::monomials(int dim, int degree) {
  std::vector<Exponents> out;
  for (int total = 0; total <= degree; ++total) {
    if (dim == 1) {
      for (int a = total; a >= 0; --a) out.push_back({a, 0, total - a});
    } else {
      for (int a = total; a >= 0; --a)
        for (int b = total - a; b >= 0; --b) out.push_back({a, b, total - a - b});
    }
  }
  return out;
}

std::size_t Polynomial::basis_size(int dim, int degree) {
  // C(degree + nvars, nvars)
  const int nvars = dim + 1;
  double c = 1.0;
  for (int i = 1; i <= nvars; ++i) c = c * (degree + i) / i;
  return static_cast<std::size_t>(std::llround(c));
}

Polynomial::Polynomial(int dim, int degree, std::vector<double> coeffs, Chart chart)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)), exps_(monomials(dim, degree)),
      chart_(chart) {
  require(dim == 1 || dim == 2, ErrorCode::kInvalidArgument, "dim must be 1 or 2");
  require(coeffs_.size() == exps_.size(), ErrorCode::kInvalidArgument,
          "coefficient count does not match the degree");
}

Polynomial Polynomial::affine(int dim, const Chart& chart, double a0, const STPoint& g) {
  // a0 + sum g_i (center_i + scale_i u_i)
  std::vector<double> c(basis_size(dim, 1), 0.0);
  double constant = a0;
  for (int i : slots(dim)) constant += g[i] * chart.center[i];
  c[0] = constant;
  const auto exps = monomials(dim, 1);
  for (std::size_t j = 1; j < exps.size(); ++j)
    for (int i : slots(dim))
      if (exps[j][i] == 1) c[j] = g[i] * chart.scale[i];
  return Polynomial(dim, 1, std::move(c), chart);
}

void Polynomial::basis_values(const STPoint& u, double* out) const noexcept {
  double pw[3][16];
  for (int i = 0; i < 3; ++i) {
    pw[i][0] = 1.0;
    for (int e = 1; e <= degree_ && e < 16; ++e) pw[i][e] = pw[i][e - 1] * u[i];
  }
  for (std::size_t j = 0; j < exps_.size(); ++j)
    out[j] = pw[0][exps_[j][0]] * pw[1][exps_[j][1]] * pw[2][exps_[j][2]];
}

double Polynomial::eval_unit(const STPoint& u) const noexcept {
  double pw[3][16];
  for (int i = 0; i < 3; ++i) {
    pw[i][0] = 1.0;
    for (int e = 1; e <= degree_ && e < 16; ++e) pw[i][e] = pw[i][e - 1] * u[i];
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < exps_.size(); ++j)
    acc += coeffs_[j] * pw[0][exps_[j][0]] * pw[1][exps_[j][1]] * pw[2][exps_[j][2]];
  return acc;
}

double Polynomial::operator()(const STPoint& z) const noexcept { return eval_unit(chart_.to_unit(z)); }

STPoint Polynomial::gradient_unit(const STPoint& u) const noexcept {
  double pw[3][16];
  for (int i = 0; i < 3; ++i) {
    pw[i][0] = 1.0;
    for (int e = 1; e <= degree_ && e < 16; ++e) pw[i][e] = pw[i][e - 1] * u[i];
  }
  STPoint g{0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    const auto& e = exps_[j];
    for (int i = 0; i < 3; ++i) {
      if (e[i] == 0) continue;
      double term = coeffs_[j] * e[i];
      for (int l = 0; l < 3; ++l) term *= l == i ? pw[l][e[l] - 1] : pw[l][e[l]];
      g[i] += term;
    }
  }
  return g;
}

STPoint Polynomial::gradient(const STPoint& z) const noexcept {
  STPoint g = gradient_unit(chart_.to_unit(z));
  for (int i = 0; i < 3; ++i) g[i] /= chart_.scale[i];
  if (dim_ == 1) g[1] = 0.0;
  return g;
}

double Polynomial::alignment(const Polynomial& a, const Polynomial& b) {
  const int d = std::max(a.degree_, b.degree_);
  const std::size_t n = basis_size(a.dim_, d);
  std::vector<double> va(n, 0.0), vb(n, 0.0);
  std::copy(a.coeffs_.begin(), a.coeffs_.end(), va.begin());
  std::copy(b.coeffs_.begin(), b.coeffs_.end(), vb.begin());
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ab += va[i] * vb[i];
    aa += va[i] * va[i];
    bb += vb[i] * vb[i];
  }
  return aa > 0 && bb > 0 ? std::abs(ab) / std::sqrt(aa * bb) : 0.0;
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  const auto s = slots(dim_);
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    nlohmann::json e = nlohmann::json::array();
    for (int i : s) e.push_back(exps_[j][i]);
    terms.push_back({{"exponents", e}, {"coefficient", coeffs_[j]}});
  }
  nlohmann::json center = nlohmann::json::array(), scale = nlohmann::json::array();
  for (int i : s) {
    center.push_back(chart_.center[i]);
    scale.push_back(chart_.scale[i]);
  }
  return {{"degree", degree_}, {"chart", {{"center", center}, {"scale", scale}}}, {"terms", terms}};
}

}  // namespace schro
