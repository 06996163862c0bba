#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "json.hpp"

namespace schro {

// Space-time point (x1, x2, t); x2 is ignored in one spatial dimension.
using STPoint = std::array<double, 3>;
using Exponents = std::array<int, 3>;

// Affine normalization u_i = (z_i - center_i) / scale_i applied before evaluation.
struct Chart {
  STPoint center{0.0, 0.0, 0.0};
  STPoint scale{1.0, 1.0, 1.0};

  // Maps [-R, R]^dim x [0, R] onto [-1, 1]^(dim+1).
  static Chart for_box(double R);
  STPoint to_unit(const STPoint& z) const noexcept;
};

// Real polynomial in (x1, [x2,] t) of total degree <= degree, stored in the
// monomial basis of the chart's normalized variables.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int dim, int degree, std::vector<double> coeffs, Chart chart);

  // Monomials of total degree <= degree in graded order; x2 exponents are 0 when dim == 1.
  static std::vector<Exponents> monomials(int dim, int degree);
  static std::size_t basis_size(int dim, int degree);
  // a0 + g . z in physical coordinates.
  static Polynomial affine(int dim, const Chart& chart, double a0, const STPoint& g);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  const Chart& chart() const noexcept { return chart_; }

  double operator()(const STPoint& z) const noexcept;
  double eval_unit(const STPoint& u) const noexcept;
  // Gradient with respect to the physical variables (t-component last).
  STPoint gradient(const STPoint& z) const noexcept;
  // Gradient with respect to the normalized variables.
  STPoint gradient_unit(const STPoint& u) const noexcept;

  // Values of every basis monomial at normalized point u.
  void basis_values(const STPoint& u, double* out) const noexcept;

  // |<a, b>| / (|a||b|) after embedding both in the larger monomial basis.
  static double alignment(const Polynomial& a, const Polynomial& b);

  nlohmann::json to_json() const;

 private:
  int dim_ = 1;
  int degree_ = 0;
  std::vector<double> coeffs_;
  std::vector<Exponents> exps_;
  Chart chart_;
};

}  // namespace schro
