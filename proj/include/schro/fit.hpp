#pragma once

#include <span>
#include <utility>
#include <vector>

namespace schro {

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  // Largest |log(value) - (intercept + slope * log(scale))|.
  double max_residual = 0.0;
  std::vector<std::pair<double, double>> log_points;
};

// Least-squares fit of log(value) against log(scale) (natural logs).
// Throws DegenerateInput for fewer than 3 points, non-positive entries or
// fewer than two distinct scales.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> scale_value);

}  // namespace schro
