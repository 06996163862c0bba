#include "schro/fit.hpp"

#include <algorithm>
#include <cmath>

#include "schro/error.hpp"

namespace schro {

ExponentFit fit_exponent(std::span<const std::pair<double, double>> scale_value) {
  require(scale_value.size() >= 3, ErrorCode::kDegenerateInput, "need at least 3 points");
  ExponentFit fit;
  for (const auto& [s, v] : scale_value) {
    require(std::isfinite(s) && std::isfinite(v) && s > 0 && v > 0, ErrorCode::kDegenerateInput,
            "scales and values must be positive and finite");
    fit.log_points.emplace_back(std::log(s), std::log(v));
  }
  const double n = static_cast<double>(fit.log_points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : fit.log_points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : fit.log_points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  require(sxx > 1e-24, ErrorCode::kDegenerateInput, "all scales coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : fit.log_points)
    fit.max_residual = std::max(fit.max_residual, std::abs(y - fit.intercept - fit.slope * x));
  return fit;
}

}  // namespace schro
