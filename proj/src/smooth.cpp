#include "schro/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace schro {

namespace {

double rise(double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; }

// Table of the inverse Fourier transform of plateau_bump(., 1/2) on [-kSpan, kSpan].
constexpr double kSpan = 96.0;
constexpr int kPerUnit = 64;
constexpr int kQuadrature = 1024;

struct CutoffTable {
  std::vector<double> values;
  double scale = 1.0;

  CutoffTable() {
    const int n = static_cast<int>(2 * kSpan * kPerUnit) + 1;
    std::vector<double> tau(kQuadrature + 1), beta(kQuadrature + 1);
    const double h = 2.0 / kQuadrature;
    for (int i = 0; i <= kQuadrature; ++i) {
      tau[i] = -1.0 + i * h;
      beta[i] = plateau_bump(tau[i], 0.5);
    }
    values.resize(n);
    for (int j = 0; j < n; ++j) {
      const double s = -kSpan + static_cast<double>(j) / kPerUnit;
      double acc = 0.0;
      for (int i = 0; i <= kQuadrature; ++i) acc += beta[i] * std::cos(tau[i] * s);
      values[j] = acc * h / (2.0 * std::numbers::pi);
    }
    double low = values[n / 2];
    for (int j = -kPerUnit / 2; j <= kPerUnit / 2; ++j) low = std::min(low, values[n / 2 + j]);
    scale = 1.0 / (2.0 * low);
  }

  double at(double s) const {
    const double pos = (s + kSpan) * kPerUnit;
    if (pos <= 0 || pos >= static_cast<double>(values.size() - 1)) return 0.0;
    const auto j = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(j);
    return scale * ((1 - frac) * values[j] + frac * values[j + 1]);
  }
};

}  // namespace

double smooth_step(double v) noexcept {
  if (v <= 0) return 0.0;
  if (v >= 1) return 1.0;
  const double a = rise(v), b = rise(1.0 - v);
  return a / (a + b);
}

double plateau_bump(double u, double half_plateau) noexcept {
  const double a = std::abs(u);
  if (a <= half_plateau) return 1.0;
  if (a >= 2 * half_plateau) return 0.0;
  const double s = smooth_step((a - half_plateau) / half_plateau);
  return s >= 1.0 ? 0.0 : std::cos(0.5 * std::numbers::pi * s);
}

double time_cutoff(double s) {
  static const CutoffTable table;
  return table.at(s - 0.5);
}

}  // namespace schro
