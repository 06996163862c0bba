#pragma once

namespace schro {

// C-infinity step: 0 for v <= 0, 1 for v >= 1, and step(v) + step(1 - v) = 1.
double smooth_step(double v) noexcept;

// Even bump equal to 1 on |u| <= half_plateau, vanishing for |u| >= 2 * half_plateau,
// with bump(u)^2 + bump(3 * half_plateau - u)^2 = 1 on the transition band.
double plateau_bump(double u, double half_plateau) noexcept;

// Real Schwartz function on the line whose Fourier transform is supported in
// [-1, 1] and which satisfies 2 * time_cutoff(s) >= 1 for s in [0, 1].
double time_cutoff(double s);

}  // namespace schro
