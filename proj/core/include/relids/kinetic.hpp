#pragma once

#include <vector>

#include "relids/grid.hpp"

namespace relids {

/// Parameters for kernel evaluations with truncated spatial integrals.
struct KernelParams {
    int d = 2;
    double t = 1.0;
    double r_max = 20.0;  // truncation radius, must be >= 10 * max(1, t)
};

KernelParams make_kernel_params(int d, double t, double r_max);

/// Modified Bessel function of the third kind K_nu(r), nu in {k/2 : k >= 1}.
/// Half-integer orders use the closed finite sums plus upward recurrence;
/// integer orders use the ascending series for small r and the asymptotic
/// expansion beyond the crossover.
double bessel_k(double nu, double r);

/// Relativistic heat kernel p_t(x) (radial; takes |x|).
double heat_kernel_radial(double abs_x, double t, int d);
double heat_kernel(const Point& x, double t, int d);

/// Lévy measure density n(y) as a function of |y| > 0.
double levy_density_radial(double abs_y, int d);
double levy_density(const Point& y, int d);

/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

/// Mean over the unit sphere of e^{i z <omega, e>}; real by symmetry.
double sphere_phase_mean(double z, int d);

/// |(<xi>-1) + int_{eps<=|y|<=R} [e^{i<y,xi>} - 1 - i<y,xi> 1_{B(0,1)}] n(dy)|
/// by polar quadrature. Requires 0 < eps < 1 < R.
double lk_residual(const Point& xi, int d, double eps, double R);

/// Multiplier symbol of the free Hamiltonian: <xi> - 1.
double free_symbol(const Point& xi);

/// e^{-t H_0} u via the DFT multiplier e^{-t(<xi>-1)} (the Fourier path).
GridFunction free_semigroup_apply(const GridFunction& u, double t);

/// e^{-t H_0} u via discrete convolution with the minimal-image sampled
/// kernel p_t; the cross-check path for free_semigroup_apply.
GridFunction free_semigroup_apply_kernel(const GridFunction& u, double t);

/// Grid kernel of e^{-t H_0}: backward transform of the multiplier, as a
/// function of the lattice difference (length N^d, difference in DFT order).
/// Row mass is exactly 1 for every t.
std::vector<double> discrete_heat_kernel(const BoxGrid& g, double t);

}  // namespace relids
