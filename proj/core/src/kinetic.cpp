#include "relids/kinetic.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "relids/fft.hpp"
#include "relids/quadrature.hpp"

namespace relids {
namespace {

constexpr long double kEulerGamma = 0.5772156649015328606065120900824024L;

// Crossover between the ascending series and the asymptotic expansion for
// integer orders. At r = 10.5 the series (accumulated in long double to
// absorb the e^{2r} cancellation) and the optimally truncated asymptotic
// series both sit near 1e-10 relative; a crossover at r = 2 would leave the
// asymptotic branch ~1e-3 off, far outside the seam-continuity target.
constexpr double kIntegerCrossover = 10.5;

// Ascending series for K_0 and K_1 (A&S 9.6.10-13), long double throughout.
long double bessel_i0_series(long double r) {
    const long double q = 0.25L * r * r;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (term < 1e-25L * sum) break;
    }
    return sum;
}

long double bessel_i1_series(long double r) {
    const long double q = 0.25L * r * r;
    long double term = 0.5L * r, sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * (k + 1));
        sum += term;
        if (term < 1e-25L * sum) break;
    }
    return sum;
}

double bessel_k0_series(double rd) {
    const long double r = rd;
    const long double q = 0.25L * r * r;
    long double term = 1.0L, hk = 0.0L, sum = 0.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        hk += 1.0L / k;
        sum += term * hk;
        if (term * hk < 1e-25L * (sum + 1.0L)) break;
    }
    const long double lead = -(std::log(r / 2.0L) + kEulerGamma) * bessel_i0_series(r);
    return static_cast<double>(lead + sum);
}

double bessel_k1_series(double rd) {
    const long double r = rd;
    const long double q = 0.25L * r * r;
    // K_1(r) = ln(r/2) I_1(r) + 1/r - (r/4) sum_k (h_k + h_{k+1}) q^k / (k!(k+1)!)
    long double term = 1.0L, hk = 0.0L, hk1 = 1.0L, sum = hk + hk1;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * (k + 1));
        hk += 1.0L / k;
        hk1 += 1.0L / (k + 1);
        sum += term * (hk + hk1);
        if (term * (hk + hk1) < 1e-25L * sum) break;
    }
    const long double lead = (std::log(r / 2.0L) + kEulerGamma) * bessel_i1_series(r);
    return static_cast<double>(lead + 1.0L / r - 0.25L * r * sum);
}

// Asymptotic expansion K_n(r) ~ sqrt(pi/2r) e^{-r} sum_k a_k(n)/(8r)^k,
// truncated at the smallest term.
double bessel_k_asymptotic(int n, double rd) {
    const long double r = rd;
    const long double mu = 4.0L * n * n;
    long double term = 1.0L, sum = 1.0L, prev = 1e30L;
    for (int k = 1; k < 40; ++k) {
        const long double num = mu - (2.0L * k - 1.0L) * (2.0L * k - 1.0L);
        term *= num / (8.0L * r * k);
        if (std::abs(static_cast<double>(term)) >= std::abs(static_cast<double>(prev))) break;
        sum += term;
        prev = term;
    }
    return static_cast<double>(std::sqrt(M_PI / (2.0L * r)) * std::exp(-r) * sum);
}

double bessel_k_integer(int n, double r) {
    double k0, k1;
    if (r <= kIntegerCrossover) {
        k0 = bessel_k0_series(r);
        k1 = bessel_k1_series(r);
    } else {
        k0 = bessel_k_asymptotic(0, r);
        k1 = bessel_k_asymptotic(1, r);
    }
    if (n == 0) return k0;
    double km = k0, k = k1;
    for (int m = 1; m < n; ++m) {
        const double kp = km + (2.0 * m / r) * k;
        km = k;
        k = kp;
    }
    return k;
}

double bessel_k_half_integer(int twice_nu, double r) {
    // K_{1/2}(r) = sqrt(pi/2r) e^{-r}; K_{3/2}(r) = sqrt(pi/2r) e^{-r} (1 + 1/r);
    // upward recurrence K_{nu+1} = K_{nu-1} + (2 nu / r) K_nu.
    const double base = std::sqrt(M_PI / (2.0 * r)) * std::exp(-r);
    double km = base;                    // K_{1/2}
    double k = base * (1.0 + 1.0 / r);   // K_{3/2}
    if (twice_nu == 1) return km;
    if (twice_nu == 3) return k;
    double nu = 1.5;
    for (int m = 5; m <= twice_nu; m += 2) {
        const double kp = km + (2.0 * nu / r) * k;
        km = k;
        k = kp;
        nu += 1.0;
    }
    return k;
}

}  // namespace

KernelParams make_kernel_params(int d, double t, double r_max) {
    if (!(t > 0.0)) throw std::invalid_argument("make_kernel_params: t must be positive");
    if (r_max < 10.0 * std::max(1.0, t))
        throw std::invalid_argument("make_kernel_params: r_max must be >= 10*max(1,t)");
    return KernelParams{d, t, r_max};
}

double bessel_k(double nu, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("bessel_k: r must be positive");
    if (!(nu > 0.0)) throw std::invalid_argument("bessel_k: order must be positive");
    const double twice = 2.0 * nu;
    const double rounded = std::round(twice);
    if (std::abs(twice - rounded) > 1e-12)
        throw std::invalid_argument("bessel_k: order must be a positive multiple of 1/2");
    const int k2 = static_cast<int>(rounded);
    if (k2 % 2 == 1) return bessel_k_half_integer(k2, r);
    return bessel_k_integer(k2 / 2, r);
}

double heat_kernel_radial(double abs_x, double t, int d) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    const double rho = std::sqrt(abs_x * abs_x + t * t);
    const double nu = 0.5 * (d + 1);
    const double pref = std::pow(2.0, -0.5 * (d - 1)) * std::pow(M_PI, -0.5 * (d + 1));
    return pref * t * std::exp(t) * std::pow(rho, -nu) * bessel_k(nu, rho);
}

double heat_kernel(const Point& x, double t, int d) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return heat_kernel_radial(std::sqrt(r2), t, d);
}

double levy_density_radial(double abs_y, int d) {
    if (!(abs_y > 0.0)) throw std::invalid_argument("levy_density: |y| must be positive");
    const double nu = 0.5 * (d + 1);
    return 2.0 * std::pow(2.0 * M_PI, -nu) * std::pow(abs_y, -nu) * bessel_k(nu, abs_y);
}

double levy_density(const Point& y, int d) {
    double r2 = 0.0;
    for (double c : y) r2 += c * c;
    return levy_density_radial(std::sqrt(r2), d);
}

double sphere_area(int d) {
    // 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double sphere_phase_mean(double z, int d) {
    if (d == 3) {
        if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
        return std::sin(z) / z;
    }
    if (d == 2) {
        // (1/2pi) int e^{i z cos(theta)} dtheta; periodic trapezoid.
        const int n = 256;
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += std::cos(z * std::cos(2.0 * M_PI * k / n));
        return acc / n;
    }
    throw std::invalid_argument("sphere_phase_mean: only d = 2, 3 supported");
}

double free_symbol(const Point& xi) {
    double r2 = 0.0;
    for (double c : xi) r2 += c * c;
    return std::sqrt(1.0 + r2) - 1.0;
}

double lk_residual(const Point& xi, int d, double eps, double R) {
    if (!(eps > 0.0 && eps < 1.0 && R > 1.0))
        throw std::invalid_argument("lk_residual: need 0 < eps < 1 < R");
    double norm_xi = 0.0;
    for (double c : xi) norm_xi += c * c;
    norm_xi = std::sqrt(norm_xi);
    // The linear compensator integrates to zero over each sphere; what is
    // left is S_{d-1} int (mean_phase - 1) n(r) r^{d-1} dr.
    const QuadRule rule = log_panel_rule(eps, R, 240, 8);
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double r = rule.nodes[i];
        const double g = (sphere_phase_mean(r * norm_xi, d) - 1.0) * levy_density_radial(r, d) *
                         std::pow(r, d - 1);
        integral += rule.weights[i] * g;
    }
    integral *= sphere_area(d);
    return std::abs(free_symbol(xi) + integral);
}

GridFunction free_semigroup_apply(const GridFunction& u, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("free_semigroup_apply: t must be positive");
    const DualLattice dl = make_dual_lattice(u.grid);
    std::vector<Complex> data = u.values;
    dft_forward(u.grid, data);
    for (std::int64_t m = 0; m < u.grid.size(); ++m)
        data[m] *= std::exp(-t * free_symbol(dl.frequencies[m]));
    dft_backward(u.grid, data);
    GridFunction out;
    out.grid = u.grid;
    out.values = std::move(data);
    const double scale = 1.0 / static_cast<double>(u.grid.size());
    for (Complex& z : out.values) z *= scale;
    return out;
}

GridFunction free_semigroup_apply_kernel(const GridFunction& u, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("free_semigroup_apply_kernel: t must be positive");
    const BoxGrid& g = u.grid;
    // Minimal-image sampled kernel on the difference lattice, circulant apply by FFT.
    std::vector<Complex> kernel(g.size());
    for (std::int64_t m = 0; m < g.size(); ++m) {
        std::int64_t rest = m;
        double r2 = 0.0;
        for (int a = g.d - 1; a >= 0; --a) {
            const int ma = static_cast<int>(rest % g.N);
            rest /= g.N;
            const int j = (ma < g.N / 2) ? ma : ma - g.N;
            const double v = g.h * j;
            r2 += v * v;
        }
        kernel[m] = heat_kernel_radial(std::sqrt(r2), t, g.d);
    }
    std::vector<Complex> uf = u.values;
    dft_forward(g, uf);
    dft_forward(g, kernel);
    const double scale = g.cell_volume() / static_cast<double>(g.size());
    for (std::int64_t m = 0; m < g.size(); ++m) uf[m] *= kernel[m] * scale;
    dft_backward(g, uf);
    GridFunction out;
    out.grid = g;
    out.values = std::move(uf);
    return out;
}

std::vector<double> discrete_heat_kernel(const BoxGrid& g, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("discrete_heat_kernel: t must be positive");
    const DualLattice dl = make_dual_lattice(g);
    std::vector<Complex> data(g.size());
    for (std::int64_t m = 0; m < g.size(); ++m)
        data[m] = std::exp(-t * free_symbol(dl.frequencies[m]));
    dft_backward(g, data);
    std::vector<double> kernel(g.size());
    const double scale = 1.0 / (g.cell_volume() * static_cast<double>(g.size()));
    for (std::int64_t m = 0; m < g.size(); ++m) kernel[m] = data[m].real() * scale;
    return kernel;
}

}  // namespace relids
