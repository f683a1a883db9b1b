#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace relids {

using Complex = std::complex<double>;
using Point = std::vector<double>;  // length d

inline constexpr std::int64_t kDefaultMatrixBudget = 4096;

/// Uniform grid on the box [-L/2, L/2)^d with N points per axis.
/// Flattening is row-major with axis 0 slowest; every module must go
/// through index_of/coords_of rather than re-deriving the layout.
struct BoxGrid {
    int d = 0;
    double L = 0.0;
    int N = 0;
    double h = 0.0;  // derived: L / N

    [[nodiscard]] std::int64_t size() const {
        std::int64_t s = 1;
        for (int a = 0; a < d; ++a) s *= N;
        return s;
    }

    [[nodiscard]] std::int64_t index_of(const std::vector<int>& multi) const {
        std::int64_t idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * N + multi[a];
        return idx;
    }

    [[nodiscard]] std::vector<int> coords_of(std::int64_t idx) const {
        std::vector<int> multi(d);
        for (int a = d - 1; a >= 0; --a) {
            multi[a] = static_cast<int>(idx % N);
            idx /= N;
        }
        return multi;
    }

    [[nodiscard]] Point point_of(std::int64_t idx) const {
        Point x(d);
        for (int a = d - 1; a >= 0; --a) {
            x[a] = -0.5 * L + h * static_cast<double>(idx % N);
            idx /= N;
        }
        return x;
    }

    [[nodiscard]] double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < d; ++a) v *= h;
        return v;
    }

    friend bool operator==(const BoxGrid& a, const BoxGrid& b) {
        return a.d == b.d && a.L == b.L && a.N == b.N;
    }
};

/// Complex-valued function sampled on a BoxGrid, length N^d.
struct GridFunction {
    BoxGrid grid;
    std::vector<Complex> values;
};

/// Dual frequency lattice xi = (2*pi/L) * k, k in [-N/2, N/2)^d.
/// Frequencies are stored in DFT order (index m <-> k = m or m - N),
/// matching the layout of forward/backward transforms.
struct DualLattice {
    BoxGrid grid;
    std::vector<Point> frequencies;  // N^d entries, DFT order
    double weight = 0.0;             // L^{-d}: Riemann weight for (2pi)^{-d} dxi

    /// True when any component of frequency m sits on the Nyquist row k = -N/2.
    [[nodiscard]] bool on_nyquist(std::int64_t m) const;
};

BoxGrid make_grid(int d, double L, int N, std::int64_t budget = kDefaultMatrixBudget);

DualLattice make_dual_lattice(const BoxGrid& g);

/// Samples f at every grid point; throws if any sample is non-finite,
/// naming the offending point.
GridFunction sample(const std::function<Complex(const Point&)>& f, const BoxGrid& g);

/// Discrete L2 pairing h^d * sum_k u_k * conj(v_k).
Complex l2_inner(const GridFunction& u, const GridFunction& v);

double l2_norm(const GridFunction& u);

/// Max |u_k| over the grid.
double sup_norm(const GridFunction& u);

}  // namespace relids
