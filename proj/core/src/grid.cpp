#include "relids/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relids {

BoxGrid make_grid(int d, double L, int N, std::int64_t budget) {
    if (d < 2) throw std::invalid_argument("make_grid: dimension d must be >= 2");
    if (!(L > 0.0)) throw std::invalid_argument("make_grid: box side L must be positive");
    if (N < 4 || N % 2 != 0) throw std::invalid_argument("make_grid: N must be an even integer >= 4");
    std::int64_t total = 1;
    for (int a = 0; a < d; ++a) {
        total *= N;
        if (total > budget) {
            std::ostringstream os;
            os << "make_grid: N^d = " << std::pow(static_cast<double>(N), d)
               << " exceeds matrix budget " << budget;
            throw std::length_error(os.str());
        }
    }
    BoxGrid g;
    g.d = d;
    g.L = L;
    g.N = N;
    g.h = L / N;
    return g;
}

bool DualLattice::on_nyquist(std::int64_t m) const {
    const int N = grid.N;
    for (int a = grid.d - 1; a >= 0; --a) {
        const int ma = static_cast<int>(m % N);
        if (ma == N / 2) return true;  // DFT index N/2 carries k = -N/2
        m /= N;
    }
    return false;
}

DualLattice make_dual_lattice(const BoxGrid& g) {
    DualLattice dl;
    dl.grid = g;
    const std::int64_t n = g.size();
    dl.frequencies.resize(n);
    const double step = 2.0 * M_PI / g.L;
    for (std::int64_t m = 0; m < n; ++m) {
        Point xi(g.d);
        std::int64_t rest = m;
        for (int a = g.d - 1; a >= 0; --a) {
            const int ma = static_cast<int>(rest % g.N);
            rest /= g.N;
            const int k = (ma < g.N / 2) ? ma : ma - g.N;
            xi[a] = step * k;
        }
        dl.frequencies[m] = std::move(xi);
    }
    dl.weight = std::pow(g.L, -g.d);
    return dl;
}

GridFunction sample(const std::function<Complex(const Point&)>& f, const BoxGrid& g) {
    GridFunction u;
    u.grid = g;
    const std::int64_t n = g.size();
    u.values.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = g.point_of(i);
        const Complex v = f(x);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "sample: non-finite value at point (";
            for (int a = 0; a < g.d; ++a) os << (a ? ", " : "") << x[a];
            os << ")";
            throw std::runtime_error(os.str());
        }
        u.values[i] = v;
    }
    return u;
}

Complex l2_inner(const GridFunction& u, const GridFunction& v) {
    if (!(u.grid == v.grid)) throw std::invalid_argument("l2_inner: grid mismatch");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < u.values.size(); ++i) acc += u.values[i] * std::conj(v.values[i]);
    return acc * u.grid.cell_volume();
}

double l2_norm(const GridFunction& u) {
    double acc = 0.0;
    for (const Complex& z : u.values) acc += std::norm(z);
    return std::sqrt(acc * u.grid.cell_volume());
}

double sup_norm(const GridFunction& u) {
    double m = 0.0;
    for (const Complex& z : u.values) m = std::max(m, std::abs(z));
    return m;
}

}  // namespace relids
