#include "relids/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "relids/fft.hpp"
#include "relids/kinetic.hpp"
#include "relids/quadrature.hpp"

namespace relids {
namespace {

void require_antisymmetric(const SmallMatrix& m, const char* what) {
    for (int i = 0; i < m.d; ++i)
        for (int j = 0; j < m.d; ++j)
            if (std::abs(m.at(i, j) + m.at(j, i)) > 0.0)
                throw std::invalid_argument(std::string(what) + ": matrix must be antisymmetric");
}

// Nodes of gauss_legendre_01 paired as (s_i, 1 - s_i) with shared weights.
struct SymmetricNodes {
    std::vector<double> s, c, w;  // c[i] = 1 - s[i] bitwise-paired
};

SymmetricNodes symmetric_nodes(int q) {
    const QuadRule& rule = gauss_legendre_01(q);
    SymmetricNodes out;
    out.s.resize(q);
    out.c.resize(q);
    out.w = rule.weights;
    for (int i = 0; i < q / 2; ++i) {
        out.s[i] = rule.nodes[i];
        out.s[q - 1 - i] = 1.0 - rule.nodes[i];
        out.c[i] = out.s[q - 1 - i];
        out.c[q - 1 - i] = out.s[i];
    }
    if (q % 2 == 1) {
        out.s[q / 2] = 0.5;
        out.c[q / 2] = 0.5;
    }
    return out;
}

}  // namespace

bool FieldSpec::is_zero() const {
    if (shift.has_value() || !modes.empty()) return false;
    for (double v : b0.a)
        if (v != 0.0) return false;
    return true;
}

SmallMatrix FieldSpec::field_at(const Point& x) const {
    SmallMatrix b = b0;
    for (const FieldMode& mode : modes) {
        double arg = mode.phase;
        for (int a = 0; a < d; ++a) arg += mode.freq[a] * x[a];
        const double c = std::cos(arg);
        for (int i = 0; i < d * d; ++i) b.a[i] += c * mode.amp.a[i];
    }
    return b;
}

FieldSpec make_zero_field(int d, int quad_order) {
    FieldSpec fs;
    fs.d = d;
    fs.b0 = SmallMatrix::zero(d);
    fs.lattice = SmallMatrix::zero(d);
    for (int i = 0; i < d; ++i) fs.lattice.at(i, i) = 1.0;
    fs.quad_order = quad_order;
    return fs;
}

FieldSpec make_constant_field_2d(double b, int quad_order) {
    FieldSpec fs = make_zero_field(2, quad_order);
    fs.b0.at(0, 1) = b;
    fs.b0.at(1, 0) = -b;
    return fs;
}

FieldSpec make_field(int d, SmallMatrix b0, std::vector<FieldMode> modes, SmallMatrix lattice,
                     int quad_order) {
    require_antisymmetric(b0, "make_field: constant part");
    for (const FieldMode& m : modes) require_antisymmetric(m.amp, "make_field: mode amplitude");
    FieldSpec fs;
    fs.d = d;
    fs.b0 = std::move(b0);
    fs.modes = std::move(modes);
    fs.lattice = std::move(lattice);
    fs.quad_order = quad_order;
    return fs;
}

PotentialSpec make_zero_potential(int d) {
    PotentialSpec ps;
    ps.d = d;
    ps.v_plus = [](const Point&) { return 0.0; };
    ps.v_minus = [](const Point&) { return 0.0; };
    return ps;
}

Point lattice_dual_frequency(const SmallMatrix& lattice, const std::vector<int>& m) {
    const int d = lattice.d;
    // Solve lattice^T freq = 2*pi*m by Gaussian elimination (d <= 3).
    std::vector<std::vector<double>> A(d, std::vector<double>(d + 1));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) A[i][j] = lattice.at(j, i);
        A[i][d] = 2.0 * M_PI * m[i];
    }
    for (int col = 0; col < d; ++col) {
        int piv = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        if (std::abs(A[col][col]) < 1e-14)
            throw std::invalid_argument("lattice_dual_frequency: singular lattice");
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            for (int c = col; c <= d; ++c) A[r][c] -= f * A[col][c];
        }
    }
    Point freq(d);
    for (int i = 0; i < d; ++i) freq[i] = A[i][d] / A[i][i];
    return freq;
}

Point vector_potential(const FieldSpec& fs, const Point& x) {
    const int d = fs.d;
    Point a(d, 0.0);
    if (fs.modes.empty()) {
        // Constant field: A_j = (1/2) sum_k B_{kj} x_k.
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += fs.b0.at(k, j) * x[k];
            a[j] = 0.5 * acc;
        }
    } else {
        const QuadRule& rule = gauss_legendre_01(fs.quad_order);
        Point sx(d);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double s = rule.nodes[i];
            for (int c = 0; c < d; ++c) sx[c] = s * x[c];
            const SmallMatrix b = fs.field_at(sx);
            const double ws = rule.weights[i] * s;
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) acc += x[k] * b.at(k, j);
                a[j] += ws * acc;
            }
        }
    }
    if (fs.shift.has_value()) {
        const Point grad = fs.shift->grad(x);
        for (int j = 0; j < d; ++j) a[j] += grad[j];
    }
    return a;
}

Point circulation(const FieldSpec& fs, const Point& x, const Point& y) {
    const int d = fs.d;
    const int q = fs.quad_order;
    const SymmetricNodes nodes = symmetric_nodes(q);
    Point acc(d, 0.0);
    Point p1(d), p2(d);
    for (int i = 0; i < q / 2; ++i) {
        const int ip = q - 1 - i;
        for (int c = 0; c < d; ++c) {
            p1[c] = nodes.c[i] * x[c] + nodes.s[i] * y[c];
            p2[c] = nodes.c[ip] * x[c] + nodes.s[ip] * y[c];
        }
        const Point a1 = vector_potential(fs, p1);
        const Point a2 = vector_potential(fs, p2);
        for (int c = 0; c < d; ++c) acc[c] += nodes.w[i] * (a1[c] + a2[c]);
    }
    if (q % 2 == 1) {
        for (int c = 0; c < d; ++c) p1[c] = 0.5 * x[c] + 0.5 * y[c];
        const Point a1 = vector_potential(fs, p1);
        for (int c = 0; c < d; ++c) acc[c] += nodes.w[q / 2] * a1[c];
    }
    return acc;
}

double verify_gauge(const FieldSpec& fs, const BoxGrid& g) {
    if (fs.d != g.d) throw std::invalid_argument("verify_gauge: dimension mismatch");
    const int d = g.d;
    double worst = 0.0;
    const std::int64_t n = g.size();
    for (std::int64_t idx = 0; idx < n; ++idx) {
        const std::vector<int> mc = g.coords_of(idx);
        bool interior = true;
        for (int a = 0; a < d; ++a)
            if (mc[a] == 0 || mc[a] == g.N - 1) interior = false;
        if (!interior) continue;
        const Point x = g.point_of(idx);
        const SmallMatrix b = fs.field_at(x);
        for (int j = 0; j < d; ++j) {
            for (int k = j + 1; k < d; ++k) {
                Point xp = x, xm = x;
                xp[j] += g.h;
                xm[j] -= g.h;
                const double dAk = (vector_potential(fs, xp)[k] - vector_potential(fs, xm)[k]) /
                                   (2.0 * g.h);
                xp[j] -= g.h;
                xm[j] += g.h;
                xp[k] += g.h;
                xm[k] -= g.h;
                const double dAj = (vector_potential(fs, xp)[j] - vector_potential(fs, xm)[j]) /
                                   (2.0 * g.h);
                worst = std::max(worst, std::abs(dAk - dAj - b.at(j, k)));
            }
        }
    }
    return worst;
}

double field_closedness_residual(const FieldSpec& fs, const BoxGrid& g) {
    if (fs.d == 2) return 0.0;
    double worst = 0.0;
    for (std::int64_t idx = 0; idx < g.size(); ++idx) {
        const std::vector<int> mc = g.coords_of(idx);
        bool interior = true;
        for (int a = 0; a < g.d; ++a)
            if (mc[a] == 0 || mc[a] == g.N - 1) interior = false;
        if (!interior) continue;
        const Point x = g.point_of(idx);
        // dB components: dB_{ijk} = d_i B_jk + d_j B_ki + d_k B_ij
        for (int i = 0; i < g.d; ++i) {
            for (int j = i + 1; j < g.d; ++j) {
                for (int k = j + 1; k < g.d; ++k) {
                    const auto partial = [&](int axis, int r, int c) {
                        Point xp = x, xm = x;
                        xp[axis] += g.h;
                        xm[axis] -= g.h;
                        return (fs.field_at(xp).at(r, c) - fs.field_at(xm).at(r, c)) /
                               (2.0 * g.h);
                    };
                    const double res =
                        partial(i, j, k) + partial(j, k, i) + partial(k, i, j);
                    worst = std::max(worst, std::abs(res));
                }
            }
        }
    }
    return worst;
}

std::vector<double> kato_diagnostic(const std::function<double(const Point&)>& W,
                                    const std::vector<double>& t_list, const BoxGrid& g) {
    const std::int64_t n = g.size();
    std::vector<Complex> w_hat(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = W(g.point_of(i));
        if (v < 0.0) throw std::invalid_argument("kato_diagnostic: negative W sample");
        w_hat[i] = v;
    }
    dft_forward(g, w_hat);
    const DualLattice dl = make_dual_lattice(g);

    std::vector<double> out;
    out.reserve(t_list.size());
    const QuadRule& base = gauss_legendre_01(32);
    std::vector<Complex> buf(n);
    std::vector<double> integral(n);
    for (double t : t_list) {
        if (!(t > 0.0)) throw std::invalid_argument("kato_diagnostic: t must be positive");
        std::fill(integral.begin(), integral.end(), 0.0);
        for (std::size_t q = 0; q < base.size(); ++q) {
            const double s = t * base.nodes[q];
            const double w = t * base.weights[q];
            for (std::int64_t m = 0; m < n; ++m)
                buf[m] = w_hat[m] * std::exp(-s * free_symbol(dl.frequencies[m]));
            dft_backward(g, buf);
            const double scale = 1.0 / static_cast<double>(n);
            for (std::int64_t i = 0; i < n; ++i) integral[i] += w * buf[i].real() * scale;
        }
        double sup = 0.0;
        for (std::int64_t i = 0; i < n; ++i) sup = std::max(sup, integral[i]);
        out.push_back(sup);
    }
    return out;
}

}  // namespace relids
