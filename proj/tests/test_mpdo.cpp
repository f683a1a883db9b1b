#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "relids/fft.hpp"
#include "relids/kinetic.hpp"
#include "relids/mpdo.hpp"
#include "support/oracles.hpp"

using namespace relids;

namespace {

FieldSpec mode_field_2d(double beta, double cell) {
    SmallMatrix amp = SmallMatrix::zero(2);
    amp.at(0, 1) = beta;
    amp.at(1, 0) = -beta;
    SmallMatrix lattice = SmallMatrix::zero(2);
    lattice.at(0, 0) = cell;
    lattice.at(1, 1) = cell;
    FieldMode mode{lattice_dual_frequency(lattice, {1, 1}), amp, 0.3};
    return make_field(2, SmallMatrix::zero(2), {mode}, lattice);
}

// Direct triple-sum realization of the quantization formula, including the
// Nyquist mirror rule; the independent check on the FFT assembly path.
Eigen::MatrixXcd assemble_brute_force(const SymbolFn& a, const FieldSpec& fs, const BoxGrid& g) {
    const std::int64_t n = g.size();
    const DualLattice dl = make_dual_lattice(g);
    Eigen::MatrixXcd k(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = g.point_of(i);
        for (std::int64_t j = 0; j < n; ++j) {
            const Point y = g.point_of(j);
            const Point gamma = circulation(fs, x, y);
            Point mid(g.d);
            for (int c = 0; c < g.d; ++c) mid[c] = 0.5 * (x[c] + y[c]);
            Complex acc{0.0, 0.0};
            for (std::int64_t m = 0; m < n; ++m) {
                const Point& xi = dl.frequencies[m];
                Complex val = a(mid, xi);
                if (a.real_valued && dl.on_nyquist(m)) {
                    Point neg(g.d);
                    for (int c = 0; c < g.d; ++c) neg[c] = -xi[c];
                    val = 0.5 * (val + a(mid, neg));
                }
                double theta = 0.0;
                for (int c = 0; c < g.d; ++c) theta += (x[c] - y[c]) * (xi[c] + gamma[c]);
                acc += Complex{std::cos(theta), std::sin(theta)} * val;
            }
            k(i, j) = acc / static_cast<double>(n);
        }
    }
    return k;
}

std::vector<double> sorted_eigenvalues(const OperatorMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries,
                                                       Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace

TEST_CASE("assemble_op: unit symbol gives the identity for any field") {
    const BoxGrid g = make_grid(2, 8.0, 6);
    SymbolFn one;
    one.eval = [](const Point&, const Point&) { return Complex{1.0, 0.0}; };
    one.x_independent = true;
    one.real_valued = true;
    for (const FieldSpec& fs :
         {make_zero_field(2), make_constant_field_2d(0.5), mode_field_2d(0.4, 4.0)}) {
        const OperatorMatrix m = assemble_op(one, fs, g);
        CHECK((m.entries - Eigen::MatrixXcd::Identity(g.size(), g.size())).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("assemble_op: free symbol is DFT-diagonal with exact eigenvalues") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    const OperatorMatrix m = assemble_op(relativistic_symbol(), make_zero_field(2), g);
    CHECK(m.hermitian);

    const DualLattice dl = make_dual_lattice(g);
    std::vector<double> expect;
    for (const Point& xi : dl.frequencies) expect.push_back(free_symbol(xi));
    std::sort(expect.begin(), expect.end());

    const std::vector<double> got = sorted_eigenvalues(m);
    double max_gap = 0.0, max_val = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        max_gap = std::max(max_gap, std::abs(got[i] - expect[i]));
        max_val = std::max(max_val, std::abs(expect[i]));
    }
    CHECK(max_gap <= 1e-10 * max_val);
    CHECK(got.front() >= -1e-12);
    CHECK(got.front() <= 1e-12);  // ground value 0 at xi = 0
}

TEST_CASE("assemble_op: DFT diagonalization for a generic even multiplier") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    const SymbolFn a = multiplier_symbol(
        [](const Point& xi) { return std::cos(xi[0]) + 0.5 * std::cos(2.0 * xi[1]); }, 0.0);
    const OperatorMatrix m = assemble_op(a, make_zero_field(2), g);
    const DualLattice dl = make_dual_lattice(g);
    std::vector<double> expect;
    for (const Point& xi : dl.frequencies)
        expect.push_back(std::cos(xi[0]) + 0.5 * std::cos(2.0 * xi[1]));
    std::sort(expect.begin(), expect.end());
    const std::vector<double> got = sorted_eigenvalues(m);
    double max_val = 0.0;
    for (double v : expect) max_val = std::max(max_val, std::abs(v));
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - expect[i]) <= 1e-10 * max_val);
}

TEST_CASE("assemble_op: magnetic case is Hermitian with nonnegative spectrum") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    for (const FieldSpec& fs : {make_constant_field_2d(0.5), mode_field_2d(0.6, 4.0)}) {
        const OperatorMatrix m = assemble_op(relativistic_symbol(), fs, g);
        CHECK(m.hermitian);
        const std::vector<double> ev = sorted_eigenvalues(m);
        CHECK(ev.front() >= -1e-8);
    }
}

TEST_CASE("assemble_op: FFT path matches the brute-force sum") {
    const BoxGrid g = make_grid(2, 6.0, 6);
    SUBCASE("x-independent symbol, constant field") {
        const FieldSpec fs = make_constant_field_2d(0.7);
        const OperatorMatrix fast = assemble_op(relativistic_symbol(), fs, g);
        const Eigen::MatrixXcd slow = assemble_brute_force(relativistic_symbol(), fs, g);
        CHECK((fast.entries - slow).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("x-dependent symbol, periodic field") {
        const FieldSpec fs = mode_field_2d(0.5, 3.0);
        SymbolFn a;
        a.eval = [](const Point& x, const Point& xi) {
            return Complex{free_symbol(xi) + 0.3 * std::cos(M_PI * x[0] / 3.0), 0.0};
        };
        a.order = 1.0;
        a.real_valued = true;
        const OperatorMatrix fast = assemble_op(a, fs, g);
        const Eigen::MatrixXcd slow = assemble_brute_force(a, fs, g);
        CHECK((fast.entries - slow).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(fast.hermitian);
    }
}

TEST_CASE("assemble_op: rejects bad symbols") {
    const BoxGrid g = make_grid(2, 8.0, 4);
    SymbolFn blows;
    blows.eval = [](const Point&, const Point& xi) {
        return Complex{1.0 / (xi[0] * xi[0] + xi[1] * xi[1]), 0.0};  // pole at xi = 0
    };
    blows.x_independent = true;
    CHECK_THROWS_AS((void)assemble_op(blows, make_zero_field(2), g), std::runtime_error);

    SymbolFn fake_real;
    fake_real.eval = [](const Point&, const Point& xi) { return Complex{0.0, xi[0]}; };
    fake_real.x_independent = true;
    fake_real.real_valued = true;
    CHECK_THROWS_AS((void)assemble_op(fake_real, make_zero_field(2), g), std::runtime_error);
}

TEST_CASE("gauge_conjugate: constants, spectra, and the covariance identity") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    const FieldSpec fs = make_constant_field_2d(0.5);
    const MagneticPhaseTable table = make_phase_table(fs, g);
    const OperatorMatrix m = assemble_op(relativistic_symbol(), fs, g, &table);

    SUBCASE("constant phi leaves the matrix unchanged") {
        const OperatorMatrix c = gauge_conjugate(m, [](const Point&) { return 1.7; }, g);
        CHECK((c.entries - m.entries).cwiseAbs().maxCoeff() < 1e-14);
    }

    SUBCASE("spectrum is invariant under conjugation") {
        const OperatorMatrix c =
            gauge_conjugate(m, [](const Point& x) { return 0.3 * x[0] * x[1]; }, g);
        const std::vector<double> a = sorted_eigenvalues(m);
        const std::vector<double> b = sorted_eigenvalues(c);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
    }

    SUBCASE("assembling with A + d(phi) equals conjugating the assembly") {
        // polynomial phi of degree 3 <= quadrature order
        const auto phi = [](const Point& x) {
            return 0.05 * x[0] * x[0] * x[0] - 0.2 * x[0] * x[1] + 0.3 * x[1] * x[1];
        };
        FieldSpec shifted = fs;
        shifted.shift = GaugeShift{
            phi,
            [](const Point& x) {
                return Point{0.15 * x[0] * x[0] - 0.2 * x[1], -0.2 * x[0] + 0.6 * x[1]};
            }};
        const OperatorMatrix lhs = assemble_op(relativistic_symbol(), shifted, g);
        const OperatorMatrix rhs = gauge_conjugate(m, phi, g);
        CHECK((lhs.entries - rhs.entries).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("assemble_op: d = 3 free diagonalization and magnetic Hermiticity") {
    const BoxGrid g = make_grid(3, 6.0, 4);
    const OperatorMatrix free3 = assemble_op(relativistic_symbol(), make_zero_field(3), g);
    const DualLattice dl = make_dual_lattice(g);
    std::vector<double> expect;
    for (const Point& xi : dl.frequencies) expect.push_back(free_symbol(xi));
    std::sort(expect.begin(), expect.end());
    const std::vector<double> got = sorted_eigenvalues(free3);
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(std::abs(got[i] - expect[i]) <= 1e-10 * expect.back());

    SmallMatrix b0 = SmallMatrix::zero(3);
    b0.at(0, 1) = 0.4;
    b0.at(1, 0) = -0.4;
    b0.at(1, 2) = 0.2;
    b0.at(2, 1) = -0.2;
    SmallMatrix lattice = SmallMatrix::zero(3);
    for (int c = 0; c < 3; ++c) lattice.at(c, c) = 3.0;
    const FieldSpec fs = make_field(3, b0, {}, lattice);
    const OperatorMatrix mag = assemble_op(relativistic_symbol(), fs, g);
    CHECK(mag.hermitian);
    CHECK(sorted_eigenvalues(mag).front() >= -1e-8);
}

TEST_CASE("gauge covariance: trigonometric phi error decreases with the quadrature order") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    const auto phi = [&](const Point& x) { return 0.4 * std::sin(2.0 * M_PI * x[0] / g.L); };
    const auto grad = [&](const Point& x) {
        return Point{0.4 * (2.0 * M_PI / g.L) * std::cos(2.0 * M_PI * x[0] / g.L), 0.0};
    };
    double prev = -1.0;
    for (int q : {4, 8, 16}) {
        FieldSpec fs = make_constant_field_2d(0.5, q);
        const OperatorMatrix base = assemble_op(relativistic_symbol(), fs, g);
        FieldSpec shifted = fs;
        shifted.shift = GaugeShift{phi, grad};
        const OperatorMatrix lhs = assemble_op(relativistic_symbol(), shifted, g);
        const OperatorMatrix rhs = gauge_conjugate(base, phi, g);
        const double err = (lhs.entries - rhs.entries).cwiseAbs().maxCoeff();
        if (prev >= 0.0) CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-10);  // order 16 resolves the single-mode phase
}

TEST_CASE("magnetic_convolution: FFT oracle at zero field") {
    const BoxGrid g = make_grid(2, 8.0, 16);
    const GridFunction u = sample(
        [](const Point& x) {
            return Complex{std::exp(-0.7 * (x[0] * x[0] + x[1] * x[1])), 0.2 * x[0]};
        },
        g);
    const auto f = [](const Point& v) {
        Point w{2.0 * v[0], 2.0 * v[1]};
        return 4.0 * standard_bump(w);
    };
    const GridFunction direct = magnetic_convolution(u, f, make_zero_field(2));

    // circulant convolution via the DFT
    std::vector<Complex> fs_hat(g.size()), u_hat = u.values;
    for (std::int64_t m = 0; m < g.size(); ++m) {
        std::int64_t rest = m;
        Point v(g.d);
        for (int c = g.d - 1; c >= 0; --c) {
            const int mc = static_cast<int>(rest % g.N);
            rest /= g.N;
            v[c] = g.h * ((mc < g.N / 2) ? mc : mc - g.N);
        }
        fs_hat[m] = f(v);
    }
    dft_forward(g, fs_hat);
    dft_forward(g, u_hat);
    for (std::int64_t m = 0; m < g.size(); ++m)
        u_hat[m] *= fs_hat[m] * g.cell_volume() / static_cast<double>(g.size());
    dft_backward(g, u_hat);
    for (std::int64_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(direct.values[i] - u_hat[i]) < 1e-10);
}

TEST_CASE("magnetic_convolution: discrete delta acts as identity") {
    const BoxGrid g = make_grid(2, 8.0, 8);
    const FieldSpec fs = make_constant_field_2d(0.4);
    const GridFunction u = sample(
        [](const Point& x) { return Complex{std::sin(x[0]) + 0.3, 0.1 * x[1]}; }, g);
    const double hd_inv = 1.0 / g.cell_volume();
    const auto delta = [&](const Point& v) {
        for (double c : v)
            if (c != 0.0) return 0.0;
        return hd_inv;
    };
    const GridFunction out = magnetic_convolution(u, delta, fs);
    for (std::int64_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(out.values[i] - u.values[i]) < 1e-13);
}

TEST_CASE("regularize: mean continuity, mass, support, sup bound") {
    // 1/j >= h for j up to 8 needs h <= 1/8
    const BoxGrid g = make_grid(2, 8.0, 64, 8192);
    const FieldSpec fs = mode_field_2d(0.5, 4.0);
    const GridFunction u = sample(
        [](const Point& x) {
            Point half{x[0] / 2.0, x[1] / 2.0};
            return Complex{standard_bump(half), 0.0};
        },
        g);

    SUBCASE("constant payload is reproduced at zero field") {
        const GridFunction ones =
            sample([](const Point&) { return Complex{1.0, 0.0}; }, g);
        const GridFunction r = regularize(ones, 2, make_zero_field(2));
        for (std::int64_t i = 0; i < g.size(); ++i)
            CHECK(std::abs(r.values[i] - Complex{1.0, 0.0}) < 1e-10);
    }

    SUBCASE("approximation error decreases along j = 1,2,4,8") {
        double prev = -1.0;
        for (int j : {1, 2, 4, 8}) {
            GridFunction r = regularize(u, j, fs);
            for (std::int64_t i = 0; i < g.size(); ++i) r.values[i] -= u.values[i];
            const double err = l2_norm(r);
            if (prev >= 0.0) CHECK(err < prev);
            prev = err;
        }
    }

    SUBCASE("support grows by at most 1/j") {
        const GridFunction r = regularize(u, 2, fs);
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const Point x = g.point_of(i);
            const double rad = std::hypot(x[0], x[1]);
            if (rad > 2.0 + 0.5 + 1e-12) CHECK(std::abs(r.values[i]) == 0.0);
        }
    }

    SUBCASE("sup norm does not grow") {
        const GridFunction r = regularize(u, 4, fs);
        CHECK(sup_norm(r) <= sup_norm(u) * (1.0 + 1e-12));
    }

    CHECK_THROWS_AS((void)regularize(u, 10, fs), std::invalid_argument);
}

TEST_CASE("cutoff: inside support, whole box, and monotone error") {
    const BoxGrid g = make_grid(2, 8.0, 16);
    const GridFunction u = sample(
        [](const Point& x) {
            return Complex{1.0 / (1.0 + x[0] * x[0] + x[1] * x[1]), 0.0};
        },
        g);

    // u supported in B(0, j): take a compact bump inside B(0,2) and j = 2
    const GridFunction bump = sample(
        [](const Point& x) {
            Point half{x[0] / 2.0, x[1] / 2.0};
            return Complex{standard_bump(half), 0.0};
        },
        g);
    const GridFunction kept = cutoff(bump, 2);
    for (std::int64_t i = 0; i < g.size(); ++i)
        CHECK(kept.values[i] == bump.values[i]);

    // j >= L: psi_j = 1 across the whole box
    const GridFunction all = cutoff(u, 8);
    for (std::int64_t i = 0; i < g.size(); ++i) CHECK(all.values[i] == u.values[i]);

    double prev = -1.0;
    for (int j : {1, 2, 4, 8}) {
        GridFunction r = cutoff(u, j);
        for (std::int64_t i = 0; i < g.size(); ++i) r.values[i] -= u.values[i];
        const double err = l2_norm(r);
        if (prev >= 0.0) CHECK(err <= prev + 1e-15);
        prev = err;
    }
}

TEST_CASE("commutator_decay_study: slope window and degenerate cutoffs") {
    const BoxGrid g = make_grid(2, 16.0, 32);
    const FieldSpec fs = make_zero_field(2);
    const CommutatorDecayResult res = commutator_decay_study(fs, g, {1, 2, 4});
    CHECK(res.slope >= -1.4);
    CHECK(res.slope <= -0.6);
    CHECK(res.entries[0].norm >= res.entries[1].norm);
    CHECK(res.entries[1].norm >= res.entries[2].norm);

    // psi_j == 1 on the whole box: commutator vanishes
    const CommutatorDecayResult flat = commutator_decay_study(fs, g, {16});
    CHECK(flat.entries[0].norm <= 1e-10);

    CHECK_THROWS_AS(commutator_decay_study(fs, g, {}), std::invalid_argument);
}

TEST_CASE("composition_defect: exact composites and the dilation trend") {
    const BoxGrid g = make_grid(2, 8.0, 8);

    SUBCASE("unit left factor") {
        SymbolFn one;
        one.eval = [](const Point&, const Point&) { return Complex{1.0, 0.0}; };
        one.x_independent = true;
        one.real_valued = true;
        SymbolFn bump;
        bump.eval = [](const Point& x, const Point&) {
            return Complex{1.0 + 0.5 * std::exp(-x[0] * x[0] - x[1] * x[1]), 0.0};
        };
        bump.real_valued = true;
        const FieldSpec fs = make_constant_field_2d(0.3);
        CHECK(composition_defect(one, bump, fs, g) < 1e-10);
    }

    SUBCASE("Fourier multipliers compose exactly at zero field") {
        const SymbolFn f = relativistic_symbol();
        const SymbolFn h = multiplier_symbol(
            [](const Point& xi) { return 1.0 / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]); }, -2.0);
        CHECK(composition_defect(f, h, make_zero_field(2), g) < 1e-10);
    }

    SUBCASE("defect is lower order under symbol dilation") {
        const FieldSpec fs = make_constant_field_2d(0.5);
        const MagneticPhaseTable table = make_phase_table(fs, g);
        SymbolFn bump;
        bump.eval = [](const Point& x, const Point&) {
            return Complex{std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])), 0.0};
        };
        bump.real_valued = true;
        double prev_rel = -1.0;
        for (double lambda : {1.0, 2.0, 4.0}) {
            SymbolFn f;
            f.eval = [lambda](const Point&, const Point& xi) {
                Point scaled(xi.size());
                for (std::size_t c = 0; c < xi.size(); ++c) scaled[c] = xi[c] * lambda;
                return Complex{free_symbol(scaled), 0.0};
            };
            f.x_independent = true;
            f.real_valued = true;
            const double defect = composition_defect(f, bump, fs, g, &table);
            const OperatorMatrix prod =
                assemble_op(symbol_product(f, bump), fs, g, &table);
            const double rel = defect / operator_norm(prod.entries);
            if (prev_rel >= 0.0) CHECK(rel < prev_rel);
            prev_rel = rel;
        }
    }
}
