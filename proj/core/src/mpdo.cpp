#include "relids/mpdo.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "relids/fft.hpp"
#include "relids/kinetic.hpp"

namespace relids {
namespace {

Complex checked_eval(const SymbolFn& a, const Point& x, const Point& xi) {
    const Complex v = a(x, xi);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::runtime_error("assemble_op: non-finite symbol value");
    if (a.real_valued && std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
        throw std::runtime_error("assemble_op: symbol declared real has nonzero imaginary part");
    return v;
}

// Symbol value with the Nyquist mirror average for real symbols.
Complex symbol_value(const SymbolFn& a, const DualLattice& dl, const Point& x, std::int64_t m) {
    const Point& xi = dl.frequencies[m];
    if (a.real_valued && dl.on_nyquist(m)) {
        Point neg(xi.size());
        for (std::size_t c = 0; c < xi.size(); ++c) neg[c] = -xi[c];
        return 0.5 * (checked_eval(a, x, xi) + checked_eval(a, x, neg));
    }
    return checked_eval(a, x, xi);
}

void hermiticity_check(const Eigen::MatrixXcd& m, const char* what) {
    double max_abs = 0.0, max_dev = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = i; j < m.cols(); ++j) {
            max_abs = std::max(max_abs, std::abs(m(i, j)));
            max_dev = std::max(max_dev, std::abs(m(i, j) - std::conj(m(j, i))));
        }
    }
    if (max_dev > 1e-10 * max_abs) {
        std::ostringstream os;
        os << what << ": Hermiticity defect " << max_dev << " exceeds 1e-10 * " << max_abs;
        throw std::runtime_error(os.str());
    }
}

}  // namespace

SymbolFn relativistic_symbol() {
    SymbolFn s;
    s.eval = [](const Point&, const Point& xi) { return Complex{free_symbol(xi), 0.0}; };
    s.order = 1.0;
    s.x_independent = true;
    s.real_valued = true;
    return s;
}

SymbolFn multiplier_symbol(std::function<double(const Point&)> f, double order) {
    SymbolFn s;
    s.eval = [fn = std::move(f)](const Point&, const Point& xi) { return Complex{fn(xi), 0.0}; };
    s.order = order;
    s.x_independent = true;
    s.real_valued = true;
    return s;
}

SymbolFn symbol_product(const SymbolFn& f, const SymbolFn& g) {
    SymbolFn s;
    s.eval = [fe = f.eval, ge = g.eval](const Point& x, const Point& xi) {
        return fe(x, xi) * ge(x, xi);
    };
    s.order = f.order + g.order;
    s.x_independent = f.x_independent && g.x_independent;
    s.real_valued = f.real_valued && g.real_valued;
    return s;
}

OperatorMatrix make_operator_matrix(const BoxGrid& g, Eigen::MatrixXcd entries, bool hermitian) {
    if (entries.rows() != g.size() || entries.cols() != g.size())
        throw std::invalid_argument("make_operator_matrix: size mismatch");
    if (hermitian) hermiticity_check(entries, "make_operator_matrix");
    return OperatorMatrix{g, std::move(entries), hermitian};
}

MagneticPhaseTable make_phase_table(const FieldSpec& fs, const BoxGrid& g) {
    if (fs.d != g.d) throw std::invalid_argument("make_phase_table: dimension mismatch");
    const std::int64_t n = g.size();
    MagneticPhaseTable table;
    table.grid = g;
    table.phases.resize(n, n);
    if (fs.is_zero()) {
        table.phases.setOnes();
        return table;
    }
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = g.point_of(i);
        table.phases(i, i) = 1.0;
        for (std::int64_t j = i + 1; j < n; ++j) {
            const Point y = g.point_of(j);
            const Point gamma = circulation(fs, x, y);
            double theta = 0.0;
            for (int c = 0; c < g.d; ++c) theta += (x[c] - y[c]) * gamma[c];
            const Complex ph{std::cos(theta), std::sin(theta)};
            table.phases(i, j) = ph;
            table.phases(j, i) = std::conj(ph);
        }
    }
    return table;
}

OperatorMatrix assemble_op(const SymbolFn& a, const FieldSpec& fs, const BoxGrid& g,
                           const MagneticPhaseTable* phases) {
    const std::int64_t n = g.size();
    const DualLattice dl = make_dual_lattice(g);
    const double pref = 1.0 / static_cast<double>(n);  // h^d L^{-d}

    MagneticPhaseTable local;
    if (phases == nullptr) {
        local = make_phase_table(fs, g);
        phases = &local;
    } else if (!(phases->grid == g)) {
        throw std::invalid_argument("assemble_op: phase table grid mismatch");
    }

    OperatorMatrix out;
    out.grid = g;
    out.entries.resize(n, n);

    // flat coordinate table, filled once through the canonical indexer
    std::vector<int> coords(static_cast<std::size_t>(n) * g.d);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::vector<int> mc = g.coords_of(i);
        for (int c = 0; c < g.d; ++c) coords[i * g.d + c] = mc[c];
    }

    std::vector<Complex> spectrum(n);
    if (a.x_independent) {
        const Point origin(g.d, 0.0);
        for (std::int64_t m = 0; m < n; ++m) spectrum[m] = symbol_value(a, dl, origin, m);
        dft_backward(g, spectrum);  // spectrum[j] = sum_k a(xi_k) e^{+i 2pi <j,k>/N}
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = 0; j < n; ++j) {
                std::int64_t diff = 0;
                for (int c = 0; c < g.d; ++c) {
                    const int dm = ((coords[i * g.d + c] - coords[j * g.d + c]) % g.N + g.N) % g.N;
                    diff = diff * g.N + dm;
                }
                out.entries(i, j) = pref * phases->phases(i, j) * spectrum[diff];
            }
        }
    } else {
        // One backward FFT per midpoint class s = a + b.
        std::vector<int> s(g.d, 0);
        Point mid(g.d);
        std::vector<int> lo(g.d), hi(g.d), ac(g.d);
        do {
            for (int c = 0; c < g.d; ++c) mid[c] = -0.5 * g.L + 0.5 * g.h * s[c];
            for (std::int64_t m = 0; m < n; ++m) spectrum[m] = symbol_value(a, dl, mid, m);
            dft_backward(g, spectrum);
            for (int c = 0; c < g.d; ++c) {
                lo[c] = std::max(0, s[c] - (g.N - 1));
                hi[c] = std::min(g.N - 1, s[c]);
                ac[c] = lo[c];
            }
            bool more = true;
            while (more) {
                std::int64_t i = 0, j = 0, diff = 0;
                for (int c = 0; c < g.d; ++c) {
                    const int bc = s[c] - ac[c];
                    i = i * g.N + ac[c];
                    j = j * g.N + bc;
                    diff = diff * g.N + (((ac[c] - bc) % g.N + g.N) % g.N);
                }
                out.entries(i, j) = pref * phases->phases(i, j) * spectrum[diff];
                more = false;
                for (int c = g.d - 1; c >= 0 && !more; --c) {
                    if (++ac[c] <= hi[c]) {
                        more = true;
                    } else {
                        ac[c] = lo[c];
                    }
                }
            }
        } while ([&] {
            for (int c = g.d - 1; c >= 0; --c) {
                if (++s[c] <= 2 * (g.N - 1)) return true;
                s[c] = 0;
            }
            return false;
        }());
    }

    if (a.real_valued) {
        hermiticity_check(out.entries, "assemble_op");
        out.hermitian = true;
    }
    return out;
}

OperatorMatrix gauge_conjugate(const OperatorMatrix& m,
                               const std::function<double(const Point&)>& phi, const BoxGrid& g) {
    if (!(m.grid == g)) throw std::invalid_argument("gauge_conjugate: grid mismatch");
    const std::int64_t n = g.size();
    std::vector<Complex> d(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = phi(g.point_of(i));
        if (!std::isfinite(v)) throw std::runtime_error("gauge_conjugate: non-finite phi");
        d[i] = Complex{std::cos(v), std::sin(v)};
    }
    OperatorMatrix out;
    out.grid = g;
    out.hermitian = m.hermitian;
    out.entries.resize(n, n);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            out.entries(i, j) = d[i] * m.entries(i, j) * std::conj(d[j]);
    return out;
}

GridFunction magnetic_convolution(const GridFunction& u,
                                  const std::function<double(const Point&)>& f,
                                  const FieldSpec& fs) {
    const BoxGrid& g = u.grid;
    const std::int64_t n = g.size();
    const double hd = g.cell_volume();
    const bool zero_field = fs.is_zero();

    std::vector<double> pts(static_cast<std::size_t>(n) * g.d);
    for (std::int64_t i = 0; i < n; ++i) {
        const Point x = g.point_of(i);
        for (int c = 0; c < g.d; ++c) pts[i * g.d + c] = x[c];
    }

    GridFunction out;
    out.grid = g;
    out.values.assign(n, Complex{0.0, 0.0});
    Point diff(g.d), x(g.d), y(g.d);
    for (std::int64_t i = 0; i < n; ++i) {
        for (int c = 0; c < g.d; ++c) x[c] = pts[i * g.d + c];
        Complex acc{0.0, 0.0};
        for (std::int64_t j = 0; j < n; ++j) {
            for (int c = 0; c < g.d; ++c) {
                y[c] = pts[j * g.d + c];
                double v = x[c] - y[c];
                if (v >= 0.5 * g.L) v -= g.L;
                if (v < -0.5 * g.L) v += g.L;
                diff[c] = v;
            }
            const double fv = f(diff);
            if (fv == 0.0) continue;
            Complex phase{1.0, 0.0};
            if (!zero_field) {
                const Point gamma = circulation(fs, x, y);
                double theta = 0.0;
                for (int c = 0; c < g.d; ++c) theta += (x[c] - y[c]) * gamma[c];
                phase = Complex{std::cos(theta), std::sin(theta)};
            }
            acc += phase * fv * u.values[j];
        }
        out.values[i] = hd * acc;
    }
    return out;
}

double standard_bump(const Point& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2));
}

double smooth_cutoff(const Point& x) {
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double q1 = std::exp(-1.0 / (2.0 - r));
    const double q2 = std::exp(-1.0 / (r - 1.0));
    return q1 / (q1 + q2);
}

GridFunction regularize(const GridFunction& u, int j, const FieldSpec& fs) {
    const BoxGrid& g = u.grid;
    if (j < 1) throw std::invalid_argument("regularize: j must be positive");
    if (1.0 / j < g.h)
        throw std::invalid_argument("regularize: mollifier width 1/j below grid spacing");
    const double jd = std::pow(static_cast<double>(j), g.d);
    const auto theta_j = [&](const Point& v) {
        Point jv(v.size());
        for (std::size_t c = 0; c < v.size(); ++c) jv[c] = j * v[c];
        return jd * standard_bump(jv);
    };
    // normalize the mollifier mass on the grid's difference lattice
    double mass = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        Point v = g.point_of(i);
        mass += theta_j(v);
    }
    mass *= g.cell_volume();
    if (!(mass > 0.0)) throw std::invalid_argument("regularize: mollifier mass vanished on grid");
    return magnetic_convolution(
        u, [&](const Point& v) { return theta_j(v) / mass; }, fs);
}

GridFunction cutoff(const GridFunction& u, int j) {
    if (j < 1) throw std::invalid_argument("cutoff: j must be positive");
    GridFunction out;
    out.grid = u.grid;
    out.values.resize(u.values.size());
    Point scaled(u.grid.d);
    for (std::int64_t i = 0; i < u.grid.size(); ++i) {
        const Point x = u.grid.point_of(i);
        for (int c = 0; c < u.grid.d; ++c) scaled[c] = x[c] / j;
        out.values[i] = smooth_cutoff(scaled) * u.values[i];
    }
    return out;
}

double operator_norm(const Eigen::MatrixXcd& m) {
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;
    // deterministic start vector
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n + 1);
        v(i) = Complex{std::cos(7.0 * t), std::sin(3.0 * t)};
    }
    v.normalize();
    double prev = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXcd w = m.adjoint() * (m * v);
        const double lambda = std::sqrt(std::max(0.0, w.norm()));
        if (w.norm() == 0.0) return 0.0;
        v = w / w.norm();
        if (it > 4 && std::abs(lambda - prev) <= 1e-12 * (1.0 + lambda)) {
            prev = lambda;
            break;
        }
        prev = lambda;
    }
    return prev;
}

CommutatorDecayResult commutator_decay_study(const FieldSpec& fs, const BoxGrid& g,
                                             const std::vector<int>& j_list) {
    if (j_list.empty()) throw std::invalid_argument("commutator_decay_study: empty j range");
    const OperatorMatrix p = assemble_op(relativistic_symbol(), fs, g);
    const std::int64_t n = g.size();
    CommutatorDecayResult res;
    for (int j : j_list) {
        Eigen::VectorXd psi(n);
        Point scaled(g.d);
        for (std::int64_t i = 0; i < n; ++i) {
            const Point x = g.point_of(i);
            for (int c = 0; c < g.d; ++c) scaled[c] = x[c] / j;
            psi(i) = smooth_cutoff(scaled);
        }
        Eigen::MatrixXcd comm = psi.asDiagonal() * p.entries - p.entries * psi.asDiagonal();
        res.entries.push_back({j, operator_norm(comm)});
    }
    // least-squares slope of log norm vs log j
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int k = static_cast<int>(res.entries.size());
    for (const auto& e : res.entries) {
        const double lx = std::log(static_cast<double>(e.j));
        const double ly = std::log(std::max(e.norm, 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    res.slope = (k > 1) ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
    return res;
}

double composition_defect(const SymbolFn& f, const SymbolFn& g_sym, const FieldSpec& fs,
                          const BoxGrid& g, const MagneticPhaseTable* phases) {
    MagneticPhaseTable local;
    if (phases == nullptr) {
        local = make_phase_table(fs, g);
        phases = &local;
    }
    const OperatorMatrix of = assemble_op(f, fs, g, phases);
    const OperatorMatrix og = assemble_op(g_sym, fs, g, phases);
    const OperatorMatrix ofg = assemble_op(symbol_product(f, g_sym), fs, g, phases);
    const Eigen::MatrixXcd defect = of.entries * og.entries - ofg.entries;
    return operator_norm(defect);
}

}  // namespace relids
