// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code = number of failed
// criteria.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "relids/fft.hpp"
#include "relids/fkito.hpp"
#include "relids/hamiltonian.hpp"
#include "relids/ids.hpp"
#include "relids/kinetic.hpp"
#include "relids/mpdo.hpp"
#include "relids/quadrature.hpp"
#include "relids/rng.hpp"

using namespace relids;

namespace {

struct SubCheck {
    bool ok;
    std::string text;
};

class Criterion {
public:
    explicit Criterion(std::string name) : name_(std::move(name)) {}

    void check(bool ok, const std::string& text) { subs_.push_back({ok, text}); }

    template <typename T>
    void check_le(T value, T bound, const std::string& what) {
        std::ostringstream os;
        os << what << " = " << value << " (<= " << bound << ")";
        subs_.push_back({value <= bound, os.str()});
    }

    bool report(double seconds) const {
        bool all = true;
        for (const SubCheck& s : subs_) all = all && s.ok;
        std::printf("[%s] %s (%.1f s)\n", all ? "PASS" : "FAIL", name_.c_str(), seconds);
        for (const SubCheck& s : subs_)
            if (!s.ok) std::printf("       failed: %s\n", s.text.c_str());
        return all;
    }

private:
    std::string name_;
    std::vector<SubCheck> subs_;
};

// ---- shared fixtures -------------------------------------------------------

const BoxGrid& grid16() {
    static const BoxGrid g = make_grid(2, 16.0, 32);
    return g;
}

const Hamiltonian& free16() {
    static const Hamiltonian h =
        assemble_h(make_zero_field(2), make_zero_potential(2), grid16());
    return h;
}

const Hamiltonian& kinetic16_b05() {
    static const Hamiltonian h =
        assemble_h(make_constant_field_2d(0.5), make_zero_potential(2), grid16());
    return h;
}

double fourier_volume_density(double lambda) {
    return ((1.0 + lambda) * (1.0 + lambda) - 1.0) / (4.0 * M_PI);
}

// ---- criteria --------------------------------------------------------------

Criterion criterion_free_ids() {
    Criterion c("free-ids-oracle (both definitions vs ((1+lambda)^2-1)/4pi)");
    const Hamiltonian& h = free16();
    const Region largest = make_centered_box(grid16(), 8.0);
    const DirichletOperator d = dirichlet_restrict(h, largest, RestrictMode::compression);
    for (double lambda : {0.5, 1.0}) {
        const double rho = fourier_volume_density(lambda);
        const double cnt = counting_ids(d, lambda);
        const double prj = projection_ids(h, largest, lambda);
        std::ostringstream a, b, m;
        a << "counting(" << lambda << ") vs oracle: " << cnt << " vs " << rho;
        b << "projection(" << lambda << ") vs oracle: " << prj << " vs " << rho;
        m << "mutual agreement(" << lambda << "): |" << cnt << " - " << prj << "|";
        c.check(std::abs(cnt - rho) <= 0.15 * rho, a.str());
        c.check(std::abs(prj - rho) <= 0.15 * rho, b.str());
        c.check(std::abs(cnt - prj) <= 0.10 * std::max(cnt, prj), m.str());
    }
    return c;
}

Criterion criterion_trend() {
    Criterion c("theorem-1.1-trend (normalized gap decreasing, final/first <= 0.5)");
    const BoxGrid g = make_grid(2, 24.0, 48);
    const BoxFamily fam = make_box_family(g, {4.0, 8.0, 14.0});
    const std::vector<TestFunction> tents{tent_function(1.0, 1.0), tent_function(1.5, 1.5),
                                          tent_function(2.0, 2.0)};
    const double b = commensurate_flux_2d(g, 1);
    for (const char* label : {"free", "constant-field"}) {
        const FieldSpec fs =
            (std::string(label) == "free") ? make_zero_field(2) : make_constant_field_2d(b);
        const Hamiltonian h = assemble_h(fs, make_zero_potential(2), g);
        const IdsTable table = ids_coincidence_run(h, fam, tents);
        for (std::size_t f = 0; f < tents.size(); ++f) {
            const double g0 = table.rows[f].gap_normalized;
            const double g1 = table.rows[tents.size() + f].gap_normalized;
            const double g2 = table.rows[2 * tents.size() + f].gap_normalized;
            std::ostringstream os;
            os << label << " " << tents[f].name << " gaps: " << g0 << " > " << g1 << " > " << g2;
            c.check(g0 > g1 && g1 > g2, os.str());
            std::ostringstream rs;
            rs << label << " " << tents[f].name << " final/first = " << g2 / g0;
            c.check(g2 / g0 <= 0.5, rs.str());
        }
    }
    return c;
}

Criterion criterion_resolvent_difference() {
    Criterion c("resolvent-difference-scaling (ratio spread <= 3x, m = 4(d+1))");
    const Hamiltonian& h = free16();
    const BoxFamily fam = make_box_family(grid16(), {4.0, 6.0, 8.0});
    const double lambda = -h.ground_energy() + 2.0;
    const std::vector<ResolventDifferenceRow> rows =
        resolvent_difference_study(h, fam.boxes, lambda, 12);
    double rmin = 1e300, rmax = 0.0;
    for (const auto& r : rows) {
        rmin = std::min(rmin, r.ratio);
        rmax = std::max(rmax, r.ratio);
    }
    c.check_le(rmax / rmin, 3.0, "ratio spread");
    std::ostringstream os;
    os << "normalized gaps decrease: " << rows[0].normalized_gap << " > "
       << rows[1].normalized_gap << " > " << rows[2].normalized_gap;
    c.check(rows[0].normalized_gap > rows[1].normalized_gap &&
                rows[1].normalized_gap > rows[2].normalized_gap,
            os.str());
    return c;
}

Criterion criterion_trace_scalings() {
    Criterion c("trace-norm-scalings (I2 slope in [0.35,0.65], I1 slope in [0.8,1.2])");
    const Hamiltonian& h = free16();
    const BoxFamily fam = make_box_family(grid16(), {4.0, 6.0, 8.0});
    const TraceScalingResult res = trace_scaling_study(h, fam.boxes, 2.0, 3.0);
    std::ostringstream a, b;
    a << "I2 slope = " << res.i2_slope;
    b << "I1 slope = " << res.i1_slope;
    c.check(res.i2_slope >= 0.35 && res.i2_slope <= 0.65, a.str());
    c.check(res.i1_slope >= 0.8 && res.i1_slope <= 1.2, b.str());
    return c;
}

Criterion criterion_diamagnetic() {
    Criterion c("diamagnetic-inequality (matrix entrywise 1e-8; MC within 3 sigma)");
    const Hamiltonian& h0 = free16();
    const Hamiltonian& ha = kinetic16_b05();
    RngStream rng(2718, 0);
    double worst = -1e300;
    for (double t : {0.25, 1.0}) {
        const OperatorMatrix sa = func_calc(ha, [&](double x) { return std::exp(-t * x); });
        const OperatorMatrix s0 = func_calc(h0, [&](double x) { return std::exp(-t * x); });
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXcd u(grid16().size());
            for (std::int64_t i = 0; i < grid16().size(); ++i) u(i) = rng.uniform();
            const Eigen::VectorXd lhs = (sa.entries * u).cwiseAbs();
            const Eigen::VectorXd rhs = (s0.entries * u).real();
            worst = std::max(worst, (lhs - rhs).maxCoeff());
        }
    }
    c.check_le(worst, 1e-8, "max matrix-level violation");

    const GridFunction u = sample(
        [](const Point& x) {
            return Complex{std::cos(0.4 * x[0]) * std::exp(-0.1 * (x[0] * x[0] + x[1] * x[1])),
                           0.0};
        },
        grid16());
    GridFunction absu = u;
    for (Complex& z : absu.values) z = std::abs(z);
    const McEstimate with_field = fk_estimate(u, {0.0, 0.0}, 0.5, make_constant_field_2d(0.5),
                                              make_zero_potential(2), 20000, 0.01, 99);
    const McEstimate free_abs = fk_estimate(absu, {0.0, 0.0}, 0.5, make_zero_field(2),
                                            make_zero_potential(2), 20000, 0.01, 99);
    const double slack =
        free_abs.mean.real() + 3.0 * (with_field.stderr_val + free_abs.stderr_val);
    std::ostringstream os;
    os << "MC domination: |" << std::abs(with_field.mean) << "| <= " << slack;
    c.check(std::abs(with_field.mean) <= slack, os.str());
    return c;
}

Criterion criterion_fk_oracle() {
    Criterion c("fk-ito-vs-matrix (1e5 paths, 5 probes, 3 sigma, stderr <= 5%)");
    const BoxGrid g = make_grid(2, 20.0, 40);
    const FieldSpec fs = make_constant_field_2d(0.5);
    PotentialSpec ps = make_zero_potential(2);
    ps.v_plus = [](const Point& x) {
        return 1.2 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 6.25);
    };
    const GridFunction u = sample(
        [&](const Point& x) {
            return Complex{1.5 + 0.5 * std::cos(2.0 * M_PI * x[0] / g.L), 0.0};
        },
        g);
    const double t = 0.5;
    const Hamiltonian h = assemble_h(fs, ps, g);
    const OperatorMatrix sg = func_calc(h, [&](double x) { return std::exp(-t * x); });
    Eigen::Map<const Eigen::VectorXcd> uv(u.values.data(), g.size());
    const Eigen::VectorXcd hu = sg.entries * uv;

    const std::vector<Point> probes{{0.0, 0.0}, {1.0, 0.5}, {-1.5, 1.0}, {2.0, -2.0}, {0.5, 2.5}};
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
        std::int64_t idx = -1;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const Point x = g.point_of(i);
            if (std::abs(x[0] - probes[pi][0]) < 1e-12 && std::abs(x[1] - probes[pi][1]) < 1e-12)
                idx = i;
        }
        const McEstimate est =
            fk_estimate(u, probes[pi], t, fs, ps, 100000, 0.01, 40 + pi);
        const double gap = std::abs(est.mean - hu(idx));
        std::ostringstream a, b;
        a << "probe " << pi << ": |MC - matrix| = " << gap << " vs 3 sigma = "
          << 3.0 * est.stderr_val;
        b << "probe " << pi << ": stderr/|matrix| = " << est.stderr_val / std::abs(hu(idx));
        c.check(gap <= 3.0 * est.stderr_val, a.str());
        c.check(est.stderr_val <= 0.05 * std::abs(hu(idx)), b.str());
    }
    return c;
}

Criterion criterion_kernel_identities() {
    Criterion c("kernel-identities (mass, Levy-Khincin, semigroup law)");
    const double hstep = 0.05;
    const int n = static_cast<int>(20.0 / hstep);
    double mass = 0.0;
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
            const double r = std::hypot(i * hstep, j * hstep);
            if (r <= 20.0) mass += heat_kernel_radial(r, 1.0, 2);
        }
    mass *= hstep * hstep;
    c.check_le(std::abs(mass - 1.0), 1e-3, "|mass(p_1) - 1|");

    c.check_le(lk_residual({1.0, 0.0}, 2, 1e-3, 40.0), 1e-3, "Levy-Khincin residual");

    GridFunction u;
    u.grid = grid16();
    u.values.resize(grid16().size());
    RngStream rng(31, 0);
    for (Complex& z : u.values) z = Complex{rng.uniform() - 0.5, rng.uniform() - 0.5};
    const GridFunction two = free_semigroup_apply(free_semigroup_apply(u, 0.4), 0.6);
    const GridFunction one = free_semigroup_apply(u, 1.0);
    double worst = 0.0;
    for (std::int64_t i = 0; i < grid16().size(); ++i)
        worst = std::max(worst, std::abs(two.values[i] - one.values[i]));
    c.check_le(worst, 1e-8, "semigroup-law defect");
    return c;
}

Criterion criterion_gauge_covariance() {
    Criterion c("gauge-covariance (sorted spectra agree to 1e-8, cubic phi)");
    const BoxGrid g = make_grid(2, 8.0, 16);
    PotentialSpec ps = make_zero_potential(2);
    ps.v_plus = [](const Point& x) {
        return 0.6 * std::exp(-0.4 * (x[0] * x[0] + x[1] * x[1]));
    };
    const FieldSpec fs = make_constant_field_2d(0.5);
    const Hamiltonian h = assemble_h(fs, ps, g);
    FieldSpec shifted = fs;
    shifted.shift = GaugeShift{
        [](const Point& x) {
            return 0.05 * x[0] * x[0] * x[0] - 0.2 * x[0] * x[1] + 0.1 * x[1] * x[1];
        },
        [](const Point& x) {
            return Point{0.15 * x[0] * x[0] - 0.2 * x[1], -0.2 * x[0] + 0.2 * x[1]};
        }};
    const Hamiltonian hs = assemble_h(shifted, ps, g);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < h.evals.size(); ++k)
        worst = std::max(worst, std::abs(h.evals(k) - hs.evals(k)));
    c.check_le(worst, 1e-8, "max sorted-eigenvalue gap");
    return c;
}

Criterion criterion_gamma_trace() {
    Criterion c("gamma-trace-limit (cell-aligned exact, offset decreasing, commutators)");
    const BoxGrid& g = grid16();
    PotentialSpec ps = make_zero_potential(2);
    ps.periodic = true;
    ps.v_plus = [](const Point& x) {
        return 0.4 * (2.0 + std::cos(M_PI * x[0]) * std::cos(M_PI * x[1]));  // period 2
    };
    const double b = commensurate_flux_2d(g, 1);  // pi/2: one flux quantum per 2x2 cell
    const Hamiltonian h = assemble_h(make_constant_field_2d(b), ps, g);
    const Region cell = make_box_region(g, {0.0, 0.0}, {2.0, 2.0});
    const auto f = [](double x) { return std::exp(-x); };

    const BoxFamily aligned = make_box_family(g, {4.0, 8.0, 12.0});
    const PeriodicLimitResult exact = periodic_ids_limit(h, aligned, f, cell);
    double worst = 0.0;
    for (const PeriodicLimitRow& row : exact.rows) worst = std::max(worst, row.gap);
    c.check_le(worst, 1e-8, "max gap on cell-aligned boxes");

    const Point offset{1.0, 1.0};
    const BoxFamily off_fam = make_box_family(g, {5.0, 7.0, 9.0}, &offset);
    const PeriodicLimitResult off = periodic_ids_limit(h, off_fam, f, cell);
    std::ostringstream os;
    os << "offset-box gaps decrease: " << off.rows[0].gap << " > " << off.rows[1].gap << " > "
       << off.rows[2].gap;
    c.check(off.rows[0].gap > off.rows[1].gap && off.rows[1].gap > off.rows[2].gap, os.str());

    const OperatorMatrix fh = func_calc(h, f);
    double cmax = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        Point gamma(2, 0.0);
        gamma[axis] = 2.0;
        const Eigen::MatrixXcd t = magnetic_translation(g, h.field.b0, gamma);
        cmax = std::max(cmax, (fh.entries * t - t * fh.entries).cwiseAbs().maxCoeff());
    }
    c.check_le(cmax, 1e-6, "max translation commutator");
    return c;
}

Criterion criterion_commutator_decay() {
    Criterion c("commutator-decay (log-log slope in [-1.4, -0.6] over j in {1,2,4})");
    const CommutatorDecayResult res =
        commutator_decay_study(make_zero_field(2), grid16(), {1, 2, 4});
    std::ostringstream os;
    os << "slope = " << res.slope;
    c.check(res.slope >= -1.4 && res.slope <= -0.6, os.str());
    return c;
}

Criterion criterion_penalty_limit() {
    Criterion c("penalty-limit (eigenvalues monotone in n; 1e-3 agreement at n = 1e6)");
    const BoxGrid& g = grid16();
    PotentialSpec ps = make_zero_potential(2);
    ps.v_plus = [](const Point& x) {
        return 0.5 * std::exp(-0.25 * (x[0] * x[0] + x[1] * x[1]));
    };
    const Hamiltonian h = assemble_h(make_constant_field_2d(0.5), ps, g);
    const Region omega = make_centered_box(g, 6.0);
    const DirichletOperator comp = dirichlet_restrict(h, omega, RestrictMode::compression);

    Eigen::VectorXd prev;
    bool monotone = true;
    Eigen::VectorXd last;
    for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const DirichletOperator p = dirichlet_restrict(h, omega, RestrictMode::penalty, n);
        for (int k = 0; k < 10; ++k)
            if (prev.size() > 0 && p.evals(k) < prev(k) - 1e-9) monotone = false;
        prev = p.evals;
        last = p.evals;
    }
    c.check(monotone, "first 10 eigenvalues nondecreasing in n");
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(last(k) - comp.evals(k)));
    c.check_le(worst, 1e-3, "max |penalty(1e6) - compression| over k < 10");
    return c;
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    struct Entry {
        std::function<Criterion()> make;
        double time_budget;  // seconds; 0 = unbounded
    };
    const std::vector<Entry> criteria{{criterion_free_ids, 300.0},
                                      {criterion_trend, 600.0},
                                      {criterion_resolvent_difference, 0.0},
                                      {criterion_trace_scalings, 0.0},
                                      {criterion_diamagnetic, 0.0},
                                      {criterion_fk_oracle, 300.0},
                                      {criterion_kernel_identities, 0.0},
                                      {criterion_gauge_covariance, 0.0},
                                      {criterion_gamma_trace, 0.0},
                                      {criterion_commutator_decay, 0.0},
                                      {criterion_penalty_limit, 0.0}};

    int failures = 0;
    for (const auto& entry : criteria) {
        const auto start = Clock::now();
        Criterion c = entry.make();
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        if (entry.time_budget > 0.0) c.check_le(secs, entry.time_budget, "runtime (s)");
        if (!c.report(secs)) ++failures;
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
