#include <CLI11.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "relids/config.hpp"
#include "relids/csv.hpp"
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

constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

void echo_config(const RunConfig& cfg) {
    ensure_directory(cfg.out_dir);
    write_text_file(cfg.out_dir + "/config_resolved.json", cfg.resolved_json);
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
    return cfg.out_dir + "/" + name;
}

void run_kernel(const RunConfig& cfg) {
    echo_config(cfg);
    for (std::size_t i = 0; i < cfg.kernel.t_list.size(); ++i) {
        const double t = cfg.kernel.t_list[i];
        (void)make_kernel_params(cfg.d, t, std::max(cfg.kernel.r_max, 10.0 * std::max(1.0, t)));
        std::ostringstream name;
        name << "kernel_t" << i << ".csv";
        CsvWriter csv(path_in(cfg, name.str()), {"abs_x", "p_t"});
        for (int k = 0; k < cfg.kernel.samples; ++k) {
            const double r = cfg.kernel.r_max * k / (cfg.kernel.samples - 1);
            csv.row({CsvWriter::num(r), CsvWriter::num(heat_kernel_radial(r, t, cfg.d))});
        }
    }
}

void run_spectrum(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    const Hamiltonian h = assemble_h(cfg.field, cfg.potential, g);
    CsvWriter csv(path_in(cfg, "spectrum.csv"), {"index", "eigenvalue"});
    for (Eigen::Index k = 0; k < h.evals.size(); ++k)
        csv.row({CsvWriter::num(static_cast<long long>(k)), CsvWriter::num(h.evals(k))});
}

void run_fkito(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    GridFunction u = sample([](const Point&) { return Complex{1.0, 0.0}; }, g);
    std::vector<std::string> header;
    for (int c = 0; c < cfg.d; ++c) header.push_back("x" + std::to_string(c));
    for (const char* s : {"mean_re", "mean_im", "stderr", "n_paths", "discard_fraction"})
        header.push_back(s);
    CsvWriter csv(path_in(cfg, "fkito.csv"), header);
    for (const Point& probe : cfg.fk.probes) {
        const McEstimate est =
            fk_estimate(u, probe, cfg.fk.t, cfg.field, cfg.potential, cfg.n_paths, cfg.epsilon,
                        cfg.seed);
        std::vector<std::string> row;
        for (int c = 0; c < cfg.d; ++c) row.push_back(CsvWriter::num(probe[c]));
        row.push_back(CsvWriter::num(est.mean.real()));
        row.push_back(CsvWriter::num(est.mean.imag()));
        row.push_back(CsvWriter::num(est.stderr_val));
        row.push_back(CsvWriter::num(static_cast<long long>(est.n_paths)));
        row.push_back(CsvWriter::num(est.discard_fraction));
        csv.row(row);
    }
}

void write_ids_rows(CsvWriter& csv, const IdsTable& table) {
    for (const IdsRow& r : table.rows) {
        csv.row({CsvWriter::num(static_cast<long long>(r.box_id)), CsvWriter::num(r.side),
                 CsvWriter::num(r.volume), r.label, CsvWriter::num(r.dirichlet_value),
                 CsvWriter::num(r.projection_value), CsvWriter::num(r.gap),
                 CsvWriter::num(r.gap_normalized), CsvWriter::num(r.collar_indicator)});
    }
}

void run_ids(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    const Hamiltonian h = assemble_h(cfg.field, cfg.potential, g);
    const Point* off = cfg.box_offset.empty() ? nullptr : &cfg.box_offset;
    const BoxFamily fam = make_box_family(g, cfg.box_sides, off);

    std::vector<TestFunction> fns;
    std::vector<std::string> labels;
    for (const auto& [center, width] : cfg.tents) {
        fns.push_back(tent_function(center, width));
        labels.push_back(fns.back().name);
    }
    for (double lambda : cfg.lambdas) {
        std::ostringstream os;
        os << "lambda=" << lambda;
        labels.push_back(os.str());
    }

    CsvWriter csv(path_in(cfg, "ids.csv"),
                  {"box_id", "side", "volume", "label", "dirichlet_value", "projection_value",
                   "gap", "gap_normalized", "collar_indicator"});
    write_ids_rows(csv, ids_coincidence_run(h, fam, fns));
    write_ids_rows(csv, ids_lambda_run(h, fam, cfg.lambdas));

    // gnuplot script for gap-vs-volume curves
    std::ostringstream gp;
    gp << "set datafile separator \",\"\n"
       << "set logscale xy\n"
       << "set xlabel \"|Omega|\"\n"
       << "set ylabel \"normalized trace gap\"\n"
       << "set key outside\n"
       << "labels = \"";
    for (std::size_t i = 0; i < labels.size(); ++i) gp << (i ? " " : "") << labels[i];
    gp << "\"\n"
       << "plot for [i=1:words(labels)] \"ids.csv\" \\\n"
       << "  using (strcol(4) eq word(labels,i) ? column(3) : NaN):8 \\\n"
       << "  with linespoints title word(labels,i)\n";
    write_text_file(path_in(cfg, "ids_gaps.gp"), gp.str());
}

void run_gamma_trace(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    const Hamiltonian h = assemble_h(cfg.field, cfg.potential, g);
    Point lo(cfg.d, 0.0), hi(cfg.d, cfg.cell_side);
    const Region cell = make_box_region(g, lo, hi);
    const Point* off = cfg.box_offset.empty() ? nullptr : &cfg.box_offset;
    const BoxFamily fam = make_box_family(g, cfg.box_sides, off);

    CsvWriter csv(path_in(cfg, "gamma_trace.csv"),
                  {"label", "box_id", "volume", "trace_average", "limit", "gap"});
    for (const auto& [center, width] : cfg.tents) {
        const TestFunction fn = tent_function(center, width);
        const PeriodicLimitResult res = periodic_ids_limit(h, fam, fn.f, cell);
        for (const PeriodicLimitRow& r : res.rows) {
            csv.row({fn.name, CsvWriter::num(static_cast<long long>(r.box_id)),
                     CsvWriter::num(r.volume), CsvWriter::num(r.trace_average),
                     CsvWriter::num(res.limit), CsvWriter::num(r.gap)});
        }
    }

    CsvWriter comm(path_in(cfg, "translation_commutators.csv"), {"axis", "max_abs_commutator"});
    const OperatorMatrix fh = func_calc(h, [](double x) { return std::exp(-x); });
    for (int axis = 0; axis < cfg.d; ++axis) {
        Point gamma(cfg.d, 0.0);
        gamma[axis] = cfg.cell_side;
        const Eigen::MatrixXcd t = magnetic_translation(g, cfg.field.b0, gamma);
        const double tmax = (fh.entries * t - t * fh.entries).cwiseAbs().maxCoeff();
        comm.row({CsvWriter::num(static_cast<long long>(axis)), CsvWriter::num(tmax)});
    }
}

void run_study(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    const Hamiltonian h = assemble_h(cfg.field, cfg.potential, g);
    const Point* off = cfg.box_offset.empty() ? nullptr : &cfg.box_offset;
    const BoxFamily fam = make_box_family(g, cfg.box_sides, off);
    const double lambda = -h.ground_energy() + cfg.study.lambda_shift;

    const TraceScalingResult ts = trace_scaling_study(h, fam.boxes, lambda, cfg.study.r);
    {
        CsvWriter csv(path_in(cfg, "trace_scaling.csv"),
                      {"side", "volume", "collar_volume", "i2_full", "i1_full", "i2_dirichlet",
                       "i1_dirichlet"});
        for (std::size_t i = 0; i < ts.rows.size(); ++i) {
            const TraceScalingRow& r = ts.rows[i];
            csv.row({CsvWriter::num(fam.sides[i]), CsvWriter::num(r.volume),
                     CsvWriter::num(r.collar_volume), CsvWriter::num(r.i2_full),
                     CsvWriter::num(r.i1_full), CsvWriter::num(r.i2_dirichlet),
                     CsvWriter::num(r.i1_dirichlet)});
        }
    }
    const std::vector<ResolventDifferenceRow> rd =
        resolvent_difference_study(h, fam.boxes, lambda, cfg.study.m);
    {
        CsvWriter csv(path_in(cfg, "resolvent_diff.csv"),
                      {"side", "volume", "collar_volume", "i1_diff", "ratio", "normalized_gap"});
        for (std::size_t i = 0; i < rd.size(); ++i) {
            csv.row({CsvWriter::num(fam.sides[i]), CsvWriter::num(rd[i].volume),
                     CsvWriter::num(rd[i].collar_volume), CsvWriter::num(rd[i].i1_diff),
                     CsvWriter::num(rd[i].ratio), CsvWriter::num(rd[i].normalized_gap)});
        }
    }
    CsvWriter csv(path_in(cfg, "study_summary.csv"),
                  {"i2_slope", "i1_slope", "i2_ratio_spread", "i1_ratio_spread", "lambda", "r",
                   "m"});
    csv.row({CsvWriter::num(ts.i2_slope), CsvWriter::num(ts.i1_slope),
             CsvWriter::num(ts.i2_ratio_spread), CsvWriter::num(ts.i1_ratio_spread),
             CsvWriter::num(lambda), CsvWriter::num(cfg.study.r),
             CsvWriter::num(static_cast<long long>(cfg.study.m))});
}

int run_check(const RunConfig& cfg) {
    echo_config(cfg);
    const BoxGrid g = cfg.make_run_grid();
    std::vector<std::pair<std::string, std::function<bool()>>> checks;

    const MagneticPhaseTable phases = make_phase_table(cfg.field, g);
    const Hamiltonian h_kin = assemble_h(cfg.field, make_zero_potential(cfg.d), g, &phases);
    const Hamiltonian h = assemble_h(cfg.field, cfg.potential, g, &phases);
    const Hamiltonian h0 = assemble_h(make_zero_field(cfg.d), make_zero_potential(cfg.d), g);

    checks.emplace_back("grid-parseval", [&] {
        GridFunction u;
        u.grid = g;
        u.values.resize(g.size());
        RngStream rng(cfg.seed, 7);
        for (auto& z : u.values) z = Complex{rng.uniform() - 0.5, rng.uniform() - 0.5};
        double pw = 0.0;
        for (const Complex& z : u.values) pw += std::norm(z);
        pw *= g.cell_volume();
        const auto coeffs = fourier_coefficients(u);
        double dual = 0.0;
        for (const Complex& z : coeffs) dual += std::norm(z);
        dual *= make_dual_lattice(g).weight;
        return std::abs(dual - pw) <= 1e-10 * pw;
    });

    checks.emplace_back("assemble-identity", [&] {
        SymbolFn one;
        one.eval = [](const Point&, const Point&) { return Complex{1.0, 0.0}; };
        one.x_independent = true;
        one.real_valued = true;
        const OperatorMatrix m = assemble_op(one, cfg.field, g, &phases);
        return (m.entries - Eigen::MatrixXcd::Identity(g.size(), g.size())).cwiseAbs().maxCoeff() <
               1e-10;
    });

    checks.emplace_back("kinetic-positivity", [&] { return h_kin.ground_energy() >= -1e-8; });

    checks.emplace_back("free-dft-diagonalization", [&] {
        const DualLattice dl = make_dual_lattice(g);
        std::vector<double> expect;
        for (const Point& xi : dl.frequencies) expect.push_back(free_symbol(xi));
        std::sort(expect.begin(), expect.end());
        double worst = 0.0, scale = expect.back();
        for (Eigen::Index k = 0; k < h0.evals.size(); ++k)
            worst = std::max(worst, std::abs(h0.evals(k) - expect[k]));
        return worst <= 1e-10 * scale;
    });

    checks.emplace_back("diamagnetic-matrix", [&] {
        RngStream rng(cfg.seed, 11);
        for (double t : {0.25, 1.0}) {
            const OperatorMatrix sa = func_calc(h_kin, [&](double x) { return std::exp(-t * x); });
            const OperatorMatrix s0 = func_calc(h0, [&](double x) { return std::exp(-t * x); });
            for (int trial = 0; trial < 10; ++trial) {
                Eigen::VectorXcd u(g.size());
                for (std::int64_t i = 0; i < g.size(); ++i) u(i) = rng.uniform();
                const Eigen::VectorXd lhs = (sa.entries * u).cwiseAbs();
                const Eigen::VectorXd rhs = (s0.entries * u).real();
                if ((lhs - rhs).maxCoeff() > 1e-8) return false;
            }
        }
        return true;
    });

    checks.emplace_back("resolvent-domination", [&] {
        const OperatorMatrix ra = resolvent_power(h_kin, 1.0, 1.5);
        const OperatorMatrix r0 = resolvent_power(h0, 1.0, 1.5);
        RngStream rng(cfg.seed, 13);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXcd u(g.size());
            for (std::int64_t i = 0; i < g.size(); ++i) u(i) = rng.uniform();
            const Eigen::VectorXd lhs = (ra.entries * u).cwiseAbs();
            const Eigen::VectorXd rhs = (r0.entries * u).real();
            if ((lhs - rhs).maxCoeff() > 1e-8) return false;
        }
        return true;
    });

    checks.emplace_back("gauge-covariance", [&] {
        FieldSpec shifted = cfg.field;
        shifted.shift = GaugeShift{
            [](const Point& x) { return 0.05 * x[0] * x[0] * x[0] - 0.2 * x[0] * x[1]; },
            [](const Point& x) {
                return Point{0.15 * x[0] * x[0] - 0.2 * x[1], -0.2 * x[0]};
            }};
        if (cfg.d == 3) {
            shifted.shift = GaugeShift{
                [](const Point& x) { return 0.1 * x[0] * x[1] - 0.05 * x[2] * x[2]; },
                [](const Point& x) {
                    return Point{0.1 * x[1], 0.1 * x[0], -0.1 * x[2]};
                }};
        }
        const Hamiltonian hs = assemble_h(shifted, cfg.potential, g);
        for (Eigen::Index k = 0; k < h.evals.size(); ++k)
            if (std::abs(hs.evals(k) - h.evals(k)) > 1e-8 * (1.0 + std::abs(h.evals(k))))
                return false;
        return true;
    });

    checks.emplace_back("semigroup-law", [&] {
        GridFunction u;
        u.grid = g;
        u.values.resize(g.size());
        RngStream rng(cfg.seed, 17);
        for (auto& z : u.values) z = Complex{rng.uniform() - 0.5, rng.uniform() - 0.5};
        const GridFunction two = free_semigroup_apply(free_semigroup_apply(u, 0.3), 0.5);
        const GridFunction one = free_semigroup_apply(u, 0.8);
        double worst = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(two.values[i] - one.values[i]));
        return worst <= 1e-8;
    });

    checks.emplace_back("kernel-mass", [&] {
        const double hstep = 0.05;
        const int n = static_cast<int>(20.0 / hstep);
        double mass = 0.0;
        for (int i = -n; i <= n; ++i)
            for (int j = -n; j <= n; ++j) {
                const double r = std::hypot(i * hstep, j * hstep);
                if (r <= 20.0) mass += heat_kernel_radial(r, 1.0, 2);
            }
        mass *= hstep * hstep;
        return std::abs(mass - 1.0) <= 1e-3;
    });

    checks.emplace_back("levy-khincin-residual", [&] {
        Point xi(cfg.d, 0.0);
        xi[0] = 1.0;
        const double fine = lk_residual(xi, cfg.d, 1e-3, 40.0);
        const double coarse = lk_residual(xi, cfg.d, 1e-2, 20.0);
        return fine <= 1e-3 && coarse > fine;
    });

    checks.emplace_back("circulation-symmetry", [&] {
        RngStream rng(cfg.seed, 19);
        for (int trial = 0; trial < 20; ++trial) {
            Point x(cfg.d), y(cfg.d);
            for (int c = 0; c < cfg.d; ++c) {
                x[c] = (rng.uniform() - 0.5) * cfg.L;
                y[c] = (rng.uniform() - 0.5) * cfg.L;
            }
            const Point ab = circulation(cfg.field, x, y);
            const Point ba = circulation(cfg.field, y, x);
            for (int c = 0; c < cfg.d; ++c)
                if (ab[c] != ba[c]) return false;
        }
        return true;
    });

    checks.emplace_back("gauge-reproduction", [&] {
        const double res = verify_gauge(cfg.field, g);
        if (cfg.field.modes.empty()) return res <= 1e-10;
        return res <= 10.0 * g.h * g.h;  // generous envelope ahead of the slope study
    });

    checks.emplace_back("penalty-monotonicity", [&] {
        const double side = cfg.box_sides.empty() ? 4.0 : cfg.box_sides.front();
        const Region omega = make_centered_box(g, side);
        const DirichletOperator comp = dirichlet_restrict(h, omega, RestrictMode::compression);
        Eigen::VectorXd prev;
        for (double n : {1e2, 1e3, 1e4}) {
            const DirichletOperator p = dirichlet_restrict(h, omega, RestrictMode::penalty, n);
            const int kmax = std::min<int>(10, static_cast<int>(comp.evals.size()));
            for (int k = 0; k < kmax; ++k) {
                if (prev.size() > 0 && p.evals(k) < prev(k) - 1e-9) return false;
                if (p.evals(k) > comp.evals(k) + 1e-6) return false;
            }
            prev = p.evals;
        }
        return true;
    });

    checks.emplace_back("fk-reproducibility", [&] {
        const GridFunction ones = sample([](const Point&) { return Complex{1.0, 0.0}; }, g);
        const Point origin(cfg.d, 0.0);
        const McEstimate a =
            fk_estimate(ones, origin, 0.25, cfg.field, cfg.potential, 200, cfg.epsilon, cfg.seed);
        const McEstimate b =
            fk_estimate(ones, origin, 0.25, cfg.field, cfg.potential, 200, cfg.epsilon, cfg.seed);
        return a.mean == b.mean && a.stderr_val == b.stderr_val;
    });

    checks.emplace_back("kato-monotone", [&] {
        const auto w = [&](const Point& x) { return cfg.potential.v_plus(x); };
        const std::vector<double> vals = kato_diagnostic(w, {0.25, 0.5, 1.0}, g);
        for (std::size_t i = 1; i < vals.size(); ++i)
            if (vals[i] < vals[i - 1] - 1e-12) return false;
        return true;
    });

    int failures = 0;
    for (const auto& [name, fn] : checks) {
        bool ok = false;
        std::string detail;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            detail = std::string(" (") + e.what() + ")";
        }
        std::printf("[%s] %s%s\n", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
        if (!ok) ++failures;
    }
    if (failures > 0) std::printf("%d invariant check(s) failed\n", failures);
    return failures == 0 ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relids: spectral and stochastic studies of relativistic magnetic operators"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int threads = 0;

    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
        seed_given = true;
    });
    app.add_option("--threads", threads, "worker threads for parallel sections");

    CLI::App* sub_kernel = app.add_subcommand("kernel", "heat-kernel profiles as CSV");
    CLI::App* sub_spectrum = app.add_subcommand("spectrum", "eigenvalues of H as CSV");
    CLI::App* sub_fkito = app.add_subcommand("fkito", "Monte Carlo semigroup estimates");
    CLI::App* sub_ids = app.add_subcommand("ids", "both IDS definitions along the box family");
    CLI::App* sub_gamma = app.add_subcommand("gamma-trace", "periodic trace limit");
    CLI::App* sub_study = app.add_subcommand("study", "trace scalings and resolvent differences");
    CLI::App* sub_check = app.add_subcommand("check", "run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunConfig cfg = load_config_file(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_given) cfg.seed = seed_override;
        if (threads > 0) set_max_threads(threads);

        if (sub_kernel->parsed()) run_kernel(cfg);
        if (sub_spectrum->parsed()) run_spectrum(cfg);
        if (sub_fkito->parsed()) run_fkito(cfg);
        if (sub_ids->parsed()) run_ids(cfg);
        if (sub_gamma->parsed()) run_gamma_trace(cfg);
        if (sub_study->parsed()) run_study(cfg);
        if (sub_check->parsed()) return run_check(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::length_error& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
}
