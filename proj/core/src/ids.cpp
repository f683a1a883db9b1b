#include "relids/ids.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relids {
namespace {

// sum over the region of |v_k(x)|^2 for every k: the localized weights.
Eigen::VectorXd region_weights(const Hamiltonian& h, const Region& omega) {
    const Eigen::Index n = h.evals.size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (std::int64_t p : omega.points)
        for (Eigen::Index k = 0; k < n; ++k) w(k) += std::norm(h.evecs(p, k));
    return w;
}

void check_spectrum_values(const Eigen::VectorXd& evals,
                           const std::function<double(double)>& f) {
    for (Eigen::Index k = 0; k < evals.size(); ++k)
        if (!std::isfinite(f(evals(k))))
            throw std::invalid_argument("test function is not finite on the spectrum");
}

bool grid_aligned(const BoxGrid& g, double coord) {
    const double steps = (coord + 0.5 * g.L) / g.h;
    return std::abs(steps - std::round(steps)) < 1e-9;
}

}  // namespace

BoxFamily make_box_family(const BoxGrid& g, const std::vector<double>& sides,
                          const Point* offset) {
    if (sides.size() < 3) throw std::invalid_argument("make_box_family: need at least 3 boxes");
    for (std::size_t i = 1; i < sides.size(); ++i)
        if (!(sides[i] > sides[i - 1]))
            throw std::invalid_argument("make_box_family: sides must be strictly increasing");
    if (sides.back() + 2.0 > g.L)
        throw std::invalid_argument("make_box_family: collar of the largest box overflows the grid");

    BoxFamily fam;
    fam.sides = sides;
    double prev_ratio = 2.0, prev_radius = 0.0;
    for (double s : sides) {
        fam.boxes.push_back(make_centered_box(g, s, offset));
        const Region& r = fam.boxes.back();
        double radius = 1e300;
        for (int c = 0; c < g.d; ++c)
            radius = std::min(radius, std::min(-r.lo[c], r.hi[c]));
        if (!(radius > prev_radius))
            throw std::invalid_argument("make_box_family: boxes must contain growing balls");
        prev_radius = radius;
        fam.inscribed_radii.push_back(radius);

        const double ratio = (std::pow(s, g.d) - std::pow(s - 2.0, g.d)) / std::pow(s, g.d);
        if (!(ratio < prev_ratio))
            throw std::invalid_argument("make_box_family: collar ratio fails to decrease");
        prev_ratio = ratio;
        fam.cert_ratios.push_back(ratio);
    }
    fam.certified = true;
    return fam;
}

double counting_ids(const DirichletOperator& d, double lambda) {
    if (!std::isfinite(lambda)) throw std::invalid_argument("counting_ids: lambda must be finite");
    std::int64_t count = 0;
    for (Eigen::Index k = 0; k < d.evals.size(); ++k)
        if (d.evals(k) < lambda) ++count;
    return static_cast<double>(count) / d.region.volume;
}

double counting_ids(const Hamiltonian& h, const Region& omega, double lambda) {
    const DirichletOperator d = dirichlet_restrict(h, omega, RestrictMode::compression);
    return counting_ids(d, lambda);
}

double projection_ids(const Hamiltonian& h, const Region& omega, double lambda) {
    if (!std::isfinite(lambda))
        throw std::invalid_argument("projection_ids: lambda must be finite");
    if (omega.points.empty()) throw std::invalid_argument("projection_ids: empty region");
    double trace = 0.0;
    for (std::int64_t p : omega.points)
        for (Eigen::Index k = 0; k < h.evals.size() && h.evals(k) <= lambda; ++k)
            trace += std::norm(h.evecs(p, k));
    return trace / omega.volume;
}

double localized_trace(const Hamiltonian& h, const Region& omega,
                       const std::function<double(double)>& f) {
    check_spectrum_values(h.evals, f);
    const Eigen::VectorXd w = region_weights(h, omega);
    double trace = 0.0;
    for (Eigen::Index k = 0; k < h.evals.size(); ++k) trace += f(h.evals(k)) * w(k);
    return trace;
}

TestFunction tent_function(double center, double half_width) {
    std::ostringstream name;
    name << "tent(" << center << "," << half_width << ")";
    return TestFunction{
        name.str(), [center, half_width](double x) {
            return std::max(0.0, 1.0 - std::abs(x - center) / half_width);
        }};
}

IdsTable ids_coincidence_run(const Hamiltonian& h, const BoxFamily& fam,
                             const std::vector<TestFunction>& fns) {
    if (!fam.certified) throw std::invalid_argument("ids_coincidence_run: family not certified");
    IdsTable table;
    for (std::size_t b = 0; b < fam.boxes.size(); ++b) {
        const Region& omega = fam.boxes[b];
        const DirichletOperator d = dirichlet_restrict(h, omega, RestrictMode::compression);
        const Eigen::VectorXd w = region_weights(h, omega);
        for (const TestFunction& fn : fns) {
            check_spectrum_values(h.evals, fn.f);
            check_spectrum_values(d.evals, fn.f);
            double tr_local = 0.0;
            for (Eigen::Index k = 0; k < h.evals.size(); ++k)
                tr_local += fn.f(h.evals(k)) * w(k);
            double tr_dirichlet = 0.0;
            for (Eigen::Index k = 0; k < d.evals.size(); ++k) tr_dirichlet += fn.f(d.evals(k));

            IdsRow row;
            row.box_id = static_cast<int>(b);
            row.side = fam.sides[b];
            row.volume = omega.volume;
            row.label = fn.name;
            row.dirichlet_value = tr_dirichlet / omega.volume;
            row.projection_value = tr_local / omega.volume;
            row.gap = std::abs(tr_dirichlet - tr_local);
            row.gap_normalized = row.gap / omega.volume;
            row.collar_indicator = std::sqrt(fam.cert_ratios[b]);
            table.rows.push_back(row);
        }
    }
    return table;
}

IdsTable ids_lambda_run(const Hamiltonian& h, const BoxFamily& fam,
                        const std::vector<double>& lambdas) {
    if (!fam.certified) throw std::invalid_argument("ids_lambda_run: family not certified");
    IdsTable table;
    for (std::size_t b = 0; b < fam.boxes.size(); ++b) {
        const Region& omega = fam.boxes[b];
        const DirichletOperator d = dirichlet_restrict(h, omega, RestrictMode::compression);
        for (double lambda : lambdas) {
            IdsRow row;
            row.box_id = static_cast<int>(b);
            row.side = fam.sides[b];
            row.volume = omega.volume;
            std::ostringstream label;
            label << "lambda=" << lambda;
            row.label = label.str();
            row.dirichlet_value = counting_ids(d, lambda);
            row.projection_value = projection_ids(h, omega, lambda);
            row.gap = std::abs(row.dirichlet_value - row.projection_value) * omega.volume;
            row.gap_normalized = std::abs(row.dirichlet_value - row.projection_value);
            row.collar_indicator = std::sqrt(fam.cert_ratios[b]);
            table.rows.push_back(row);
        }
    }
    return table;
}

Eigen::MatrixXcd magnetic_translation(const BoxGrid& g, const SmallMatrix& b0,
                                      const Point& gamma) {
    std::vector<int> steps(g.d);
    for (int c = 0; c < g.d; ++c) {
        const double s = gamma[c] / g.h;
        if (std::abs(s - std::round(s)) > 1e-9)
            throw std::invalid_argument("magnetic_translation: gamma not grid-commensurate");
        steps[c] = static_cast<int>(std::round(s));
    }
    // phase phi_gamma(x) = <A0(gamma), x> in the transversal gauge of b0
    Point a_gamma(g.d, 0.0);
    for (int j = 0; j < g.d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < g.d; ++k) acc += b0.at(k, j) * gamma[k];
        a_gamma[j] = 0.5 * acc;
    }
    const std::int64_t n = g.size();
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        const std::vector<int> mc = g.coords_of(i);
        const Point x = g.point_of(i);
        double phi = 0.0;
        for (int c = 0; c < g.d; ++c) phi += a_gamma[c] * x[c];
        std::vector<int> src(g.d);
        for (int c = 0; c < g.d; ++c) src[c] = ((mc[c] - steps[c]) % g.N + g.N) % g.N;
        t(i, g.index_of(src)) = Complex{std::cos(phi), std::sin(phi)};
    }
    return t;
}

GammaTraceResult gamma_trace(const Hamiltonian& h_per, const std::function<double(double)>& f,
                             const Region& cell) {
    const BoxGrid& g = h_per.grid();
    for (int c = 0; c < g.d; ++c)
        if (!grid_aligned(g, cell.lo[c]) || !grid_aligned(g, cell.hi[c]))
            throw std::invalid_argument("gamma_trace: cell not aligned to the grid");

    // flux commensurability of the constant part: b * |cell| = 2 pi p / q with
    // q dividing the points per cell axis
    if (g.d == 2) {
        const double side = cell.hi[0] - cell.lo[0];
        const double b = h_per.field.b0.at(0, 1);
        if (b != 0.0) {
            const double flux_units = b * side * side / (2.0 * M_PI);
            const int per_axis = static_cast<int>(std::round(side / g.h));
            bool ok = false;
            for (int q = 1; q <= per_axis; ++q) {
                if (per_axis % q != 0) continue;
                if (std::abs(flux_units * q - std::round(flux_units * q)) < 1e-9) ok = true;
            }
            if (!ok) throw std::invalid_argument("gamma_trace: cell flux incommensurate");
        }
    }

    GammaTraceResult res;
    res.trace = localized_trace(h_per, cell, f);
    res.normalized = res.trace / cell.volume;
    return res;
}

PeriodicLimitResult periodic_ids_limit(const Hamiltonian& h_per, const BoxFamily& fam,
                                       const std::function<double(double)>& f,
                                       const Region& cell) {
    if (!fam.certified) throw std::invalid_argument("periodic_ids_limit: family not certified");
    PeriodicLimitResult res;
    res.limit = gamma_trace(h_per, f, cell).normalized;
    for (std::size_t b = 0; b < fam.boxes.size(); ++b) {
        PeriodicLimitRow row;
        row.box_id = static_cast<int>(b);
        row.volume = fam.boxes[b].volume;
        row.trace_average = localized_trace(h_per, fam.boxes[b], f) / fam.boxes[b].volume;
        row.gap = std::abs(row.trace_average - res.limit);
        res.rows.push_back(row);
    }
    return res;
}

double commensurate_flux_2d(const BoxGrid& g, int k) {
    return 4.0 * M_PI * k / (g.L * g.h);
}

}  // namespace relids
