#include "relids/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relids {
namespace {

void eigendecompose(const Eigen::MatrixXcd& m, Eigen::VectorXd& evals, Eigen::MatrixXcd& evecs) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed to converge");
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
}

// Residual spot-check of the cached eigenpairs. Full verification is an
// n^3 matrix product, so beyond 512 rows a deterministic spread of columns
// is checked instead.
void verify_eigenpairs(const Eigen::MatrixXcd& m, const Eigen::VectorXd& evals,
                       const Eigen::MatrixXcd& evecs) {
    const Eigen::Index n = m.rows();
    std::vector<Eigen::Index> cols;
    if (n <= 512) {
        for (Eigen::Index k = 0; k < n; ++k) cols.push_back(k);
    } else {
        for (int i = 0; i < 32; ++i) cols.push_back((n - 1) * i / 31);
    }
    for (Eigen::Index k : cols) {
        const double res = (m * evecs.col(k) - evals(k) * evecs.col(k)).norm();
        if (res > 1e-8 * (1.0 + std::abs(evals(k)))) {
            std::ostringstream os;
            os << "eigenpair residual " << res << " at k = " << k;
            throw std::runtime_error(os.str());
        }
    }
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const int k = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < k; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace

Region make_box_region(const BoxGrid& g, const Point& lo, const Point& hi, bool require_margin) {
    if (static_cast<int>(lo.size()) != g.d || static_cast<int>(hi.size()) != g.d)
        throw std::invalid_argument("make_box_region: dimension mismatch");
    for (int c = 0; c < g.d; ++c) {
        if (!(lo[c] < hi[c])) throw std::invalid_argument("make_box_region: empty box");
        if (require_margin &&
            (lo[c] < -0.5 * g.L + 1.0 - 1e-12 || hi[c] > 0.5 * g.L - 1.0 + 1e-12))
            throw std::invalid_argument("make_box_region: box margin to the boundary is below 1");
    }
    Region r;
    r.lo = lo;
    r.hi = hi;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point x = g.point_of(i);
        bool inside = true;
        double dist = 1e300;
        for (int c = 0; c < g.d; ++c) {
            if (x[c] < lo[c] - 1e-12 || x[c] >= hi[c] - 1e-12) {
                inside = false;
                break;
            }
            dist = std::min(dist, std::min(x[c] - lo[c], hi[c] - x[c]));
        }
        if (!inside) continue;
        r.points.push_back(i);
        if (dist < 1.0) r.collar_volume += g.cell_volume();
    }
    if (r.points.empty()) throw std::invalid_argument("make_box_region: no grid points inside");
    r.volume = static_cast<double>(r.points.size()) * g.cell_volume();
    return r;
}

Region make_centered_box(const BoxGrid& g, double side, const Point* offset, bool require_margin) {
    Point lo(g.d), hi(g.d);
    for (int c = 0; c < g.d; ++c) {
        const double off = offset ? (*offset)[c] : 0.0;
        lo[c] = -0.5 * side + off;
        hi[c] = 0.5 * side + off;
    }
    return make_box_region(g, lo, hi, require_margin);
}

Region make_full_region(const BoxGrid& g) {
    Region r;
    r.lo.assign(g.d, -0.5 * g.L);
    r.hi.assign(g.d, 0.5 * g.L);
    r.points.resize(g.size());
    for (std::int64_t i = 0; i < g.size(); ++i) r.points[i] = i;
    r.volume = static_cast<double>(g.size()) * g.cell_volume();
    r.collar_volume = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point x = g.point_of(i);
        double dist = 1e300;
        for (int c = 0; c < g.d; ++c)
            dist = std::min(dist, std::min(x[c] + 0.5 * g.L, 0.5 * g.L - x[c]));
        if (dist < 1.0) r.collar_volume += g.cell_volume();
    }
    return r;
}

Hamiltonian assemble_h_from_op(OperatorMatrix kinetic, const FieldSpec& fs,
                               const PotentialSpec& ps) {
    const BoxGrid g = kinetic.grid;
    Hamiltonian h;
    h.field = fs;
    h.potential = ps;
    h.op = std::move(kinetic);

    double vminus_sup = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const Point x = g.point_of(i);
        const double vp = ps.v_plus ? ps.v_plus(x) : 0.0;
        const double vm = ps.v_minus ? ps.v_minus(x) : 0.0;
        if (vp < 0.0 || vm < 0.0)
            throw std::invalid_argument("assemble_h: potential parts must be nonnegative");
        if (!std::isfinite(vp) || !std::isfinite(vm))
            throw std::runtime_error("assemble_h: non-finite potential sample");
        h.op.entries(i, i) += vp - vm;
        vminus_sup = std::max(vminus_sup, vm);
    }
    h.v_minus_sup = vminus_sup;

    eigendecompose(h.op.entries, h.evals, h.evecs);
    verify_eigenpairs(h.op.entries, h.evals, h.evecs);
    if (h.evals(0) < -vminus_sup - 1e-6) {
        std::ostringstream os;
        os << "assemble_h: ground energy " << h.evals(0) << " below -sup(V_-) = " << -vminus_sup;
        throw std::runtime_error(os.str());
    }
    return h;
}

Hamiltonian assemble_h(const FieldSpec& fs, const PotentialSpec& ps, const BoxGrid& g,
                       const MagneticPhaseTable* phases) {
    return assemble_h_from_op(assemble_op(relativistic_symbol(), fs, g, phases), fs, ps);
}

DirichletOperator dirichlet_restrict(const Hamiltonian& h, const Region& omega, RestrictMode mode,
                                     double penalty) {
    if (omega.points.empty()) throw std::invalid_argument("dirichlet_restrict: empty region");
    DirichletOperator d;
    d.grid = h.grid();
    d.region = omega;
    d.mode = mode;
    if (mode == RestrictMode::compression) {
        const std::int64_t k = omega.count();
        Eigen::MatrixXcd sub(k, k);
        for (std::int64_t i = 0; i < k; ++i)
            for (std::int64_t j = 0; j < k; ++j)
                sub(i, j) = h.op.entries(omega.points[i], omega.points[j]);
        eigendecompose(sub, d.evals, d.evecs);
    } else {
        if (!(penalty > 0.0)) throw std::invalid_argument("dirichlet_restrict: penalty must be > 0");
        d.penalty = penalty;
        Eigen::MatrixXcd full = h.op.entries;
        std::vector<bool> inside(h.grid().size(), false);
        for (std::int64_t p : omega.points) inside[p] = true;
        for (std::int64_t i = 0; i < h.grid().size(); ++i)
            if (!inside[i]) full(i, i) += penalty;
        eigendecompose(full, d.evals, d.evecs);
    }
    return d;
}

OperatorMatrix func_calc(const Hamiltonian& h, const std::function<double(double)>& f) {
    const Eigen::Index n = h.evals.size();
    Eigen::VectorXd fv(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        fv(k) = f(h.evals(k));
        if (!std::isfinite(fv(k))) {
            std::ostringstream os;
            os << "func_calc: non-finite value at eigenvalue " << h.evals(k);
            throw std::invalid_argument(os.str());
        }
    }
    OperatorMatrix out;
    out.grid = h.grid();
    out.entries = h.evecs * fv.asDiagonal() * h.evecs.adjoint();
    out.hermitian = true;
    return out;
}

Eigen::MatrixXcd func_calc_restricted(const DirichletOperator& d,
                                      const std::function<double(double)>& f) {
    Eigen::VectorXd fv(d.evals.size());
    for (Eigen::Index k = 0; k < d.evals.size(); ++k) {
        fv(k) = f(d.evals(k));
        if (!std::isfinite(fv(k)))
            throw std::invalid_argument("func_calc_restricted: non-finite value on spectrum");
    }
    const Eigen::MatrixXcd core = d.evecs * fv.asDiagonal() * d.evecs.adjoint();
    if (d.mode == RestrictMode::penalty) return core;
    const std::int64_t n = d.grid.size();
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n, n);
    for (std::int64_t i = 0; i < d.region.count(); ++i)
        for (std::int64_t j = 0; j < d.region.count(); ++j)
            full(d.region.points[i], d.region.points[j]) = core(i, j);
    return full;
}

OperatorMatrix resolvent_power(const Hamiltonian& h, double lambda, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("resolvent_power: r must be positive");
    if (!(lambda + h.ground_energy() > 0.0))
        throw std::invalid_argument("resolvent_power: lambda + min spectrum must be positive");
    return func_calc(h, [&](double t) { return std::pow(t + lambda, -r); });
}

double schatten_norm(const OperatorMatrix& m, int p) {
    if (p == 2) return m.entries.norm();
    if (p != 1) throw std::invalid_argument("schatten_norm: only p = 1 or 2");
    if (m.hermitian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m.entries, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m.entries);
    return svd.singularValues().sum();
}

TraceScalingResult trace_scaling_study(const Hamiltonian& h, const std::vector<Region>& boxes,
                                       double lambda, double r) {
    if (boxes.size() < 3)
        throw std::invalid_argument("trace_scaling_study: need at least 3 boxes for a slope");
    const std::int64_t n = h.grid().size();
    // diagonal weights of (H+lambda)^{-2r} and (H+lambda)^{-4r}
    Eigen::VectorXd s2(n), s4(n);
    for (std::int64_t k = 0; k < n; ++k) {
        const double s = std::pow(h.evals(k) + lambda, -r);
        s2(k) = s * s;
        s4(k) = s2(k) * s2(k);
    }
    Eigen::VectorXd diag2(n), diag4(n);
    for (std::int64_t x = 0; x < n; ++x) {
        double a2 = 0.0, a4 = 0.0;
        for (std::int64_t k = 0; k < n; ++k) {
            const double w = std::norm(h.evecs(x, k));
            a2 += s2(k) * w;
            a4 += s4(k) * w;
        }
        diag2(x) = a2;
        diag4(x) = a4;
    }

    TraceScalingResult res;
    std::vector<double> lv, l2, l1;
    double r2min = 1e300, r2max = 0.0, r1min = 1e300, r1max = 0.0;
    for (const Region& omega : boxes) {
        TraceScalingRow row;
        row.volume = omega.volume;
        row.collar_volume = omega.collar_volume;
        double acc2 = 0.0, acc4 = 0.0;
        for (std::int64_t p : omega.points) {
            acc2 += diag2(p);
            acc4 += diag4(p);
        }
        row.i2_full = std::sqrt(acc2);
        row.i1_full = acc4;

        const DirichletOperator d = dirichlet_restrict(h, omega, RestrictMode::compression);
        double t2 = 0.0;
        for (Eigen::Index k = 0; k < d.evals.size(); ++k)
            t2 += std::pow(d.evals(k) + lambda, -2.0 * r);
        row.i2_dirichlet = std::sqrt(t2);
        row.i1_dirichlet = t2;

        lv.push_back(std::log(row.volume));
        l2.push_back(std::log(row.i2_full));
        l1.push_back(std::log(row.i1_full));
        r2min = std::min(r2min, row.i2_full / std::sqrt(row.volume));
        r2max = std::max(r2max, row.i2_full / std::sqrt(row.volume));
        r1min = std::min(r1min, row.i1_full / row.volume);
        r1max = std::max(r1max, row.i1_full / row.volume);
        res.rows.push_back(row);
    }
    res.i2_slope = slope_fit(lv, l2);
    res.i1_slope = slope_fit(lv, l1);
    res.i2_ratio_spread = r2max / r2min;
    res.i1_ratio_spread = r1max / r1min;
    return res;
}

std::vector<ResolventDifferenceRow> resolvent_difference_study(const Hamiltonian& h,
                                                               const std::vector<Region>& boxes,
                                                               double lambda, int m) {
    if (m < 2) throw std::invalid_argument("resolvent_difference_study: m must be >= 2");
    const OperatorMatrix rm = resolvent_power(h, lambda, static_cast<double>(m));
    std::vector<ResolventDifferenceRow> rows;
    for (const Region& omega : boxes) {
        const std::int64_t k = omega.count();
        Eigen::MatrixXcd block(k, k);
        for (std::int64_t i = 0; i < k; ++i)
            for (std::int64_t j = 0; j < k; ++j)
                block(i, j) = rm.entries(omega.points[i], omega.points[j]);
        const DirichletOperator d = dirichlet_restrict(h, omega, RestrictMode::compression);
        Eigen::VectorXd rv(d.evals.size());
        for (Eigen::Index q = 0; q < d.evals.size(); ++q)
            rv(q) = std::pow(d.evals(q) + lambda, -static_cast<double>(m));
        block.noalias() -= d.evecs * rv.asDiagonal() * d.evecs.adjoint();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
        ResolventDifferenceRow row;
        row.volume = omega.volume;
        row.collar_volume = omega.collar_volume;
        row.i1_diff = es.eigenvalues().cwiseAbs().sum();
        row.ratio = row.i1_diff / std::sqrt(row.volume * row.collar_volume);
        row.normalized_gap = row.i1_diff / row.volume;
        rows.push_back(row);
    }
    return rows;
}

std::vector<TrotterRow> trotter_check(const Hamiltonian& h_kin, const PotentialSpec& ps, double t,
                                      const std::vector<int>& n_list) {
    const BoxGrid g = h_kin.grid();
    const std::int64_t n = g.size();
    const Hamiltonian h = assemble_h_from_op(h_kin.op, h_kin.field, ps);
    const OperatorMatrix expH = func_calc(h, [&](double x) { return std::exp(-t * x); });

    Eigen::VectorXd v(n);
    for (std::int64_t i = 0; i < n; ++i) v(i) = ps.value(g.point_of(i));

    std::vector<TrotterRow> rows;
    for (int steps : n_list) {
        const double s = t / steps;
        const OperatorMatrix expA = func_calc(h_kin, [&](double x) { return std::exp(-s * x); });
        Eigen::VectorXcd expV(n);
        for (std::int64_t i = 0; i < n; ++i) expV(i) = std::exp(-s * v(i));
        Eigen::MatrixXcd factor = expA.entries * expV.asDiagonal();
        // factor^steps by square-and-multiply
        Eigen::MatrixXcd pow = Eigen::MatrixXcd::Identity(n, n);
        Eigen::MatrixXcd base = factor;
        int e = steps;
        while (e > 0) {
            if (e & 1) pow = pow * base;
            e >>= 1;
            if (e > 0) base = base * base;
        }
        rows.push_back({steps, operator_norm(pow - expH.entries)});
    }
    return rows;
}

}  // namespace relids
