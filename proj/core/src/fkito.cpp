#include "relids/fkito.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "relids/kinetic.hpp"
#include "relids/quadrature.hpp"
#include "relids/rng.hpp"

namespace relids {
namespace {

constexpr std::int64_t kMaxJumpsPerPath = 2'000'000;

std::atomic<int> g_max_threads{0};

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));
}

// fixed-size point for the hot loops; d <= 3
struct Vec {
    double v[3] = {0.0, 0.0, 0.0};
};

double dot(const Vec& a, const Vec& b, int d) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += a.v[c] * b.v[c];
    return s;
}

// A(x) for linear potentials (constant B, no shift), no allocation.
Vec linear_potential_at(const FieldSpec& fs, const Vec& x) {
    Vec a;
    for (int j = 0; j < fs.d; ++j) {
        double acc = 0.0;
        for (int k = 0; k < fs.d; ++k) acc += fs.b0.at(k, j) * x.v[k];
        a.v[j] = 0.5 * acc;
    }
    return a;
}

// <int_0^1 A(pos + r y) dr, y>. The inner integration runs over the segment
// parameter r in [0,1] (matching the compensator term's dr), the only reading
// that makes the action gauge-consistent.
double jump_line_integral(const FieldSpec& fs, const Vec& pos, const Vec& y) {
    if (fs.linear_potential()) {
        Vec mid;
        for (int c = 0; c < fs.d; ++c) mid.v[c] = pos.v[c] + 0.5 * y.v[c];
        return dot(linear_potential_at(fs, mid), y, fs.d);
    }
    const QuadRule& rule = gauss_legendre_01(fs.quad_order);
    Point p(fs.d);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        for (int c = 0; c < fs.d; ++c) p[c] = pos.v[c] + rule.nodes[i] * y.v[c];
        const Point a = vector_potential(fs, p);
        double dp = 0.0;
        for (int c = 0; c < fs.d; ++c) dp += a[c] * y.v[c];
        acc += rule.weights[i] * dp;
    }
    return acc;
}

// directions and weights covering the unit sphere
struct AngularRule {
    std::vector<Vec> dirs;
    std::vector<double> weights;  // sums to sphere_area(d)
};

AngularRule angular_rule(int d) {
    AngularRule r;
    if (d == 2) {
        const int m = 32;
        for (int k = 0; k < m; ++k) {
            const double phi = 2.0 * M_PI * k / m;
            Vec v;
            v.v[0] = std::cos(phi);
            v.v[1] = std::sin(phi);
            r.dirs.push_back(v);
            r.weights.push_back(2.0 * M_PI / m);
        }
    } else if (d == 3) {
        const QuadRule& gz = gauss_legendre(8);
        const int m = 8;
        for (std::size_t i = 0; i < gz.size(); ++i) {
            const double z = gz.nodes[i];
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            for (int k = 0; k < m; ++k) {
                const double phi = 2.0 * M_PI * k / m;
                Vec v;
                v.v[0] = rho * std::cos(phi);
                v.v[1] = rho * std::sin(phi);
                v.v[2] = z;
                r.dirs.push_back(v);
                r.weights.push_back(gz.weights[i] * 2.0 * M_PI / m);
            }
        }
    } else {
        throw std::invalid_argument("angular_rule: only d = 2, 3");
    }
    return r;
}

// Core compound-Poisson loop. Emits segments [s0, s1) at constant position
// and jumps (pos_before, y); returns false when the path leaves the box test
// of the caller (via the jump callback returning false).
template <typename SegmentFn, typename JumpFn>
bool simulate(RngStream& stream, const Vec& x0, int d, double t, const LevySampler& sampler,
              SegmentFn&& on_segment, JumpFn&& on_jump) {
    Vec pos = x0;
    double s = 0.0;
    std::int64_t count = 0;
    while (true) {
        const double u = stream.uniform();
        const double wait = -std::log1p(-u) / sampler.intensity;
        const double s_next = s + wait;
        if (s_next > t) {
            on_segment(s, t, pos);
            return true;
        }
        if (++count > kMaxJumpsPerPath)
            throw std::runtime_error("sample_path: jump count exceeds the path-length budget");
        const double rho = sampler.sample_radius(stream.uniform());
        Vec y;
        if (d == 2) {
            const double phi = 2.0 * M_PI * stream.uniform();
            y.v[0] = rho * std::cos(phi);
            y.v[1] = rho * std::sin(phi);
        } else {
            const double z = 2.0 * stream.uniform() - 1.0;
            const double phi = 2.0 * M_PI * stream.uniform();
            const double r2 = std::sqrt(std::max(0.0, 1.0 - z * z));
            y.v[0] = rho * r2 * std::cos(phi);
            y.v[1] = rho * r2 * std::sin(phi);
            y.v[2] = rho * z;
        }
        on_segment(s, s_next, pos);
        if (!on_jump(s_next, pos, y)) return false;
        for (int c = 0; c < d; ++c) pos.v[c] += y.v[c];
        s = s_next;
    }
}

// deterministic pairwise reduction
Complex pairwise_sum(const Complex* data, std::int64_t n) {
    if (n <= 8) {
        Complex acc{0.0, 0.0};
        for (std::int64_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::int64_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum_real(const double* data, std::int64_t n) {
    if (n <= 8) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) acc += data[i];
        return acc;
    }
    const std::int64_t half = n / 2;
    return pairwise_sum_real(data, half) + pairwise_sum_real(data + half, n - half);
}

// clamped multilinear interpolation of a real field sampled on the grid
double interpolate_clamped(const BoxGrid& g, const std::vector<double>& vals, const Vec& x) {
    int base[3];
    double frac[3];
    for (int c = 0; c < g.d; ++c) {
        double s = (x.v[c] + 0.5 * g.L) / g.h;
        s = std::clamp(s, 0.0, static_cast<double>(g.N - 1));
        const double fl = std::floor(s);
        base[c] = std::min(static_cast<int>(fl), g.N - 1);
        frac[c] = s - fl;
    }
    double acc = 0.0;
    for (int corner = 0; corner < (1 << g.d); ++corner) {
        double w = 1.0;
        std::int64_t idx = 0;
        for (int c = 0; c < g.d; ++c) {
            const int bit = (corner >> c) & 1;
            const int ic = std::min(base[c] + bit, g.N - 1);
            w *= bit ? frac[c] : 1.0 - frac[c];
            idx = idx * g.N + ic;
        }
        acc += w * vals[idx];
    }
    return acc;
}

}  // namespace

void set_max_threads(int k) { g_max_threads.store(std::max(1, k)); }

int max_threads() {
    const int k = g_max_threads.load();
    return k > 0 ? k : default_threads();
}

Point JumpPath::position(double s) const {
    Point p = x0;
    for (std::size_t i = 0; i < times.size() && times[i] <= s; ++i)
        for (std::size_t c = 0; c < p.size(); ++c) p[c] += jumps[i][c];
    return p;
}

double LevySampler::sample_radius(double u01) const {
    const double target = u01 * intensity;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.begin()) return radii.front();
    if (it == cumulative.end()) return radii.back();
    const std::size_t hi = static_cast<std::size_t>(it - cumulative.begin());
    const std::size_t lo = hi - 1;
    const double span = cumulative[hi] - cumulative[lo];
    const double frac = span > 0.0 ? (target - cumulative[lo]) / span : 0.0;
    return radii[lo] + frac * (radii[hi] - radii[lo]);
}

LevySampler make_levy_sampler(int d, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("make_levy_sampler: need 0 < eps < 1");
    LevySampler s;
    s.d = d;
    s.eps = eps;
    const int nodes = 4096;
    s.radii.resize(nodes);
    s.cumulative.resize(nodes);
    const double la = std::log(eps), lb = std::log(s.r_cut);
    for (int i = 0; i < nodes; ++i)
        s.radii[i] = std::exp(la + (lb - la) * i / (nodes - 1));
    const double area = sphere_area(d);
    const auto radial = [&](double r) {
        return area * std::pow(r, d - 1) * levy_density_radial(r, d);
    };
    s.cumulative[0] = 0.0;
    const QuadRule& gl = gauss_legendre(4);
    for (int i = 1; i < nodes; ++i) {
        const double a = s.radii[i - 1], b = s.radii[i];
        double panel = 0.0;
        for (std::size_t q = 0; q < gl.size(); ++q) {
            const double r = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
            panel += 0.5 * (b - a) * gl.weights[q] * radial(r);
        }
        s.cumulative[i] = s.cumulative[i - 1] + panel;
    }
    s.intensity = s.cumulative.back();

    // small-jump variance int_{|y|<eps} |y|^2 n(dy); integrand is O(1) near 0
    const QuadRule small = log_panel_rule(eps * 1e-6, eps, 64, 4);
    double var = 0.0;
    for (std::size_t i = 0; i < small.size(); ++i)
        var += small.weights[i] * small.nodes[i] * small.nodes[i] * radial(small.nodes[i]);
    s.small_jump_variance = var;

    // tail bound beyond r_cut from the Bessel envelope K_nu <= 3 max(r^-nu, r^-1/2) e^-r
    const double nu = 0.5 * (d + 1);
    const QuadRule tail = log_panel_rule(s.r_cut, s.r_cut + 120.0, 48, 4);
    double bound = 0.0;
    for (std::size_t i = 0; i < tail.size(); ++i) {
        const double r = tail.nodes[i];
        const double env = 2.0 * std::pow(2.0 * M_PI, -nu) * std::pow(r, -nu) * 3.0 *
                           std::max(std::pow(r, -nu), std::pow(r, -0.5)) * std::exp(-r);
        bound += tail.weights[i] * area * std::pow(r, d - 1) * env;
    }
    s.tail_mass_bound = bound;
    return s;
}

JumpPath sample_path(const Point& x0, double t, double eps, std::uint64_t seed,
                     const LevySampler* sampler, std::uint64_t path_index) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sample_path: need 0 < eps < 1");
    if (!(t > 0.0)) throw std::invalid_argument("sample_path: t must be positive");
    const int d = static_cast<int>(x0.size());
    LevySampler local;
    if (sampler == nullptr) {
        local = make_levy_sampler(d, eps);
        sampler = &local;
    }
    JumpPath path;
    path.x0 = x0;
    path.t = t;
    path.eps = eps;
    path.drift.assign(d, 0.0);

    Vec start;
    for (int c = 0; c < d; ++c) start.v[c] = x0[c];
    RngStream stream(seed, path_index);
    simulate(
        stream, start, d, t, *sampler, [](double, double, const Vec&) {},
        [&](double s, const Vec&, const Vec& y) {
            path.times.push_back(s);
            Point yj(d);
            for (int c = 0; c < d; ++c) yj[c] = y.v[c];
            path.jumps.push_back(std::move(yj));
            return true;
        });
    return path;
}

double compensator_value(const FieldSpec& fs, double eps, double r_cut, const Point& p) {
    if (fs.linear_potential()) return 0.0;
    const int d = fs.d;
    const AngularRule ang = angular_rule(d);
    const QuadRule radial = log_panel_rule(eps, r_cut, 24, 4);
    const QuadRule& inner = gauss_legendre_01(8);

    Vec pos;
    for (int c = 0; c < d; ++c) pos.v[c] = p[c];
    const Point a_at_p = vector_potential(fs, p);

    double total = 0.0;
    Point q(d);
    for (std::size_t ri = 0; ri < radial.size(); ++ri) {
        const double rho = radial.nodes[ri];
        const double dens =
            levy_density_radial(rho, d) * std::pow(rho, d - 1) * radial.weights[ri];
        double ang_acc = 0.0;
        for (std::size_t ai = 0; ai < ang.dirs.size(); ++ai) {
            const Vec& w = ang.dirs[ai];
            double line = 0.0;
            for (std::size_t ii = 0; ii < inner.size(); ++ii) {
                for (int c = 0; c < d; ++c)
                    q[c] = pos.v[c] + inner.nodes[ii] * rho * w.v[c];
                const Point a = vector_potential(fs, q);
                double dp = 0.0;
                for (int c = 0; c < d; ++c) dp += (a[c] - a_at_p[c]) * rho * w.v[c];
                line += inner.weights[ii] * dp;
            }
            ang_acc += ang.weights[ai] * line;
        }
        total += dens * ang_acc;
    }
    return total;
}

Complex magnetic_action(const JumpPath& path, const FieldSpec& fs) {
    const int d = fs.d;
    if (fs.is_zero()) return Complex{0.0, 0.0};
    double action = 0.0;

    Vec pos;
    for (int c = 0; c < d; ++c) pos.v[c] = path.x0[c];

    const bool has_compensator = !fs.linear_potential();
    double prev_time = 0.0;
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        if (has_compensator) {
            Point p(d);
            for (int c = 0; c < d; ++c) p[c] = pos.v[c];
            action += (path.times[i] - prev_time) * compensator_value(fs, path.eps, 40.0, p);
        }
        Vec y;
        for (int c = 0; c < d; ++c) y.v[c] = path.jumps[i][c];
        action += jump_line_integral(fs, pos, y);
        for (int c = 0; c < d; ++c) pos.v[c] += y.v[c];
        prev_time = path.times[i];
    }
    if (has_compensator) {
        Point p(d);
        for (int c = 0; c < d; ++c) p[c] = pos.v[c];
        action += (path.t - prev_time) * compensator_value(fs, path.eps, 40.0, p);
    }
    return Complex{0.0, action};
}

Complex interpolate_periodic(const GridFunction& u, const Point& x) {
    const BoxGrid& g = u.grid;
    int base[3];
    double frac[3];
    for (int c = 0; c < g.d; ++c) {
        double s = (x[c] + 0.5 * g.L) / g.h;
        s -= g.N * std::floor(s / g.N);  // wrap into [0, N)
        const double fl = std::floor(s);
        base[c] = static_cast<int>(fl) % g.N;
        frac[c] = s - fl;
    }
    Complex acc{0.0, 0.0};
    double wsum = 0.0;  // weights renormalized so constants interpolate exactly
    for (int corner = 0; corner < (1 << g.d); ++corner) {
        double w = 1.0;
        std::int64_t idx = 0;
        for (int c = 0; c < g.d; ++c) {
            const int bit = (corner >> c) & 1;
            const int ic = (base[c] + bit) % g.N;
            w *= bit ? frac[c] : 1.0 - frac[c];
            idx = idx * g.N + ic;
        }
        acc += w * u.values[idx];
        wsum += w;
    }
    return acc / wsum;
}

McEstimate fk_estimate(const GridFunction& u, const Point& x, double t, const FieldSpec& fs,
                       const PotentialSpec& ps, std::int64_t n_paths, double eps,
                       std::uint64_t seed) {
    const BoxGrid& g = u.grid;
    const int d = g.d;
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("fk_estimate: bad point");
    for (int c = 0; c < d; ++c)
        if (x[c] < -0.5 * g.L || x[c] >= 0.5 * g.L)
            throw std::invalid_argument("fk_estimate: start point outside the box");
    if (n_paths < 100) throw std::invalid_argument("fk_estimate: need at least 100 paths");
    if (!(t > 0.0)) throw std::invalid_argument("fk_estimate: t must be positive");

    const LevySampler sampler = make_levy_sampler(d, eps);
    const bool magnetic = !fs.is_zero();
    const bool has_compensator = magnetic && !fs.linear_potential();

    // compensator drift sampled on the grid once, then interpolated
    std::vector<double> comp_grid;
    if (has_compensator) {
        comp_grid.resize(g.size());
        for (std::int64_t i = 0; i < g.size(); ++i)
            comp_grid[i] = compensator_value(fs, eps, 40.0, g.point_of(i));
    }

    std::vector<Complex> contrib(n_paths, Complex{0.0, 0.0});
    std::vector<unsigned char> kept(n_paths, 0);

    const auto run_block = [&](std::int64_t lo, std::int64_t hi) {
        Vec start;
        for (int c = 0; c < d; ++c) start.v[c] = x[c];
        Point pbuf(d);
        for (std::int64_t pi = lo; pi < hi; ++pi) {
            RngStream stream(seed, static_cast<std::uint64_t>(pi));
            double v_integral = 0.0;
            double action = 0.0;
            bool inside = true;
            Vec final_pos = start;
            const bool completed = simulate(
                stream, start, d, t, sampler,
                [&](double s0, double s1, const Vec& pos) {
                    for (int c = 0; c < d; ++c) pbuf[c] = pos.v[c];
                    v_integral += (s1 - s0) * ps.value(pbuf);
                    if (has_compensator)
                        action += (s1 - s0) * interpolate_clamped(g, comp_grid, pos);
                    final_pos = pos;
                },
                [&](double, const Vec& pos, const Vec& y) {
                    if (magnetic) action += jump_line_integral(fs, pos, y);
                    Vec next = pos;
                    for (int c = 0; c < d; ++c) {
                        next.v[c] += y.v[c];
                        if (next.v[c] < -0.5 * g.L || next.v[c] >= 0.5 * g.L) inside = false;
                    }
                    return inside;
                });
            if (!completed || !inside) continue;
            for (int c = 0; c < d; ++c) pbuf[c] = final_pos.v[c];
            const Complex uval = interpolate_periodic(u, pbuf);
            const Complex weight =
                std::exp(Complex{-v_integral, -action});  // e^{-S - int V}, S = i*action
            contrib[pi] = uval * weight;
            kept[pi] = 1;
        }
    };

    const int workers = std::min<std::int64_t>(max_threads(), n_paths);
    if (workers <= 1) {
        run_block(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t lo = w * chunk;
            const std::int64_t hi = std::min<std::int64_t>(n_paths, lo + chunk);
            if (lo < hi) pool.emplace_back(run_block, lo, hi);
        }
        for (std::thread& th : pool) th.join();
    }

    std::int64_t n_kept = 0;
    for (std::int64_t i = 0; i < n_paths; ++i) n_kept += kept[i];
    const double discard = 1.0 - static_cast<double>(n_kept) / static_cast<double>(n_paths);
    if (discard > 0.2) {
        throw std::runtime_error("fk_estimate: more than 20% of paths exited the box");
    }

    McEstimate est;
    est.n_paths = n_kept;
    est.seed = seed;
    est.discard_fraction = discard;
    est.small_jump_variance = sampler.small_jump_variance;
    if (n_kept == 0) return est;

    est.mean = pairwise_sum(contrib.data(), n_paths) / static_cast<double>(n_kept);
    std::vector<double> dev(n_paths, 0.0);
    for (std::int64_t i = 0; i < n_paths; ++i)
        if (kept[i]) dev[i] = std::norm(contrib[i] - est.mean);
    if (n_kept > 1) {
        const double var = pairwise_sum_real(dev.data(), n_paths) / static_cast<double>(n_kept - 1);
        est.stderr_val = std::sqrt(var / static_cast<double>(n_kept));
    }
    return est;
}

}  // namespace relids
