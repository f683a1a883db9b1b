#include "relids/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace relids {
namespace {

// Legendre P_n(x) and derivative by the three-term recurrence.
std::pair<double, double> legendre_pair(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = n * (x * p1 - p0) / (x * x - 1.0);
    return {p1, dp};
}

QuadRule build_gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess, then Newton.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 64; ++it) {
            auto [p, dp] = legendre_pair(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        auto [p, dp] = legendre_pair(n, x);
        (void)p;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

// Generalized Laguerre L_n^a(x) and derivative.
std::pair<double, double> laguerre_pair(int n, double a, double x) {
    double p0 = 1.0, p1 = 1.0 + a - x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1 + a - x) * p1 - (k - 1 + a) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    const double dp = (n * p1 - (n + a) * p0) / x;
    return {p1, dp};
}

}  // namespace

const QuadRule& gauss_legendre(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

const QuadRule& gauss_legendre_01(int n) {
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) {
        const QuadRule& base = gauss_legendre(n);
        QuadRule r;
        r.nodes.resize(n);
        r.weights.resize(n);
        for (int i = 0; i < n; ++i) {
            r.nodes[i] = 0.5 * (base.nodes[i] + 1.0);
            r.weights[i] = 0.5 * base.weights[i];
        }
        it = cache.emplace(n, std::move(r)).first;
    }
    return it->second;
}

QuadRule gauss_legendre_on(int n, double a, double b) {
    const QuadRule& base = gauss_legendre(n);
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = mid + half * base.nodes[i];
        r.weights[i] = half * base.weights[i];
    }
    return r;
}

QuadRule gauss_laguerre(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("gauss_laguerre: order must be >= 1");
    if (alpha <= -1.0) throw std::invalid_argument("gauss_laguerre: alpha must be > -1");
    QuadRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            x = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * n + 1.8 * alpha);
        } else if (i == 1) {
            x += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * n);
        } else {
            const double ai = i - 1;
            x += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) *
                 (x - r.nodes[i - 2]) / (1.0 + 0.3 * alpha);
        }
        for (int it = 0; it < 128; ++it) {
            auto [p, dp] = laguerre_pair(n, alpha, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-14 * (1.0 + x)) break;
        }
        auto [p, dp] = laguerre_pair(n, alpha, x);
        (void)p;
        // w_i = Gamma(n+alpha+1) / (n! * x_i * [L'_n(x_i)]^2), via lgamma for range.
        const double lg = std::lgamma(n + alpha + 1.0) - std::lgamma(n + 1.0);
        r.nodes[i] = x;
        r.weights[i] = std::exp(lg) / (x * dp * dp);
    }
    return r;
}

QuadRule log_panel_rule(double a, double b, int panels, int nodes_per_panel) {
    if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("log_panel_rule: need 0 < a < b");
    QuadRule r;
    const double la = std::log(a), lb = std::log(b);
    for (int p = 0; p < panels; ++p) {
        const double lo = std::exp(la + (lb - la) * p / panels);
        const double hi = std::exp(la + (lb - la) * (p + 1) / panels);
        QuadRule panel = gauss_legendre_on(nodes_per_panel, lo, hi);
        r.nodes.insert(r.nodes.end(), panel.nodes.begin(), panel.nodes.end());
        r.weights.insert(r.weights.end(), panel.weights.begin(), panel.weights.end());
    }
    return r;
}

}  // namespace relids
