#pragma once

#include <cstddef>
#include <vector>

namespace relids {

/// One-dimensional quadrature rule: sum_i weight[i] * f(node[i]).
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

/// Gauss-Legendre rule on [-1, 1]. Nodes ascending, symmetric about 0.
const QuadRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [0, 1].
const QuadRule& gauss_legendre_01(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadRule gauss_legendre_on(int n, double a, double b);

/// Generalized Gauss-Laguerre rule: integral_0^inf t^alpha e^{-t} f(t) dt.
/// The t^alpha e^{-t} weight is folded into `weights`.
QuadRule gauss_laguerre(int n, double alpha);

/// Composite Gauss-Legendre over log-spaced panels of [a, b], a > 0.
/// Suited to integrands with power-law behaviour near a.
QuadRule log_panel_rule(double a, double b, int panels, int nodes_per_panel);

}  // namespace relids
