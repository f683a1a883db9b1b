#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "relids/fields.hpp"
#include "relids/grid.hpp"

namespace relids {

/// Phase-space symbol a(x, xi).
struct SymbolFn {
    std::function<Complex(const Point& x, const Point& xi)> eval;
    double order = 0.0;          // declared symbol order, diagnostics only
    bool x_independent = false;
    bool real_valued = false;

    [[nodiscard]] Complex operator()(const Point& x, const Point& xi) const {
        return eval(x, xi);
    }
};

/// The free relativistic energy symbol <xi> - 1.
SymbolFn relativistic_symbol();

/// An x-independent real symbol from a callable xi -> double.
SymbolFn multiplier_symbol(std::function<double(const Point&)> f, double order);

/// Pointwise product of two symbols.
SymbolFn symbol_product(const SymbolFn& f, const SymbolFn& g);

/// Dense matrix realization of a discretized operator. Includes the h^d
/// quadrature weight, so it acts as the integral operator under plain
/// matrix-vector products and plain matrix traces equal continuum traces.
struct OperatorMatrix {
    BoxGrid grid;
    Eigen::MatrixXcd entries;
    bool hermitian = false;
};

/// Checked constructor: when hermitian is requested, enforces
/// ||M - M^dagger||_max <= 1e-10 ||M||_max.
OperatorMatrix make_operator_matrix(const BoxGrid& g, Eigen::MatrixXcd entries, bool hermitian);

/// Cached table of magnetic phases e^{i <x-y, Gamma^A(x,y)>} for all grid
/// pairs. Hermitian by construction (conjugate-mirrored fill).
struct MagneticPhaseTable {
    BoxGrid grid;
    Eigen::MatrixXcd phases;
};

MagneticPhaseTable make_phase_table(const FieldSpec& fs, const BoxGrid& g);

/// Magnetic quantization: K(x,y) = h^d L^{-d} sum_xi e^{i<x-y, xi + Gamma^A(x,y)>}
/// a((x+y)/2, xi). For real symbols the Nyquist rows use the value averaged
/// with the xi -> -xi mirror, and the result is checked Hermitian.
OperatorMatrix assemble_op(const SymbolFn& a, const FieldSpec& fs, const BoxGrid& g,
                           const MagneticPhaseTable* phases = nullptr);

/// e^{i phi} M e^{-i phi} as a matrix (diagonal conjugation).
OperatorMatrix gauge_conjugate(const OperatorMatrix& m,
                               const std::function<double(const Point&)>& phi, const BoxGrid& g);

/// Magnetic convolution (u *A f)(x) = h^d sum_y e^{i<x-y, Gamma^A(x,y)>} f(x-y) u(y),
/// with the difference taken minimal-image on the torus.
GridFunction magnetic_convolution(const GridFunction& u,
                                  const std::function<double(const Point&)>& f,
                                  const FieldSpec& fs);

/// The standard bump exp(-1/(1-|x|^2)) on B(0,1), unnormalized.
double standard_bump(const Point& x);

/// Smooth cutoff: 1 on B(0,1), supported in B(0,2).
double smooth_cutoff(const Point& x);

/// R_j u = u *A theta_j with theta_j(x) = j^d theta(j x), theta the standard
/// bump normalized on the grid. Requires 1/j >= h.
GridFunction regularize(const GridFunction& u, int j, const FieldSpec& fs);

/// psi_j * u pointwise, psi_j(x) = psi(x/j).
GridFunction cutoff(const GridFunction& u, int j);

/// Largest singular value by power iteration on M^dagger M; deterministic.
double operator_norm(const Eigen::MatrixXcd& m);

struct CommutatorDecayEntry {
    int j;
    double norm;  // ||[psi_j, P]||_op
};

struct CommutatorDecayResult {
    std::vector<CommutatorDecayEntry> entries;
    double slope;  // log-log fit of norm vs j
};

/// Norms of [psi_j, Op^A(<xi>-1)] along j_list, with the fitted decay slope.
CommutatorDecayResult commutator_decay_study(const FieldSpec& fs, const BoxGrid& g,
                                             const std::vector<int>& j_list);

/// ||Op^A(f) Op^A(g) - Op^A(f g)||_op.
double composition_defect(const SymbolFn& f, const SymbolFn& g_sym, const FieldSpec& fs,
                          const BoxGrid& g, const MagneticPhaseTable* phases = nullptr);

}  // namespace relids
