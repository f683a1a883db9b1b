#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "relids/grid.hpp"

namespace relids {

/// Dense d x d matrix in row-major storage; used for B and lattice data.
struct SmallMatrix {
    int d = 0;
    std::vector<double> a;  // d*d entries

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * d + j]; }
    [[nodiscard]] double at(int i, int j) const { return a[static_cast<std::size_t>(i) * d + j]; }

    static SmallMatrix zero(int d) { return SmallMatrix{d, std::vector<double>(d * d, 0.0)}; }
};

/// One Fourier mode of the periodic field part:
/// contributes amp * cos(<freq, x> + phase) to B(x).
struct FieldMode {
    Point freq;       // 2*pi * Gamma^{-T} * m for an integer vector m
    SmallMatrix amp;  // antisymmetric amplitude
    double phase = 0.0;
};

/// Explicit gauge shift A -> A + grad(phi).
struct GaugeShift {
    std::function<double(const Point&)> phi;
    std::function<Point(const Point&)> grad;
};

/// Magnetic field B = B0 + sum of periodic modes, with the transversal-gauge
/// vector potential derived from it. Immutable after construction.
struct FieldSpec {
    int d = 2;
    SmallMatrix b0;                  // constant antisymmetric part
    std::vector<FieldMode> modes;    // smooth Gamma-periodic part
    SmallMatrix lattice;             // generators of Gamma as columns
    int quad_order = 16;             // Gauss-Legendre order for all line integrals
    std::optional<GaugeShift> shift;

    /// True when A is linear in x (constant B, no gauge shift); several
    /// consumers use the exact closed forms this enables.
    [[nodiscard]] bool linear_potential() const { return modes.empty() && !shift.has_value(); }

    [[nodiscard]] bool is_zero() const;

    /// B_{jk}(x); antisymmetric by construction.
    [[nodiscard]] SmallMatrix field_at(const Point& x) const;
};

/// Scalar potential V = V_+ - V_-, both nonnegative, V_- bounded.
struct PotentialSpec {
    int d = 2;
    std::function<double(const Point&)> v_plus;
    std::function<double(const Point&)> v_minus;
    bool periodic = false;
    SmallMatrix lattice;  // meaningful when periodic

    [[nodiscard]] double value(const Point& x) const { return v_plus(x) - v_minus(x); }
    [[nodiscard]] bool is_zero() const { return !v_plus && !v_minus; }
};

FieldSpec make_zero_field(int d, int quad_order = 16);

/// Constant field in d = 2 with B_{12} = b (symmetric gauge).
FieldSpec make_constant_field_2d(double b, int quad_order = 16);

FieldSpec make_field(int d, SmallMatrix b0, std::vector<FieldMode> modes, SmallMatrix lattice,
                     int quad_order = 16);

PotentialSpec make_zero_potential(int d);

/// Dual frequency 2*pi*Gamma^{-T}*m of an integer vector m.
Point lattice_dual_frequency(const SmallMatrix& lattice, const std::vector<int>& m);

/// Transversal-gauge vector potential
/// A_j(x) = sum_k x_k int_0^1 s B_{kj}(s x) ds  (+ optional gauge shift),
/// by fixed-order Gauss-Legendre; exact for constant fields.
Point vector_potential(const FieldSpec& fs, const Point& x);

/// Segment mean Gamma^A(x, y) = int_0^1 A((1-s)x + s y) ds.
/// Nodes are paired symmetrically so Gamma(x,y) and Gamma(y,x) agree bitwise.
Point circulation(const FieldSpec& fs, const Point& x, const Point& y);

/// Max over interior grid points of |dA - B| under central differences.
double verify_gauge(const FieldSpec& fs, const BoxGrid& g);

/// Max closedness residual |dB| over interior grid points by central
/// differences; identically zero when d = 2, where any antisymmetric
/// 2-form is closed.
double field_closedness_residual(const FieldSpec& fs, const BoxGrid& g);

/// Kato-class diagnostic: for each t, sup over grid x of
/// int_0^t (smoothed W)(x) ds, with the grid semigroup kernel and a
/// 32-node Gauss-Legendre rule on (0, t]. Nondecreasing in t.
std::vector<double> kato_diagnostic(const std::function<double(const Point&)>& W,
                                    const std::vector<double>& t_list, const BoxGrid& g);

}  // namespace relids
