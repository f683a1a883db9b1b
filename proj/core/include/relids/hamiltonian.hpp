#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "relids/fields.hpp"
#include "relids/grid.hpp"
#include "relids/mpdo.hpp"

namespace relids {

/// H = Op^A(<xi>-1) + V with its cached eigendecomposition.
struct Hamiltonian {
    OperatorMatrix op;
    FieldSpec field;
    PotentialSpec potential;
    Eigen::VectorXd evals;   // ascending
    Eigen::MatrixXcd evecs;  // orthonormal columns
    double v_minus_sup = 0.0;

    [[nodiscard]] const BoxGrid& grid() const { return op.grid; }
    [[nodiscard]] double ground_energy() const { return evals(0); }
};

/// Axis-aligned box region of grid points with its measures. The collar is
/// the inner one, {x in Omega : dist(x, boundary) < 1}, matching the
/// side-arithmetic certification values (s^d - (s-2)^d).
struct Region {
    std::vector<std::int64_t> points;  // sorted flat indices
    Point lo, hi;                      // geometric box [lo, hi)
    double volume = 0.0;               // point count * h^d
    double collar_volume = 0.0;        // collar point count * h^d

    [[nodiscard]] std::int64_t count() const { return static_cast<std::int64_t>(points.size()); }
};

/// Box [lo, hi) clipped to grid points. Requires margin >= 1 to the ambient
/// box unless require_margin is false (used for whole-box limit checks).
Region make_box_region(const BoxGrid& g, const Point& lo, const Point& hi,
                       bool require_margin = true);

/// Concentric cube of the given side, optionally offset.
Region make_centered_box(const BoxGrid& g, double side, const Point* offset = nullptr,
                         bool require_margin = true);

/// The whole discretized box as a Region (margin rules do not apply).
Region make_full_region(const BoxGrid& g);

Hamiltonian assemble_h(const FieldSpec& fs, const PotentialSpec& ps, const BoxGrid& g,
                       const MagneticPhaseTable* phases = nullptr);

/// Hamiltonian from an already-assembled kinetic matrix plus sampled V.
Hamiltonian assemble_h_from_op(OperatorMatrix kinetic, const FieldSpec& fs,
                               const PotentialSpec& ps);

enum class RestrictMode { compression, penalty };

/// Dirichlet restriction of H to a region: either the principal submatrix
/// (compression; the n -> infinity limit on the discrete space) or the
/// penalized full-box operator H + n 1_{Omega^c}.
struct DirichletOperator {
    BoxGrid grid;
    Region region;
    RestrictMode mode = RestrictMode::compression;
    double penalty = 0.0;
    Eigen::VectorXd evals;   // ascending
    Eigen::MatrixXcd evecs;  // compression: on the subspace; penalty: full box
};

DirichletOperator dirichlet_restrict(const Hamiltonian& h, const Region& omega, RestrictMode mode,
                                     double penalty = 0.0);

/// f(H) = sum_k f(lambda_k) v_k v_k^dagger.
OperatorMatrix func_calc(const Hamiltonian& h, const std::function<double(double)>& f);

/// Spectral function of the restricted operator, embedded back into the box
/// by zero extension.
Eigen::MatrixXcd func_calc_restricted(const DirichletOperator& d,
                                      const std::function<double(double)>& f);

/// (H + lambda)^{-r} via the eigendecomposition; requires lambda + min spec > 0.
OperatorMatrix resolvent_power(const Hamiltonian& h, double lambda, double r);

/// Schatten norms: p = 1 (trace norm) and p = 2 (Hilbert-Schmidt) only.
double schatten_norm(const OperatorMatrix& m, int p);

struct TraceScalingRow {
    double volume = 0.0;
    double collar_volume = 0.0;
    double i2_full = 0.0;       // ||1_Omega (H+lambda)^{-r}||_I2
    double i1_full = 0.0;       // ||1_Omega (H+lambda)^{-2r} 1_Omega||_I1
    double i2_dirichlet = 0.0;  // same with H_Omega
    double i1_dirichlet = 0.0;
};

struct TraceScalingResult {
    std::vector<TraceScalingRow> rows;
    double i2_slope = 0.0;  // log-log slope of i2_full vs volume (target 1/2)
    double i1_slope = 0.0;  // log-log slope of i1_full vs volume (target 1)
    double i2_ratio_spread = 0.0;  // max/min of i2_full / volume^{1/2}
    double i1_ratio_spread = 0.0;  // max/min of i1_full / volume
};

TraceScalingResult trace_scaling_study(const Hamiltonian& h, const std::vector<Region>& boxes,
                                       double lambda, double r);

struct ResolventDifferenceRow {
    double volume = 0.0;
    double collar_volume = 0.0;
    double i1_diff = 0.0;        // ||1_Omega (H+lambda)^{-m} 1_Omega - (H_Omega+lambda)^{-m}||_I1
    double ratio = 0.0;          // i1_diff / (volume^{1/2} collar^{1/2})
    double normalized_gap = 0.0; // i1_diff / volume
};

std::vector<ResolventDifferenceRow> resolvent_difference_study(const Hamiltonian& h,
                                                               const std::vector<Region>& boxes,
                                                               double lambda, int m);

struct TrotterRow {
    int n = 0;
    double gap = 0.0;  // ||(e^{-tH_A/n} e^{-tV/n})^n - e^{-tH}||_op
};

std::vector<TrotterRow> trotter_check(const Hamiltonian& h_kin, const PotentialSpec& ps, double t,
                                      const std::vector<int>& n_list);

}  // namespace relids
