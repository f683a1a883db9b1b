#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "relids/hamiltonian.hpp"

namespace relids {

/// Nested family of concentric boxes with its certification record.
struct BoxFamily {
    std::vector<Region> boxes;
    std::vector<double> sides;
    std::vector<double> inscribed_radii;  // distance from the origin to the faces
    std::vector<double> cert_ratios;      // (s^d - (s-2)^d) / s^d, strictly decreasing
    bool certified = false;
};

/// Concentric axis-aligned boxes of strictly increasing sides. Certifies the
/// ball-growth and vanishing-collar hypotheses; throws on violations.
BoxFamily make_box_family(const BoxGrid& g, const std::vector<double>& sides,
                          const Point* offset = nullptr);

/// N_Omega(lambda) / |Omega|: eigenvalues of the compression strictly below lambda.
double counting_ids(const Hamiltonian& h, const Region& omega, double lambda);
double counting_ids(const DirichletOperator& dirichlet, double lambda);

/// tr[1_Omega E_lambda(H) 1_Omega] / |Omega| with the sharp spectral projector.
double projection_ids(const Hamiltonian& h, const Region& omega, double lambda);

/// tr[1_Omega f(H) 1_Omega] (plain trace over the region's points).
double localized_trace(const Hamiltonian& h, const Region& omega,
                       const std::function<double(double)>& f);

/// Named test function for smeared runs.
struct TestFunction {
    std::string name;
    std::function<double(double)> f;
};

/// Tent of height 1 centered at c, support [c - w, c + w].
TestFunction tent_function(double center, double half_width);

struct IdsRow {
    int box_id = 0;
    double side = 0.0;
    double volume = 0.0;
    std::string label;               // "lambda=..." or a test-function name
    double dirichlet_value = 0.0;    // N_Omega/|Omega| or tr f(H_Omega)/|Omega|
    double projection_value = 0.0;   // tr[1_Omega E 1_Omega]/|Omega| or smeared
    double gap = 0.0;                // unnormalized trace gap
    double gap_normalized = 0.0;     // gap / |Omega|
    double collar_indicator = 0.0;   // sqrt(cert ratio)
};

struct IdsTable {
    std::vector<IdsRow> rows;
};

/// Both smeared IDS matrices of Theorem-style runs: per (box, f),
/// tr f(H_Omega)/|Omega| against tr[1_Omega f(H) 1_Omega]/|Omega|.
IdsTable ids_coincidence_run(const Hamiltonian& h, const BoxFamily& fam,
                             const std::vector<TestFunction>& fns);

/// Sharp-lambda rows of the same table.
IdsTable ids_lambda_run(const Hamiltonian& h, const BoxFamily& fam,
                        const std::vector<double>& lambdas);

/// Magnetic translation T_gamma = U_gamma L_gamma on the grid torus, for a
/// lattice vector gamma commensurate with the grid.
Eigen::MatrixXcd magnetic_translation(const BoxGrid& g, const SmallMatrix& b0,
                                      const Point& gamma);

struct GammaTraceResult {
    double trace = 0.0;       // integral of the kernel diagonal over the cell
    double normalized = 0.0;  // trace / |F|
};

/// Gamma-trace of f(H) over one grid-aligned fundamental cell. Checks cell
/// alignment and flux commensurability.
GammaTraceResult gamma_trace(const Hamiltonian& h_per, const std::function<double(double)>& f,
                             const Region& cell);

struct PeriodicLimitRow {
    int box_id = 0;
    double volume = 0.0;
    double trace_average = 0.0;  // |Omega|^{-1} tr[1_Omega f(H) 1_Omega]
    double gap = 0.0;            // distance to the Gamma-trace limit
};

struct PeriodicLimitResult {
    double limit = 0.0;  // |F|^{-1} tr_Gamma f(H)
    std::vector<PeriodicLimitRow> rows;
};

PeriodicLimitResult periodic_ids_limit(const Hamiltonian& h_per, const BoxFamily& fam,
                                       const std::function<double(double)>& f,
                                       const Region& cell);

/// Constant-field strength making the flux through one square cell of side c
/// equal 2 pi k c^2 / (L h): commensurate with both the cell and the torus.
double commensurate_flux_2d(const BoxGrid& g, int k);

}  // namespace relids
