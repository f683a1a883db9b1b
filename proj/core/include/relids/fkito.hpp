#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "relids/fields.hpp"
#include "relids/grid.hpp"

namespace relids {

/// One realized trajectory of the relativistic jump process.
struct JumpPath {
    Point x0;
    double t = 0.0;
    double eps = 0.0;  // simulation cutoff: all |y_i| >= eps
    std::vector<double> times;        // strictly increasing in (0, t]
    std::vector<Point> jumps;
    Point drift;                      // compensator drift; exactly zero by symmetry

    /// X_s: piecewise-constant between jumps.
    [[nodiscard]] Point position(double s) const;
    [[nodiscard]] Point final_position() const { return position(t); }
};

struct McEstimate {
    Complex mean{0.0, 0.0};
    double stderr_val = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    double discard_fraction = 0.0;
    double small_jump_variance = 0.0;  // diagnostic: int_{|y|<eps} |y|^2 n(dy)
};

/// Radial sampler for the jump measure restricted to {eps <= |y| <= 40}:
/// total intensity, inverse-CDF table (4096 log-spaced nodes), and audited
/// truncation diagnostics.
struct LevySampler {
    int d = 2;
    double eps = 0.0;
    double r_cut = 40.0;
    double intensity = 0.0;          // Lambda(eps), truncated at r_cut
    double tail_mass_bound = 0.0;    // envelope bound on the discarded tail
    double small_jump_variance = 0.0;
    std::vector<double> radii;       // ascending
    std::vector<double> cumulative;  // cumulative intensity up to radii[i]

    [[nodiscard]] double sample_radius(double u01) const;
};

LevySampler make_levy_sampler(int d, double eps);

/// Compound-Poisson path of the jump process with small jumps below eps
/// dropped. The stream is keyed by (seed, path_index).
JumpPath sample_path(const Point& x0, double t, double eps, std::uint64_t seed,
                     const LevySampler* sampler = nullptr, std::uint64_t path_index = 0);

/// Magnetic action S(t, X): i * [jump line integrals + compensator term],
/// purely imaginary by construction.
Complex magnetic_action(const JumpPath& path, const FieldSpec& fs);

/// Compensator drift field C(P) = int_{|y|>=eps} <int_0^1 [A(P+ry)-A(P)] dr, y> n(dy).
/// Identically zero for linear potentials (constant B, no shift).
double compensator_value(const FieldSpec& fs, double eps, double r_cut, const Point& p);

/// Monte Carlo estimate of (e^{-tH} u)(x) via the jump-process representation.
/// u is evaluated off-grid by periodic multilinear interpolation; paths that
/// exit the box are discarded (fraction reported; > 20% is an error).
McEstimate fk_estimate(const GridFunction& u, const Point& x, double t, const FieldSpec& fs,
                       const PotentialSpec& ps, std::int64_t n_paths, double eps,
                       std::uint64_t seed);

/// Periodic multilinear interpolation of a grid function.
Complex interpolate_periodic(const GridFunction& u, const Point& x);

/// Worker count used by parallel loops (paths, phase tables). Defaults to
/// the hardware concurrency capped at 8; results do not depend on it.
void set_max_threads(int k);
int max_threads();

}  // namespace relids
