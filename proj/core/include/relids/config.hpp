#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "relids/fields.hpp"
#include "relids/grid.hpp"

namespace relids {

/// Invalid or inconsistent configuration; carries the offending field name.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A run exceeding the matrix-size budget.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct StudyParams {
    double lambda_shift = 2.0;  // resolvent shift above -min spectrum
    double r = 3.0;
    int m = 12;
};

struct KernelParamsConfig {
    std::vector<double> t_list{0.5, 1.0};
    double r_max = 20.0;
    int samples = 200;
};

struct FkParams {
    double t = 0.5;
    std::vector<Point> probes;
};

/// Fully resolved run configuration; every run echoes this next to its
/// artifacts as config_resolved.json.
struct RunConfig {
    int d = 2;
    double L = 16.0;
    int N = 32;
    std::int64_t budget = kDefaultMatrixBudget;
    int quad_order = 16;

    FieldSpec field;
    PotentialSpec potential;

    double epsilon = 0.01;
    std::int64_t n_paths = 10000;
    std::uint64_t seed = 1;

    std::vector<double> box_sides{4.0, 6.0, 8.0};
    Point box_offset;  // empty = centered
    std::vector<double> lambdas{0.5, 1.0};
    std::vector<std::pair<double, double>> tents{{1.0, 1.0}, {1.5, 1.5}, {2.0, 2.0}};

    StudyParams study;
    KernelParamsConfig kernel;
    FkParams fk;
    double cell_side = 2.0;

    std::string out_dir = "out";

    std::string resolved_json;  // canonical echo of the configuration

    [[nodiscard]] BoxGrid make_run_grid() const { return make_grid(d, L, N, budget); }
};

/// Parses and validates a JSON document. Throws ConfigError with the field
/// name on schema violations, BudgetError when N^d exceeds the budget.
RunConfig parse_config(const std::string& json_text);

RunConfig load_config_file(const std::string& path);

}  // namespace relids
