#include <benchmark/benchmark.h>

#include <cmath>

#include "relids/fkito.hpp"
#include "relids/hamiltonian.hpp"
#include "relids/ids.hpp"
#include "relids/kinetic.hpp"
#include "relids/mpdo.hpp"

using namespace relids;

namespace {

void BM_AssembleFree(benchmark::State& state) {
    const BoxGrid g = make_grid(2, 16.0, static_cast<int>(state.range(0)));
    const FieldSpec fs = make_zero_field(2);
    for (auto _ : state) {
        OperatorMatrix m = assemble_op(relativistic_symbol(), fs, g);
        benchmark::DoNotOptimize(m.entries.data());
    }
    state.SetComplexityN(g.size());
}
BENCHMARK(BM_AssembleFree)->Arg(8)->Arg(16)->Arg(32)->Complexity();

void BM_PhaseTable(benchmark::State& state) {
    const BoxGrid g = make_grid(2, 16.0, static_cast<int>(state.range(0)));
    const FieldSpec fs = make_constant_field_2d(0.5);
    for (auto _ : state) {
        MagneticPhaseTable t = make_phase_table(fs, g);
        benchmark::DoNotOptimize(t.phases.data());
    }
    state.SetComplexityN(g.size());
}
BENCHMARK(BM_PhaseTable)->Arg(8)->Arg(16)->Arg(32)->Complexity();

void BM_Eigendecomposition(benchmark::State& state) {
    const BoxGrid g = make_grid(2, 16.0, static_cast<int>(state.range(0)));
    const FieldSpec fs = make_constant_field_2d(0.5);
    const MagneticPhaseTable table = make_phase_table(fs, g);
    for (auto _ : state) {
        Hamiltonian h = assemble_h(fs, make_zero_potential(2), g, &table);
        benchmark::DoNotOptimize(h.evals.data());
    }
    state.SetComplexityN(g.size());
}
BENCHMARK(BM_Eigendecomposition)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SamplePaths(benchmark::State& state) {
    const double eps = 0.01;
    const LevySampler sampler = make_levy_sampler(2, eps);
    std::uint64_t i = 0;
    for (auto _ : state) {
        JumpPath p = sample_path({0.0, 0.0}, 1.0, eps, 7, &sampler, i++);
        benchmark::DoNotOptimize(p.times.data());
    }
}
BENCHMARK(BM_SamplePaths);

void BM_FkEstimate(benchmark::State& state) {
    const BoxGrid g = make_grid(2, 16.0, 16);
    const GridFunction u = sample(
        [](const Point& x) {
            return Complex{std::exp(-0.25 * (x[0] * x[0] + x[1] * x[1])), 0.0};
        },
        g);
    const FieldSpec fs = make_constant_field_2d(0.5);
    const PotentialSpec ps = make_zero_potential(2);
    for (auto _ : state) {
        McEstimate est =
            fk_estimate(u, {0.0, 0.0}, 0.5, fs, ps, state.range(0), 0.01, 123);
        benchmark::DoNotOptimize(est.mean);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FkEstimate)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BesselHalfInteger(benchmark::State& state) {
    double r = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bessel_k(1.5, r));
        r = r < 30.0 ? r + 0.1 : 0.1;
    }
}
BENCHMARK(BM_BesselHalfInteger);

void BM_BesselInteger(benchmark::State& state) {
    double r = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(bessel_k(2.0, r));
        r = r < 30.0 ? r + 0.1 : 0.1;
    }
}
BENCHMARK(BM_BesselInteger);

void BM_Circulation(benchmark::State& state) {
    SmallMatrix amp = SmallMatrix::zero(2);
    amp.at(0, 1) = 0.5;
    amp.at(1, 0) = -0.5;
    SmallMatrix lattice = SmallMatrix::zero(2);
    lattice.at(0, 0) = 2.0;
    lattice.at(1, 1) = 2.0;
    const FieldSpec fs = make_field(
        2, SmallMatrix::zero(2), {FieldMode{lattice_dual_frequency(lattice, {1, 0}), amp, 0.0}},
        lattice);
    double t = 0.0;
    for (auto _ : state) {
        const Point x{std::cos(t), std::sin(t)};
        const Point y{-1.0 + t * 1e-3, 2.0};
        benchmark::DoNotOptimize(circulation(fs, x, y));
        t += 0.01;
    }
}
BENCHMARK(BM_Circulation);

}  // namespace

BENCHMARK_MAIN();
