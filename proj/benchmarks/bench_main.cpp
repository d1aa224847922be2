#include <benchmark/benchmark.h>

#include <vector>

#include "giantbic/bic.hpp"
#include "giantbic/dynamics.hpp"
#include "giantbic/specfun.hpp"
#include "giantbic/spectrum.hpp"

using namespace giantbic;

namespace {

SystemConfig fig3_config() { return with_geometry(SystemConfig{}, 6, 3); }

void BM_BesselRow(benchmark::State& state) {
    std::vector<double> row(static_cast<std::size_t>(state.range(0)) + 1);
    double x = 1.0;
    for (auto _ : state) {
        bessel_j_row_into(x, row);
        benchmark::DoNotOptimize(row.data());
        x = x < 1400.0 ? x + 0.04 : 1.0;
    }
}
BENCHMARK(BM_BesselRow)->Arg(9)->Arg(64);

void BM_Kernels(benchmark::State& state) {
    const auto cfg = fig3_config();
    const TimeGrid grid(static_cast<double>(state.range(0)), 0.02);
    for (auto _ : state) benchmark::DoNotOptimize(build_kernels(cfg, grid));
}
BENCHMARK(BM_Kernels)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Volterra(benchmark::State& state) {
    const auto cfg = fig3_config();
    const TimeGrid grid(static_cast<double>(state.range(0)), 0.02);
    const auto kernels = build_kernels(cfg, grid);
    const auto psi0 = initial_state(AtomSelector::atom1, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(solve_volterra(cfg, psi0, grid, kernels));
    state.SetComplexityN(static_cast<benchmark::IterationCount>(grid.nodes()));
}
BENCHMARK(BM_Volterra)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNSquared);

void BM_Eigendecompose(benchmark::State& state) {
    const auto h = build_hamiltonian(fig3_config(), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(h));
}
BENCHMARK(BM_Eigendecompose)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_RootSearch(benchmark::State& state) {
    const auto cfg = fig3_config();
    RootOptions opts;
    opts.lattice_n_c = 0;
    for (auto _ : state) benchmark::DoNotOptimize(find_bic_roots(cfg, opts));
}
BENCHMARK(BM_RootSearch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
