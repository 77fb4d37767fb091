#include <benchmark/benchmark.h>

#include "tdhf/meanfield.hpp"
#include "tdhf/propagate.hpp"
#include "tdhf/scenario.hpp"

using namespace tdhf;

namespace {

DensityMatrix rank2_state(GridPtr g) {
    const double off = g->dim() == 1 ? 1.5 : 0.75;
    std::array<double, 3> c1{-off, 0, 0}, c2{off, 0, 0};
    std::array<double, 3> p1{0.3, 0, 0}, p2{-0.3, 0, 0};
    return new_state({0.6, 0.4}, {gaussian_orbital(g, c1, 1.0, p1),
                                  gaussian_orbital(g, c2, 1.0, p2)});
}

void BM_TransformRoundTrip(benchmark::State& state) {
    auto g = make_grid(3, static_cast<int>(state.range(0)), 14.0);
    ScalarField f = gaussian_orbital(g, {0, 0, 0}, 1.0, {0.5, 0, 0});
    for (auto _ : state) {
        ScalarField back = transform_inverse(transform_forward(f));
        benchmark::DoNotOptimize(back.v.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TransformRoundTrip)->Arg(16)->Arg(32)->Complexity();

void BM_CoulombSolve(benchmark::State& state) {
    auto g = make_grid(3, static_cast<int>(state.range(0)), 14.0);
    ScalarField n = particle_density(rank2_state(g));
    for (auto _ : state) {
        ScalarField v = coulomb_solve(n);
        benchmark::DoNotOptimize(v.v.data());
    }
}
BENCHMARK(BM_CoulombSolve)->Arg(16)->Arg(32);

void BM_ExchangeApply(benchmark::State& state) {
    auto g = make_grid(3, static_cast<int>(state.range(0)), 14.0);
    DensityMatrix rho = rank2_state(g);
    for (auto _ : state) {
        ScalarField v = apply_exchange(rho, rho.orbitals[0]);
        benchmark::DoNotOptimize(v.v.data());
    }
}
BENCHMARK(BM_ExchangeApply)->Arg(16)->Arg(32);

void BM_StrangStep(benchmark::State& state) {
    auto g = make_grid(3, static_cast<int>(state.range(0)), 14.0);
    DensityMatrix rho = rank2_state(g);
    for (auto _ : state) {
        DensityMatrix next = strang_step(rho, 1e-3);
        benchmark::DoNotOptimize(next.occupations.data());
    }
}
BENCHMARK(BM_StrangStep)->Arg(16)->Arg(32);

void BM_NormReport(benchmark::State& state) {
    auto g = make_grid(3, static_cast<int>(state.range(0)), 14.0);
    DensityMatrix rho = rank2_state(g);
    for (auto _ : state) {
        NormReport r = norm_report(rho);
        benchmark::DoNotOptimize(r.y_norm);
    }
}
BENCHMARK(BM_NormReport)->Arg(16)->Arg(32);

void BM_PicardWindow(benchmark::State& state) {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix rho = rank2_state(g);
    PropagatorConfig cfg;
    cfg.scheme = Scheme::picard_operator;
    cfg.dt = 0.05;
    cfg.t_final = 0.05;
    cfg.sample_stride = 1;
    for (auto _ : state) {
        Trajectory t = picard_solve(rho, 0.05, cfg);
        benchmark::DoNotOptimize(t.states.back().occupations.data());
    }
}
BENCHMARK(BM_PicardWindow);

}  // namespace

BENCHMARK_MAIN();
