#include <benchmark/benchmark.h>

#include "scde/engines.hpp"
#include "scde/ensemble.hpp"
#include "scde/oracle.hpp"
#include "scde/scalar_functions.hpp"

namespace {

void bm_table_eval(benchmark::State& state) {
    scde::tables();  // build outside the timed region
    double u = 1e-3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scde::cf_deficit(u));
        benchmark::DoNotOptimize(scde::j_deficit(u));
        benchmark::DoNotOptimize(scde::phi(scde::ExtScalar(u)));
        u = u < 50.0 ? u * 1.1 : 1e-3;
    }
}
BENCHMARK(bm_table_eval);

void bm_table_invert(benchmark::State& state) {
    scde::tables();
    double d = 0.9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scde::cf_inv_deficit(d));
        d = d > 1e-4 ? d * 0.9 : 0.9;
    }
}
BENCHMARK(bm_table_invert);

void bm_avg_step(benchmark::State& state) {
    const auto spec =
        scde::EnsembleSpec::regular(3, 6, 3, static_cast<int>(state.range(0)));
    const auto eng = scde::make_engine(scde::EngineId::ga_avg, spec);
    scde::DeState s = eng->initial_state(0.9);
    for (auto _ : state) {
        s = eng->step(s);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(bm_avg_step)->Arg(20)->Arg(100);

void bm_met_step(benchmark::State& state) {
    const auto spec =
        scde::EnsembleSpec::regular(3, 6, 3, static_cast<int>(state.range(0)));
    const auto eng = scde::make_engine(scde::EngineId::rca_met, spec);
    scde::DeState s = eng->initial_state(0.9);
    for (auto _ : state) {
        s = eng->step(s);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(bm_met_step)->Arg(20)->Arg(100);

void bm_oracle_iteration(benchmark::State& state) {
    const scde::QuantParams q{0.02, 25.0};
    const auto ch = scde::channel_density(0.88, q);
    scde::QuantizedDensity x = ch;
    for (auto _ : state) {
        const auto y = scde::cn_update(x, 6);
        x = scde::vn_update(ch, y, 3);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(bm_oracle_iteration);

}  // namespace

BENCHMARK_MAIN();
