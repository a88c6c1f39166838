// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "tsl/fv_oracle.hpp"

using namespace tsl;

namespace {

void fv_b0(benchmark::State& state, FVKernel kernel)
{
    const int level = static_cast<int>(state.range(0));
    const RealGrid init = to_real(chessboard_grid(0, level));
    FVOptions o;
    o.kernel = kernel;
    for (auto _ : state) {
        FVState s = make_fv_state(init);
        fv_advance(s, [](double t, const Vec2& x) { return eval_b(0, t, x); }, 0.05, o);
        benchmark::DoNotOptimize(s.grid.values().data());
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(init.size()));
}

void fv_stream(benchmark::State& state, FVKernel kernel)
{
    const int level = static_cast<int>(state.range(0));
    const RealGrid init = to_real(chessboard_grid(0, level));
    FVOptions o;
    o.kernel = kernel;
    for (auto _ : state) {
        FVState s = make_fv_state(init);
        fv_advance_stream(s, [](double t, const Vec2& x) { return stream_b(0, t, x); }, 0.05, o);
        benchmark::DoNotOptimize(s.grid.values().data());
    }
}

void residual(benchmark::State& state, FVKernel kernel)
{
    ResidualOptions o;
    o.space_level = static_cast<int>(state.range(0));
    o.kernel = kernel;
    const TestFunction phi = residual_battery(0)[6];
    for (auto _ : state) benchmark::DoNotOptimize(weak_residual_unmixing(0, phi, {}, o));
}

}  // namespace

BENCHMARK_CAPTURE(fv_b0, serial, FVKernel::Serial)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fv_b0, parallel, FVKernel::Parallel)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fv_stream, serial, FVKernel::Serial)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(fv_stream, parallel, FVKernel::Parallel)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(residual, serial, FVKernel::Serial)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(residual, parallel, FVKernel::Parallel)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
