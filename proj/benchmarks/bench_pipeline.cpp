#include <benchmark/benchmark.h>

#include "gsd/clique_noise.hpp"
#include "gsd/denoise.hpp"
#include "gsd/spectral.hpp"
#include "gsd/synth.hpp"

namespace {

// Piecewise-constant signals: the low-pass model needs a dense
// eigendecomposition and would dominate setup at these sizes.
gsd::SynthInstance instance(benchmark::State& state) {
    gsd::SynthSpec spec;
    spec.family = gsd::GraphFamily::RandomGeometric;
    spec.signal = gsd::SignalModel::PiecewiseConstant;
    spec.n = static_cast<gsd::Index>(state.range(0));
    spec.seed = 17;
    return gsd::generate(spec);
}

void BM_LaplacianMatvec(benchmark::State& state) {
    const auto inst = instance(state);
    gsd::Vector out(inst.noisy.size());
    for (auto _ : state) {
        gsd::laplacian_matvec(inst.graph, inst.noisy, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(inst.graph.edge_count()));
}
BENCHMARK(BM_LaplacianMatvec)->Arg(1000)->Arg(10000);

void BM_Denoise(benchmark::State& state) {
    const auto inst = instance(state);
    for (auto _ : state) benchmark::DoNotOptimize(gsd::denoise(inst.graph, inst.noisy, 2.2));
}
BENCHMARK(BM_Denoise)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ExtremeEigenpairs(benchmark::State& state) {
    const auto inst = instance(state);
    for (auto _ : state) benchmark::DoNotOptimize(gsd::extreme_eigenpairs(inst.graph));
}
BENCHMARK(BM_ExtremeEigenpairs)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_EstimateNoise(benchmark::State& state) {
    const auto inst = instance(state);
    for (auto _ : state) benchmark::DoNotOptimize(gsd::estimate_noise(inst.graph, inst.noisy));
}
BENCHMARK(BM_EstimateNoise)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
    const auto inst = instance(state);
    for (auto _ : state) benchmark::DoNotOptimize(gsd::denoise_pipeline(inst.graph, inst.noisy));
}
BENCHMARK(BM_Pipeline)->Arg(200)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
